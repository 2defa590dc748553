#include "bbans/numerics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace bbans {
namespace {

template <std::size_t N>
double horner(const std::array<double, N>& c, double x) noexcept {
  double v = 0.0;
  for (std::size_t k = N; k-- > 0;) v = v * x + c[k];
  return v;
}

}  // namespace

double normal_cdf(double z) noexcept {
  if (std::isnan(z)) return z;
  const double a = std::fabs(z);
  double tail = 0.0;
  if (a <= 37.0) {
    const double e = std::exp(-0.5 * a * a);
    if (a < 7.07106781186547) {
      double num = 3.52624965998911e-02 * a + 0.700383064443688;
      num = num * a + 6.37396220353165;
      num = num * a + 33.912866078383;
      num = num * a + 112.079291497871;
      num = num * a + 221.213596169931;
      num = num * a + 220.206867912376;
      double den = 8.83883476483184e-02 * a + 1.75566716318264;
      den = den * a + 16.064177579207;
      den = den * a + 86.7807322029461;
      den = den * a + 296.564248779674;
      den = den * a + 637.333633378831;
      den = den * a + 793.826512519948;
      den = den * a + 440.413735824752;
      tail = e * num / den;
    } else {
      double cf = a + 0.65;
      cf = a + 4.0 / cf;
      cf = a + 3.0 / cf;
      cf = a + 2.0 / cf;
      cf = a + 1.0 / cf;
      tail = e / cf / 2.506628274631;
    }
  }
  return z > 0.0 ? 1.0 - tail : tail;
}

double normal_quantile(double p) noexcept {
  static constexpr std::array<double, 8> a{
      3.3871328727963666080e0, 1.3314166789178437745e+2,
      1.9715909503065514427e+3, 1.3731693765509461125e+4,
      4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr std::array<double, 8> b{
      1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2,
      5.3941960214247511077e+3, 2.1213794301586595867e+4,
      3.9307895800092710610e+4, 2.8729085735721942674e+4,
      5.2264952788528545610e+3};
  static constexpr std::array<double, 8> c{
      1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr std::array<double, 8> d{
      1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9};
  static constexpr std::array<double, 8> e{
      6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr std::array<double, 8> f{
      1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4,
      1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15};

  constexpr double inf = std::numeric_limits<double>::infinity();
  if (std::isnan(p) || p < 0.0 || p > 1.0)
    return std::numeric_limits<double>::quiet_NaN();
  if (p == 0.0) return -inf;
  if (p == 1.0) return inf;

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, r) / horner(b, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    v = horner(e, r) / horner(f, r);
  }
  return q < 0.0 ? -v : v;
}

double log_gamma(double x) noexcept {
  static constexpr std::array<double, 9> lanczos{
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;

  if (std::isnan(x) || x <= 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           log_gamma(1.0 - x);
  }
  const double xm1 = x - 1.0;
  double sum = lanczos[0];
  for (int k = 1; k < 9; ++k) sum += lanczos[k] / (xm1 + k);
  const double t = xm1 + g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xm1 + 0.5) * std::log(t) -
         t + std::log(sum);
}

}  // namespace bbans
