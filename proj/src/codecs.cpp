#include "bbans/codecs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bbans/errors.hpp"
#include "bbans/numerics.hpp"

namespace bbans {

// --- BernoulliCodec ---------------------------------------------------------

BernoulliCodec::BernoulliCodec(double prob_one, unsigned precision) : precision_(precision) {
  if (precision == 0 || precision > kMaxAnsPrecision)
    throw std::invalid_argument("Bernoulli precision out of range");
  const double total = std::ldexp(1.0, static_cast<int>(precision));
  const double lo = 0.5 / total;
  const double hi = 1.0 - lo;
  // Written so that NaN lands on the lower clamp.
  double p = prob_one;
  if (!(p >= lo)) p = lo;
  if (p > hi) p = hi;
  auto f0 = static_cast<std::uint64_t>(std::round((1.0 - p) * total));
  const std::uint64_t t = std::uint64_t{1} << precision;
  freq_zero_ = std::clamp<std::uint64_t>(f0, 1, t - 1);
}

double BernoulliCodec::probability(std::uint8_t bit) const noexcept {
  return std::ldexp(static_cast<double>(frequency(bit)), -static_cast<int>(precision_));
}

void BernoulliCodec::push(AnsState& state, std::uint8_t bit) const {
  if (bit > 1) throw DomainError("binary pixel value " + std::to_string(bit));
  state.encode(bit ? freq_zero_ : 0, frequency(bit), precision_);
}

std::uint8_t BernoulliCodec::pop(AnsState& state) const {
  const std::uint8_t bit = state.peek(precision_) >= freq_zero_ ? 1 : 0;
  state.decode(bit ? freq_zero_ : 0, frequency(bit), precision_);
  return bit;
}

// --- UniformCodec -----------------------------------------------------------

UniformCodec::UniformCodec(unsigned bits) : bits_(bits) {
  if (bits == 0 || bits > kMaxAnsPrecision)
    throw std::invalid_argument("uniform codec width must be in [1, 32]");
}

void UniformCodec::push(AnsState& state, std::uint32_t symbol) const {
  if (bits_ < 32 && symbol >> bits_)
    throw IndexOutOfRange("symbol " + std::to_string(symbol) + " needs more than " +
                          std::to_string(bits_) + " bits");
  state.encode(symbol, 1, bits_);
}

std::uint32_t UniformCodec::pop(AnsState& state) const {
  const auto symbol = static_cast<std::uint32_t>(state.peek(bits_));
  state.decode(symbol, 1, bits_);
  return symbol;
}

// --- Beta-binomial ----------------------------------------------------------

namespace {

std::vector<double> make_log_binomial_row(unsigned n) {
  std::vector<double> row(n + 1);
  const double log_n_fact = log_gamma(n + 1.0);
  for (unsigned k = 0; k <= n; ++k)
    row[k] = log_n_fact - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
  return row;
}

// log C(n, k) for k = 0..n; the 8-bit pixel row is built once.
const std::vector<double>& log_binomial_row(unsigned n) {
  static const std::vector<double> pixel_row = make_log_binomial_row(255);
  if (n == 255) return pixel_row;
  thread_local std::vector<double> other;
  other = make_log_binomial_row(n);
  return other;
}

}  // namespace

std::vector<double> beta_binomial_pmf(const BetaBinomialParams& params) {
  double alpha = params.alpha;
  double beta = params.beta;
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !(alpha > 0.0) || !(beta > 0.0))
    throw NumericalRange("beta-binomial parameters must be finite and positive");
  alpha = std::min(alpha, kBetaBinomialParamCap);
  beta = std::min(beta, kBetaBinomialParamCap);
  const unsigned n = params.n;

  // log Gamma(k + a) - log Gamma(a) as a running sum of log(a + j).
  auto rising = [n](double a) {
    std::vector<double> out(n + 1);
    out[0] = 0.0;
    for (unsigned k = 0; k < n; ++k) out[k + 1] = out[k] + std::log(a + k);
    return out;
  };
  const std::vector<double> ra = rising(alpha);
  const std::vector<double> rb = rising(beta);

  // log B(k+a, n-k+b) - log B(a, b)
  //   = [lG(k+a) - lG(a)] + [lG(n-k+b) - lG(b)] - [lG(n+a+b) - lG(a+b)].
  const double norm = rising(alpha + beta)[n];
  const std::vector<double>& log_choose = log_binomial_row(n);

  std::vector<double> log_pmf(n + 1);
  for (unsigned k = 0; k <= n; ++k) log_pmf[k] = log_choose[k] + ra[k] + rb[n - k] - norm;
  std::vector<double> pmf(n + 1);
  for (unsigned k = 0; k <= n; ++k) pmf[k] = std::exp(log_pmf[k]);
  return pmf;
}

QuantizedDistribution beta_binomial_codec(const BetaBinomialParams& params,
                                          unsigned precision) {
  const std::vector<double> pmf = beta_binomial_pmf(params);
  return QuantizedDistribution::from_masses(pmf, precision);
}

// --- GaussianBucketCodec ----------------------------------------------------

GaussianBucketCodec::GaussianBucketCodec(double mu, double sigma,
                                         const DiscretizationGrid& grid, unsigned precision)
    : mu_(mu), sigma_(sigma), grid_(&grid), precision_(precision) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0))
    throw NumericalRange("posterior needs finite mu and finite sigma > 0");
  if (precision > kMaxAnsPrecision || precision < grid.precision() + 8)
    throw std::invalid_argument("ANS precision must be at least latent precision + 8");
  spread_ = (std::uint64_t{1} << precision) - grid.size();
}

std::uint64_t GaussianBucketCodec::cdf(std::size_t i) const {
  const std::size_t n = grid_->size();
  if (i == 0) return 0;
  if (i >= n) return std::uint64_t{1} << precision_;
  const double z = (grid_->boundary(i) - mu_) / sigma_;
  const double mass_below = normal_cdf(z);
  const auto scaled = static_cast<std::uint64_t>(std::floor(mass_below * static_cast<double>(spread_)));
  return std::min(scaled, spread_) + i;
}

double GaussianBucketCodec::probability(std::uint32_t i) const {
  return std::ldexp(static_cast<double>(frequency(i)), -static_cast<int>(precision_));
}

void GaussianBucketCodec::push(AnsState& state, std::uint32_t index) const {
  if (index >= grid_->size())
    throw IndexOutOfRange("bucket index " + std::to_string(index));
  const std::uint64_t start = cdf(index);
  state.encode(start, cdf(index + 1) - start, precision_);
}

std::uint32_t GaussianBucketCodec::locate(std::uint64_t cf) const {
  std::size_t lo = 0;
  std::size_t hi = grid_->size();
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (cdf(mid) <= cf)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<std::uint32_t>(lo);
}

std::uint32_t GaussianBucketCodec::pop(AnsState& state) const {
  const std::uint32_t index = locate(state.peek(precision_));
  const std::uint64_t start = cdf(index);
  state.decode(start, cdf(index + 1) - start, precision_);
  return index;
}

// --- DiagonalGaussianPosteriorCodec -----------------------------------------

DiagonalGaussianPosteriorCodec::DiagonalGaussianPosteriorCodec(
    const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma, const DiscretizationGrid& grid,
    unsigned precision) {
  if (mu.size() != sigma.size()) throw std::invalid_argument("mu/sigma size mismatch");
  dims_.reserve(static_cast<std::size_t>(mu.size()));
  for (Eigen::Index d = 0; d < mu.size(); ++d)
    dims_.emplace_back(mu[d], sigma[d], grid, precision);
}

double DiagonalGaussianPosteriorCodec::log2_probability(
    std::span<const std::uint32_t> indices) const {
  double total = 0.0;
  for (std::size_t d = 0; d < dims_.size(); ++d)
    total += std::log2(dims_[d].probability(indices[d]));
  return total;
}

void DiagonalGaussianPosteriorCodec::push(AnsState& state,
                                          std::span<const std::uint32_t> indices) const {
  if (indices.size() != dims_.size()) throw DomainError("latent dimension mismatch");
  for (std::size_t d = 0; d < dims_.size(); ++d) dims_[d].push(state, indices[d]);
}

LatentIndices DiagonalGaussianPosteriorCodec::pop(AnsState& state) const {
  LatentIndices indices(dims_.size());
  for (std::size_t d = dims_.size(); d-- > 0;) indices[d] = dims_[d].pop(state);
  return indices;
}

// --- UniformVectorCodec -----------------------------------------------------

void UniformVectorCodec::push(AnsState& state, std::span<const std::uint32_t> indices) const {
  if (indices.size() != dims_) throw DomainError("latent dimension mismatch");
  for (std::uint32_t i : indices) codec_.push(state, i);
}

LatentIndices UniformVectorCodec::pop(AnsState& state) const {
  LatentIndices indices(dims_);
  for (std::size_t d = dims_; d-- > 0;) indices[d] = codec_.pop(state);
  return indices;
}

// --- BernoulliImageCodec ----------------------------------------------------

BernoulliImageCodec::BernoulliImageCodec(const Eigen::VectorXd& probs, unsigned precision) {
  pixels_.reserve(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i) pixels_.emplace_back(probs[i], precision);
}

double BernoulliImageCodec::log2_probability(std::span<const std::uint8_t> image) const {
  double total = 0.0;
  for (std::size_t i = 0; i < pixels_.size(); ++i)
    total += std::log2(pixels_[i].probability(image[i]));
  return total;
}

void BernoulliImageCodec::push(AnsState& state, std::span<const std::uint8_t> image) const {
  if (image.size() != pixels_.size()) throw DomainError("image size mismatch");
  for (std::size_t i = 0; i < pixels_.size(); ++i) pixels_[i].push(state, image[i]);
}

Image BernoulliImageCodec::pop(AnsState& state) const {
  Image image(pixels_.size());
  for (std::size_t i = pixels_.size(); i-- > 0;) image[i] = pixels_[i].pop(state);
  return image;
}

// --- BetaBinomialImageCodec -------------------------------------------------

BetaBinomialImageCodec::BetaBinomialImageCodec(const Eigen::VectorXd& alpha,
                                               const Eigen::VectorXd& beta, unsigned precision)
    : alpha_(alpha.data(), alpha.data() + alpha.size()),
      beta_(beta.data(), beta.data() + beta.size()),
      precision_(precision) {
  if (alpha_.size() != beta_.size()) throw std::invalid_argument("alpha/beta size mismatch");
}

QuantizedDistribution BetaBinomialImageCodec::pixel(std::size_t i) const {
  return beta_binomial_codec({alpha_[i], beta_[i], 255}, precision_);
}

double BetaBinomialImageCodec::log2_probability(std::span<const std::uint8_t> image) const {
  double total = 0.0;
  for (std::size_t i = 0; i < alpha_.size(); ++i)
    total += std::log2(pixel(i).probability(image[i]));
  return total;
}

void BetaBinomialImageCodec::push(AnsState& state, std::span<const std::uint8_t> image) const {
  if (image.size() != alpha_.size()) throw DomainError("image size mismatch");
  for (std::size_t i = 0; i < alpha_.size(); ++i) pixel(i).push(state, image[i]);
}

Image BetaBinomialImageCodec::pop(AnsState& state) const {
  Image image(alpha_.size());
  for (std::size_t i = alpha_.size(); i-- > 0;)
    image[i] = static_cast<std::uint8_t>(pixel(i).pop(state));
  return image;
}

}  // namespace bbans
