#include "bbans/discretization.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bbans/errors.hpp"
#include "bbans/numerics.hpp"

namespace bbans {
namespace {

constexpr unsigned kTabulateUpTo = 16;

double boundary_value(std::size_t i, unsigned precision) {
  return normal_quantile(std::ldexp(static_cast<double>(i), -static_cast<int>(precision)));
}

double representative_value(std::size_t i, unsigned precision) {
  return normal_quantile(
      std::ldexp(static_cast<double>(2 * i + 1), -static_cast<int>(precision) - 1));
}

}  // namespace

DiscretizationGrid::DiscretizationGrid(unsigned precision) : precision_(precision) {
  if (precision < 1 || precision > kMaxLatentPrecision)
    throw std::invalid_argument("latent precision must be in [1, 24], got " +
                                std::to_string(precision));
  if (precision <= kTabulateUpTo) {
    const std::size_t n = size();
    boundaries_.resize(n + 1);
    representatives_.resize(n);
    for (std::size_t i = 0; i <= n; ++i) boundaries_[i] = boundary_value(i, precision);
    for (std::size_t i = 0; i < n; ++i) representatives_[i] = representative_value(i, precision);
  }
}

double DiscretizationGrid::boundary(std::size_t i) const {
  if (i > size()) throw IndexOutOfRange("boundary index " + std::to_string(i));
  return boundaries_.empty() ? boundary_value(i, precision_) : boundaries_[i];
}

double DiscretizationGrid::representative(std::size_t i) const {
  if (i >= size()) throw IndexOutOfRange("bucket index " + std::to_string(i));
  return representatives_.empty() ? representative_value(i, precision_)
                                  : representatives_[i];
}

DiscretizationGrid build_grid(unsigned precision) { return DiscretizationGrid(precision); }

Eigen::VectorXd index_to_latent(const DiscretizationGrid& grid,
                                std::span<const std::uint32_t> indices) {
  Eigen::VectorXd latent(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t d = 0; d < indices.size(); ++d)
    latent[static_cast<Eigen::Index>(d)] = grid.representative(indices[d]);
  return latent;
}

}  // namespace bbans
