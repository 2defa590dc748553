#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bbans {

inline constexpr unsigned kDefaultLatentPrecision = 16;
inline constexpr unsigned kMaxLatentPrecision = 24;

/// Equal-mass partition of the real line under the standard normal prior.
///
/// Bucket i covers [u_i, u_{i+1}) with u_i = Phi^-1(i / 2^p), so each bucket
/// carries prior mass 2^-p and a bucket index costs exactly p bits under the
/// prior. The representative point of bucket i is its mass median
/// Phi^-1((i + 1/2) / 2^p). The grid depends on p alone, so a decoder
/// rebuilds it from the container header.
///
/// Boundaries and representatives are tabulated for p <= 16 and evaluated on
/// demand above that; both paths call the same quantile function.
class DiscretizationGrid {
 public:
  explicit DiscretizationGrid(unsigned precision);

  unsigned precision() const noexcept { return precision_; }
  std::size_t size() const noexcept { return std::size_t{1} << precision_; }

  /// u_i for i in [0, 2^p]; u_0 = -inf and u_{2^p} = +inf.
  double boundary(std::size_t i) const;
  /// y_i for i in [0, 2^p).
  double representative(std::size_t i) const;

 private:
  unsigned precision_;
  std::vector<double> boundaries_;
  std::vector<double> representatives_;
};

DiscretizationGrid build_grid(unsigned precision);

/// Representative latent value for each bucket index. Throws IndexOutOfRange.
Eigen::VectorXd index_to_latent(const DiscretizationGrid& grid,
                                std::span<const std::uint32_t> indices);

}  // namespace bbans
