#pragma once

// Append/pop codec pairs used by the bits-back chain. Every codec derives its
// frequencies deterministically from its parameters, so the encoder and the
// decoder rebuild identical tables. Vector codecs push element 0 first and
// therefore pop it last.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bbans/ans.hpp"
#include "bbans/discretization.hpp"

namespace bbans {

using Image = std::vector<std::uint8_t>;
using LatentIndices = std::vector<std::uint32_t>;

// ---------------------------------------------------------------------------
// Scalar codecs

/// Two-symbol codec. freq(0) = round((1 - p) 2^r) after clamping p to
/// [2^-r / 2, 1 - 2^-r / 2], so both symbols keep at least one unit.
class BernoulliCodec {
 public:
  using symbol_type = std::uint8_t;

  BernoulliCodec(double prob_one, unsigned precision);

  std::uint64_t frequency(std::uint8_t bit) const noexcept {
    return bit ? (std::uint64_t{1} << precision_) - freq_zero_ : freq_zero_;
  }
  double probability(std::uint8_t bit) const noexcept;
  unsigned precision() const noexcept { return precision_; }

  void push(AnsState& state, std::uint8_t bit) const;
  std::uint8_t pop(AnsState& state) const;

 private:
  std::uint64_t freq_zero_;
  unsigned precision_;
};

/// Uniform over 2^bits symbols: every symbol costs exactly `bits` bits.
class UniformCodec {
 public:
  using symbol_type = std::uint32_t;

  explicit UniformCodec(unsigned bits);

  unsigned bits() const noexcept { return bits_; }
  void push(AnsState& state, std::uint32_t symbol) const;
  std::uint32_t pop(AnsState& state) const;

 private:
  unsigned bits_;
};

struct BetaBinomialParams {
  double alpha = 1.0;
  double beta = 1.0;
  unsigned n = 255;
};

inline constexpr double kBetaBinomialParamCap = 1e6;

/// Exact beta-binomial masses over {0..n}:
///   log pmf(k) = log C(n,k) + log B(k + alpha, n - k + beta) - log B(alpha, beta).
/// alpha and beta above 1e6 are capped; non-finite or non-positive values
/// throw NumericalRange.
std::vector<double> beta_binomial_pmf(const BetaBinomialParams& params);

QuantizedDistribution beta_binomial_codec(const BetaBinomialParams& params,
                                          unsigned precision);

/// Bucket indices of one latent dimension under N(mu, sigma^2) restricted to
/// the grid's buckets.
///
/// The quantized CDF is F(i) = floor(Phi((u_i - mu) / sigma) (2^r - 2^p)) + i,
/// so every bucket keeps at least one unit and F(2^p) = 2^r. Frequencies are
/// evaluated on demand; popping binary-searches F, costing O(p) CDF calls
/// instead of materializing a 2^p-entry table per dimension.
class GaussianBucketCodec {
 public:
  using symbol_type = std::uint32_t;

  GaussianBucketCodec(double mu, double sigma, const DiscretizationGrid& grid,
                      unsigned precision);

  std::uint64_t cdf(std::size_t i) const;
  std::uint64_t frequency(std::uint32_t i) const { return cdf(i + 1) - cdf(i); }
  double probability(std::uint32_t i) const;
  unsigned precision() const noexcept { return precision_; }
  /// Bucket whose quantized interval contains cf, for cf < 2^precision.
  std::uint32_t locate(std::uint64_t cf) const;

  void push(AnsState& state, std::uint32_t index) const;
  std::uint32_t pop(AnsState& state) const;

 private:
  double mu_;
  double sigma_;
  const DiscretizationGrid* grid_;
  unsigned precision_;
  std::uint64_t spread_;  // 2^r - 2^p
};

// ---------------------------------------------------------------------------
// Vector codecs

/// Independent per-dimension Gaussian posterior over bucket indices.
class DiagonalGaussianPosteriorCodec {
 public:
  using symbol_type = LatentIndices;

  DiagonalGaussianPosteriorCodec(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                                 const DiscretizationGrid& grid, unsigned precision);

  std::size_t dims() const noexcept { return dims_.size(); }
  const GaussianBucketCodec& dimension(std::size_t d) const { return dims_.at(d); }
  double log2_probability(std::span<const std::uint32_t> indices) const;

  void push(AnsState& state, std::span<const std::uint32_t> indices) const;
  LatentIndices pop(AnsState& state) const;

 private:
  std::vector<GaussianBucketCodec> dims_;
};

/// Prior over bucket indices: `dims` independent uniform p-bit symbols.
class UniformVectorCodec {
 public:
  using symbol_type = LatentIndices;

  UniformVectorCodec(std::size_t dims, unsigned bits) : dims_(dims), codec_(bits) {}

  std::size_t dims() const noexcept { return dims_; }
  double log2_probability(std::span<const std::uint32_t>) const {
    return -static_cast<double>(dims_) * codec_.bits();
  }
  void push(AnsState& state, std::span<const std::uint32_t> indices) const;
  LatentIndices pop(AnsState& state) const;

 private:
  std::size_t dims_;
  UniformCodec codec_;
};

/// Per-pixel Bernoulli likelihood over a binary image.
class BernoulliImageCodec {
 public:
  using symbol_type = Image;

  BernoulliImageCodec(const Eigen::VectorXd& probs, unsigned precision);

  std::size_t size() const noexcept { return pixels_.size(); }
  double log2_probability(std::span<const std::uint8_t> image) const;
  void push(AnsState& state, std::span<const std::uint8_t> image) const;
  Image pop(AnsState& state) const;

 private:
  std::vector<BernoulliCodec> pixels_;
};

/// Per-pixel beta-binomial likelihood over an 8-bit image (n = 255).
class BetaBinomialImageCodec {
 public:
  using symbol_type = Image;

  BetaBinomialImageCodec(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                         unsigned precision);

  std::size_t size() const noexcept { return alpha_.size(); }
  double log2_probability(std::span<const std::uint8_t> image) const;
  void push(AnsState& state, std::span<const std::uint8_t> image) const;
  Image pop(AnsState& state) const;

 private:
  QuantizedDistribution pixel(std::size_t i) const;

  std::vector<double> alpha_;
  std::vector<double> beta_;
  unsigned precision_;
};

}  // namespace bbans
