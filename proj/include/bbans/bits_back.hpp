#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "bbans/ans.hpp"
#include "bbans/codecs.hpp"
#include "bbans/discretization.hpp"
#include "bbans/vae.hpp"

namespace bbans {

/// A model usable for bits-back coding: codecs for the approximate posterior
/// q(y|s), the likelihood p(s|y) and the prior p(y).
template <typename M>
concept LatentVariableModel = requires(const M& m, const typename M::data_type& s,
                                       const typename M::latent_type& y) {
  typename M::data_type;
  typename M::latent_type;
  requires SymbolCodec<decltype(m.posterior(s))>;
  requires SymbolCodec<decltype(m.likelihood(y))>;
  requires SymbolCodec<decltype(m.prior())>;
};

/// One bits-back step. Net expected growth of the message is the negative
/// ELBO of `s`:
///   1. pop y from q(.|s)      shrinks by -log2 q(y|s)
///   2. push s under p(.|y)    grows by -log2 p(s|y)
///   3. push y under p(.)      grows by -log2 p(y)
template <LatentVariableModel M>
void bits_back_append(AnsState& message, const M& model, const typename M::data_type& s) {
  const typename M::latent_type y = model.posterior(s).pop(message);
  model.likelihood(y).push(message, s);
  model.prior().push(message, y);
}

/// Exact inverse of bits_back_append, each line undoing one step above.
template <LatentVariableModel M>
typename M::data_type bits_back_pop(AnsState& message, const M& model) {
  const typename M::latent_type y = model.prior().pop(message);
  typename M::data_type s = model.likelihood(y).pop(message);
  model.posterior(s).push(message, y);
  return s;
}

/// Pixel likelihood p(s|y) for either family; pushes pixels in row-major
/// order.
class PixelLikelihoodCodec {
 public:
  using symbol_type = Image;

  explicit PixelLikelihoodCodec(BernoulliImageCodec codec) : codec_(std::move(codec)) {}
  explicit PixelLikelihoodCodec(BetaBinomialImageCodec codec) : codec_(std::move(codec)) {}

  double log2_probability(std::span<const std::uint8_t> image) const {
    return std::visit([&](const auto& c) { return c.log2_probability(image); }, codec_);
  }
  void push(AnsState& state, std::span<const std::uint8_t> image) const {
    std::visit([&](const auto& c) { c.push(state, image); }, codec_);
  }
  Image pop(AnsState& state) const {
    return std::visit([&](const auto& c) { return c.pop(state); }, codec_);
  }

 private:
  std::variant<BernoulliImageCodec, BetaBinomialImageCodec> codec_;
};

/// Binds a VAE and a latent grid into the three codecs bits-back needs.
class VaeCodingModel {
 public:
  using data_type = Image;
  using latent_type = LatentIndices;

  VaeCodingModel(const VaeModel& model, const DiscretizationGrid& grid,
                 unsigned precision = kDefaultAnsPrecision);

  DiagonalGaussianPosteriorCodec posterior(const Image& image) const;
  PixelLikelihoodCodec likelihood(const LatentIndices& indices) const;
  UniformVectorCodec prior() const {
    return UniformVectorCodec(static_cast<std::size_t>(model_->latent_dim), grid_->precision());
  }

  const VaeModel& model() const noexcept { return *model_; }
  const DiscretizationGrid& grid() const noexcept { return *grid_; }
  unsigned precision() const noexcept { return precision_; }

 private:
  const VaeModel* model_;
  const DiscretizationGrid* grid_;
  unsigned precision_;
};

/// Throws DomainError unless the image fits the model's input and pixel
/// domain ({0,1} for Bernoulli, {0..255} for beta-binomial).
void check_image(const VaeModel& model, std::span<const std::uint8_t> image);

/// A running BB-ANS chain over images. If append or pop throws, the
/// session's message is left unspecified and the chain must be restarted.
class ChainSession {
 public:
  ChainSession(const VaeModel& model, const DiscretizationGrid& grid, AnsState initial);

  void append(const Image& image);
  /// Most recently appended image still on the stack.
  Image pop();

  const AnsState& state() const noexcept { return state_; }
  std::size_t images_coded() const noexcept { return images_coded_; }
  std::size_t init_bits() const noexcept { return init_bits_; }
  /// Total message bits recorded after each append, in append order.
  std::span<const std::size_t> rate_log() const noexcept { return rate_log_; }
  /// (message bits - initial bits) / (images * input_dim).
  double net_bits_per_dim() const;

 private:
  VaeCodingModel coder_;
  AnsState state_;
  std::size_t images_coded_ = 0;
  std::size_t init_bits_;
  std::vector<std::size_t> rate_log_;
};

}  // namespace bbans
