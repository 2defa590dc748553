#include "bbans/bits_back.hpp"

#include <string>

#include "bbans/errors.hpp"

namespace bbans {

VaeCodingModel::VaeCodingModel(const VaeModel& model, const DiscretizationGrid& grid,
                               unsigned precision)
    : model_(&model), grid_(&grid), precision_(precision) {
  if (precision < grid.precision() + 8 || precision > kMaxAnsPrecision)
    throw std::invalid_argument("ANS precision " + std::to_string(precision) +
                                " must be in [latent precision + 8, 32]");
}

DiagonalGaussianPosteriorCodec VaeCodingModel::posterior(const Image& image) const {
  const auto q = recognize(*model_, image);
  return DiagonalGaussianPosteriorCodec(q.mu, q.sigma, *grid_, precision_);
}

PixelLikelihoodCodec VaeCodingModel::likelihood(const LatentIndices& indices) const {
  const auto params = generate(*model_, index_to_latent(*grid_, indices));
  if (params.family == LikelihoodFamily::bernoulli)
    return PixelLikelihoodCodec(BernoulliImageCodec(params.probs, precision_));
  return PixelLikelihoodCodec(BetaBinomialImageCodec(params.alpha, params.beta, precision_));
}

void check_image(const VaeModel& model, std::span<const std::uint8_t> image) {
  if (static_cast<Eigen::Index>(image.size()) != model.input_dim)
    throw DomainError("image has " + std::to_string(image.size()) + " pixels, model expects " +
                      std::to_string(model.input_dim));
  if (model.family == LikelihoodFamily::bernoulli) {
    for (std::size_t i = 0; i < image.size(); ++i)
      if (image[i] > 1)
        throw DomainError("pixel " + std::to_string(i) + " = " + std::to_string(image[i]) +
                          " is not binary; binarize the data for a Bernoulli model");
  }
}

ChainSession::ChainSession(const VaeModel& model, const DiscretizationGrid& grid,
                           AnsState initial)
    : coder_(model, grid, initial.precision()),
      state_(std::move(initial)),
      init_bits_(state_.total_length_bits()) {}

void ChainSession::append(const Image& image) {
  check_image(coder_.model(), image);
  bits_back_append(state_, coder_, image);
  ++images_coded_;
  rate_log_.push_back(state_.total_length_bits());
}

Image ChainSession::pop() {
  if (images_coded_ == 0) throw StateUnderflow("no images left on the chain");
  Image image = bits_back_pop(state_, coder_);
  --images_coded_;
  return image;
}

double ChainSession::net_bits_per_dim() const {
  if (images_coded_ == 0) return 0.0;
  const double net = static_cast<double>(state_.total_length_bits()) - static_cast<double>(init_bits_);
  return net / (static_cast<double>(images_coded_) * static_cast<double>(coder_.model().input_dim));
}

}  // namespace bbans
