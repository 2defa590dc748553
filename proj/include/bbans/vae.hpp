#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bbans/codecs.hpp"
#include "bbans/discretization.hpp"
#include "bbans/errors.hpp"

namespace bbans {

enum class LikelihoodFamily : std::uint8_t { bernoulli = 0, beta_binomial = 1 };

std::string_view to_string(LikelihoodFamily family);
/// Throws UnknownLikelihoodFamily.
LikelihoodFamily parse_likelihood_family(std::string_view name);

using ModelHash = std::array<std::uint8_t, 32>;

/// SHA-256 of a byte buffer.
ModelHash sha256(std::span<const std::uint8_t> bytes);
std::string to_hex(const ModelHash& hash);

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// y = W x + b, W stored row-major as (out, in).
template <typename Scalar>
struct DenseLayer {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weight;
  Vector<Scalar> bias;

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }

  template <typename Derived>
  Vector<Scalar> operator()(const Eigen::MatrixBase<Derived>& x) const {
    return weight * x + bias;
  }
};

/// Single-hidden-layer VAE: recognition network s -> (mu, log sigma) and
/// generative network y -> per-pixel likelihood parameters.
template <typename Scalar>
struct BasicVaeModel {
  LikelihoodFamily family = LikelihoodFamily::bernoulli;
  Eigen::Index input_dim = 0;
  Eigen::Index hidden_dim = 0;
  Eigen::Index latent_dim = 0;

  DenseLayer<Scalar> encoder_hidden;
  DenseLayer<Scalar> encoder_mu;
  DenseLayer<Scalar> encoder_log_sigma;
  DenseLayer<Scalar> decoder_hidden;
  /// Bernoulli: {logits}. Beta-binomial: {alpha, beta} pre-activations.
  std::vector<DenseLayer<Scalar>> decoder_heads;

  ModelHash model_hash{};
};

using VaeModel = BasicVaeModel<double>;

template <typename Scalar>
struct GaussianPosterior {
  Vector<Scalar> mu;
  Vector<Scalar> sigma;
};

template <typename Scalar>
struct LikelihoodParams {
  LikelihoodFamily family = LikelihoodFamily::bernoulli;
  Vector<Scalar> probs;  // bernoulli
  Vector<Scalar> alpha;  // beta_binomial
  Vector<Scalar> beta;   // beta_binomial
};

inline constexpr double kBetaBinomialFloor = 1e-4;

namespace detail {

template <typename Scalar>
Scalar softplus(Scalar x) {
  return x > Scalar(20) ? x : std::log1p(std::exp(x));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + std::exp(-x))
                        : std::exp(x) / (Scalar(1) + std::exp(x));
}

}  // namespace detail

/// Network input for an image: raw {0,1} pixels for Bernoulli models,
/// pixel / 255 for beta-binomial models.
template <typename Scalar>
Vector<Scalar> image_to_input(const BasicVaeModel<Scalar>& model,
                              std::span<const std::uint8_t> image) {
  if (static_cast<Eigen::Index>(image.size()) != model.input_dim)
    throw DomainError("image has " + std::to_string(image.size()) + " pixels, model expects " +
                      std::to_string(model.input_dim));
  const Scalar scale =
      model.family == LikelihoodFamily::beta_binomial ? Scalar(1) / Scalar(255) : Scalar(1);
  Vector<Scalar> x(model.input_dim);
  for (Eigen::Index i = 0; i < model.input_dim; ++i)
    x[i] = static_cast<Scalar>(image[static_cast<std::size_t>(i)]) * scale;
  return x;
}

/// Dense + ReLU, then linear mu and log-sigma heads; sigma = exp(log sigma).
template <typename Scalar>
GaussianPosterior<Scalar> recognize(const BasicVaeModel<Scalar>& model,
                                    std::span<const std::uint8_t> image) {
  const Vector<Scalar> h = model.encoder_hidden(image_to_input(model, image)).cwiseMax(Scalar(0));
  return {model.encoder_mu(h), model.encoder_log_sigma(h).array().exp().matrix()};
}

/// Dense + ReLU, then sigmoid(logits) or softplus(.) + 1e-4 for (alpha, beta).
template <typename Scalar, typename Derived>
LikelihoodParams<Scalar> generate(const BasicVaeModel<Scalar>& model,
                                  const Eigen::MatrixBase<Derived>& latent) {
  if (latent.size() != model.latent_dim) throw DomainError("latent dimension mismatch");
  const Vector<Scalar> h =
      model.decoder_hidden(latent.template cast<Scalar>()).cwiseMax(Scalar(0));
  LikelihoodParams<Scalar> out;
  out.family = model.family;
  if (model.family == LikelihoodFamily::bernoulli) {
    out.probs = model.decoder_heads[0](h).unaryExpr([](Scalar v) { return detail::sigmoid(v); });
  } else {
    const auto activate = [](Scalar v) {
      return detail::softplus(v) + static_cast<Scalar>(kBetaBinomialFloor);
    };
    out.alpha = model.decoder_heads[0](h).unaryExpr(activate);
    out.beta = model.decoder_heads[1](h).unaryExpr(activate);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weight file
//
//   bytes 0..7   magic "BBVAEW\0\1"
//   bytes 8..11  manifest length M, u32 little-endian
//   next M bytes JSON manifest: format, version, likelihood, input_dim,
//                hidden_dim, latent_dim, tensors[{name, shape, dtype, offset}]
//   remainder    tensor data, float32 little-endian, row-major; offsets are
//                relative to the first byte after the manifest.
//
// model_hash is the SHA-256 of the whole file.

inline constexpr std::array<char, 8> kWeightMagic{'B', 'B', 'V', 'A', 'E', 'W', '\0', '\1'};

/// Parses a weight file image. Throws CorruptManifest, ShapeMismatch or
/// UnknownLikelihoodFamily.
VaeModel parse_model(std::span<const std::uint8_t> bytes);
VaeModel load_model(const std::filesystem::path& path);
/// Writes weights as float32; the returned buffer hashes to the model_hash
/// that parse_model will report.
std::vector<std::uint8_t> serialize_model(const VaeModel& model);
void save_model(const VaeModel& model, const std::filesystem::path& path);

/// Shape-consistent model with every weight and bias zero.
VaeModel make_zero_model(LikelihoodFamily family, Eigen::Index input_dim,
                         Eigen::Index hidden_dim, Eigen::Index latent_dim);
/// Weights ~ N(0, (scale^2) / fan_in), biases ~ N(0, bias_scale^2), normals from
/// Box-Muller over Xorshift64Star(seed). Used for checked-in test fixtures.
VaeModel make_random_model(LikelihoodFamily family, Eigen::Index input_dim,
                           Eigen::Index hidden_dim, Eigen::Index latent_dim,
                           std::uint64_t seed, double scale = 1.0, double bias_scale = 0.1);

/// Round-trips a model through serialize/parse so that its weights are
/// float32-exact and model_hash is set.
VaeModel finalize_model(const VaeModel& model);

// ---------------------------------------------------------------------------
// Rate estimation

struct ElboReport {
  std::vector<double> per_image_bpd;
  double mean_bpd = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo estimate of the discretized negative ELBO in bits per pixel:
/// average over i ~ Q(.|s) of log2 Q(i|s) - log2 P(i) - log2 p(s|y_i), all
/// evaluated with the quantized distributions the codec uses.
ElboReport estimate_neg_elbo(const VaeModel& model, std::span<const Image> images,
                             const DiscretizationGrid& grid, std::size_t n_samples,
                             std::uint64_t seed, unsigned precision = kDefaultAnsPrecision);

}  // namespace bbans
