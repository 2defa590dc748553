#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "bbans/ans.hpp"
#include "bbans/codecs.hpp"
#include "bbans/dataset.hpp"
#include "bbans/discretization.hpp"
#include "bbans/vae.hpp"

namespace bbans {

// Compressed container, all integers little-endian:
//
//   offset  size  field
//        0     8  magic "BBANS\0\0\1"
//        8     4  header version (1)
//       12    32  model_hash (SHA-256 of the weight file)
//       44     8  image_count
//       52     4  input_dim
//       56     4  latent_precision p
//       60     4  ans_precision r
//       64     8  seed of the initial clean bits
//       72     4  n_init_words
//       76     1  likelihood family (0 bernoulli, 1 beta_binomial)
//       77     1  binarize mode (0 none, 1 stochastic, 2 threshold)
//       78     2  reserved, zero
//       80     8  binarize parameter (seed or threshold)
//       88     8  payload word count W
//       96   4*W  payload: flattened ANS message
//
// Images are appended in dataset order, pixels row-major, latent dimensions
// ascending; decoding pops them in reverse and restores dataset order.

inline constexpr std::array<std::uint8_t, 8> kContainerMagic{'B', 'B', 'A', 'N', 'S', 0, 0, 1};
inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 96;
inline constexpr std::size_t kDefaultInitWords = 64;

struct ContainerHeader {
  ModelHash model_hash{};
  std::uint64_t image_count = 0;
  std::uint32_t input_dim = 0;
  std::uint32_t latent_precision = kDefaultLatentPrecision;
  std::uint32_t ans_precision = kDefaultAnsPrecision;
  std::uint64_t seed = 0;
  std::uint32_t n_init_words = kDefaultInitWords;
  LikelihoodFamily family = LikelihoodFamily::bernoulli;
  Binarization binarization;

  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

struct CompressedContainer {
  ContainerHeader header;
  std::vector<std::uint32_t> payload;

  std::size_t payload_bits() const noexcept { return 32 * payload.size(); }
  std::size_t init_bits() const noexcept { return 64 + 32 * std::size_t{header.n_init_words}; }
  /// Payload bits net of the initial clean bits, per coded pixel.
  double net_bits_per_dim() const;
  /// Payload bits including the initial clean bits, per coded pixel.
  double gross_bits_per_dim() const;

  friend bool operator==(const CompressedContainer&, const CompressedContainer&) = default;
};

std::vector<std::uint8_t> serialize_container(const CompressedContainer& container);
/// Throws MalformedPayload on bad magic, version, enum values or length.
CompressedContainer parse_container(std::span<const std::uint8_t> bytes);
void write_container(const CompressedContainer& container, const std::filesystem::path& path);
CompressedContainer read_container(const std::filesystem::path& path);

struct EncodeOptions {
  std::uint64_t seed = 0;
  std::size_t n_init_words = kDefaultInitWords;
  unsigned ans_precision = kDefaultAnsPrecision;
  /// Recorded in the header; images must already be binarized accordingly.
  Binarization binarization;
  /// Called after each image with its dataset index and the message state.
  std::function<void(std::size_t, const AnsState&)> on_image;
};

CompressedContainer encode_dataset(const VaeModel& model, const DiscretizationGrid& grid,
                                   std::span<const Image> images, const EncodeOptions& options);

/// Throws HashMismatch before touching the payload if the container was made
/// with another model; MalformedPayload if the chain does not unwind to the
/// recorded initial bits.
std::vector<Image> decode_dataset(const CompressedContainer& container, const VaeModel& model);

}  // namespace bbans
