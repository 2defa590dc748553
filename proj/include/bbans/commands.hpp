#pragma once

// Library side of the `bbans` command-line tool, so the pipeline can be
// driven from tests without spawning processes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "bbans/baseline.hpp"
#include "bbans/container.hpp"
#include "bbans/dataset.hpp"
#include "bbans/vae.hpp"

namespace bbans {

struct CompressOptions {
  std::filesystem::path model_path;
  DatasetSpec data;
  std::filesystem::path out_path;
  unsigned latent_precision = kDefaultLatentPrecision;
  unsigned ans_precision = kDefaultAnsPrecision;
  std::uint64_t seed = 0;
  std::size_t n_init_words = kDefaultInitWords;
  /// Text file of `index<TAB>cumulative_net_bpd` lines, one per image.
  std::optional<std::filesystem::path> rate_log_path;
};

struct CompressSummary {
  std::size_t images = 0;
  std::size_t payload_bits = 0;
  std::size_t init_bits = 0;
  double net_bpd = 0.0;
  double gross_bpd = 0.0;
  std::size_t container_bytes = 0;
};

CompressSummary cmd_compress(const CompressOptions& options);

struct DecompressSummary {
  std::size_t images = 0;
  std::size_t bytes_written = 0;
};

/// Writes the decoded images as raw bytes, input_dim bytes per image, in
/// dataset order.
DecompressSummary cmd_decompress(const std::filesystem::path& container_path,
                                 const std::filesystem::path& model_path,
                                 const std::filesystem::path& out_path);

struct VerifyResult {
  bool ok = false;
  std::size_t images = 0;
  std::optional<std::size_t> mismatch_image;
  std::optional<std::size_t> mismatch_pixel;
  std::string message;
};

/// Re-ingests `original`, decodes the container and compares byte by byte.
/// Decoding failures are reported as a failed verification.
VerifyResult cmd_verify(const DatasetSpec& original,
                        const std::filesystem::path& container_path,
                        const std::filesystem::path& model_path);

BaselineRates cmd_baseline(const DatasetSpec& data);

ElboReport cmd_elbo(const std::filesystem::path& model_path, const DatasetSpec& data,
                    unsigned latent_precision, unsigned ans_precision, std::size_t n_samples,
                    std::uint64_t seed);

}  // namespace bbans
