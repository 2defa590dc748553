#include "bbans/commands.hpp"

#include <cstdio>
#include <fstream>

#include "bbans/errors.hpp"

namespace bbans {

CompressSummary cmd_compress(const CompressOptions& options) {
  const VaeModel model = load_model(options.model_path);
  const std::vector<Image> images = ingest(options.data);
  const DiscretizationGrid grid(options.latent_precision);

  std::ofstream rate_log;
  if (options.rate_log_path) {
    rate_log.open(*options.rate_log_path);
    if (!rate_log) throw Error("cannot open rate log " + options.rate_log_path->string());
  }

  EncodeOptions enc;
  enc.seed = options.seed;
  enc.n_init_words = options.n_init_words;
  enc.ans_precision = options.ans_precision;
  enc.binarization = options.data.binarize;
  const double init_bits = 64.0 + 32.0 * static_cast<double>(options.n_init_words);
  const double dim = static_cast<double>(model.input_dim);
  if (rate_log.is_open()) {
    enc.on_image = [&](std::size_t index, const AnsState& state) {
      const double net = static_cast<double>(state.total_length_bits()) - init_bits;
      char line[64];
      std::snprintf(line, sizeof line, "%zu\t%.9f\n", index, net / (static_cast<double>(index + 1) * dim));
      rate_log << line;
    };
  }

  const CompressedContainer container = encode_dataset(model, grid, images, enc);
  const auto bytes = serialize_container(container);
  {
    std::ofstream out(options.out_path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed to write " + options.out_path.string());
  }

  CompressSummary s;
  s.images = images.size();
  s.payload_bits = container.payload_bits();
  s.init_bits = container.init_bits();
  s.net_bpd = container.net_bits_per_dim();
  s.gross_bpd = container.gross_bits_per_dim();
  s.container_bytes = bytes.size();
  return s;
}

DecompressSummary cmd_decompress(const std::filesystem::path& container_path,
                                 const std::filesystem::path& model_path,
                                 const std::filesystem::path& out_path) {
  const CompressedContainer container = read_container(container_path);
  const VaeModel model = load_model(model_path);
  const std::vector<Image> images = decode_dataset(container, model);

  std::ofstream out(out_path, std::ios::binary);
  DecompressSummary s;
  for (const Image& image : images) {
    out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
    s.bytes_written += image.size();
  }
  if (!out) throw Error("failed to write " + out_path.string());
  s.images = images.size();
  return s;
}

VerifyResult cmd_verify(const DatasetSpec& original,
                        const std::filesystem::path& container_path,
                        const std::filesystem::path& model_path) {
  VerifyResult result;
  const std::vector<Image> expected = ingest(original);
  result.images = expected.size();
  std::vector<Image> decoded;
  try {
    decoded = decode_dataset(read_container(container_path), load_model(model_path));
  } catch (const Error& e) {
    result.message = std::string("decode failed: ") + e.what();
    return result;
  }
  if (decoded.size() != expected.size()) {
    result.message = "image count differs: container has " + std::to_string(decoded.size()) +
                     ", dataset has " + std::to_string(expected.size());
    return result;
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (decoded[i] == expected[i]) continue;
    std::size_t px = 0;
    while (px < expected[i].size() && px < decoded[i].size() && decoded[i][px] == expected[i][px]) ++px;
    result.mismatch_image = i;
    result.mismatch_pixel = px;
    result.message = "first mismatch at image " + std::to_string(i) + ", pixel " + std::to_string(px);
    return result;
  }
  result.ok = true;
  result.message = "all " + std::to_string(expected.size()) + " images match";
  return result;
}

BaselineRates cmd_baseline(const DatasetSpec& data) {
  const std::vector<Image> images = ingest(data);
  return baseline_rates(images, data.binarize.binary());
}

ElboReport cmd_elbo(const std::filesystem::path& model_path, const DatasetSpec& data,
                    unsigned latent_precision, unsigned ans_precision, std::size_t n_samples,
                    std::uint64_t seed) {
  const VaeModel model = load_model(model_path);
  const std::vector<Image> images = ingest(data);
  const DiscretizationGrid grid(latent_precision);
  return estimate_neg_elbo(model, images, grid, n_samples, seed, ans_precision);
}

}  // namespace bbans
