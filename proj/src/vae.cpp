#include "bbans/vae.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>

#include <openssl/evp.h>

#include <json.hpp>

#include "bbans/random.hpp"

namespace bbans {
namespace {

using json = nlohmann::json;
using Layer = DenseLayer<double>;

constexpr std::size_t kPreambleBytes = 12;

std::uint32_t read_u32le(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

void append_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

float read_f32le(const std::uint8_t* p) {
  const std::uint32_t bits = read_u32le(p);
  float v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

// Tensor names in file order, with their expected (rows, cols) given the
// architecture; cols == 0 marks a bias vector.
struct TensorSlot {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  Layer VaeModel::*layer;  // null for decoder heads
  int head;                // decoder head index, or -1
  bool is_bias;
};

std::vector<TensorSlot> tensor_slots(LikelihoodFamily family, Eigen::Index input,
                                     Eigen::Index hidden, Eigen::Index latent) {
  std::vector<TensorSlot> slots{
      {"encoder.hidden.weight", hidden, input, &VaeModel::encoder_hidden, -1, false},
      {"encoder.hidden.bias", hidden, 0, &VaeModel::encoder_hidden, -1, true},
      {"encoder.mu.weight", latent, hidden, &VaeModel::encoder_mu, -1, false},
      {"encoder.mu.bias", latent, 0, &VaeModel::encoder_mu, -1, true},
      {"encoder.log_sigma.weight", latent, hidden, &VaeModel::encoder_log_sigma, -1, false},
      {"encoder.log_sigma.bias", latent, 0, &VaeModel::encoder_log_sigma, -1, true},
      {"decoder.hidden.weight", hidden, latent, &VaeModel::decoder_hidden, -1, false},
      {"decoder.hidden.bias", hidden, 0, &VaeModel::decoder_hidden, -1, true},
  };
  const std::vector<std::string> heads = family == LikelihoodFamily::bernoulli
                                             ? std::vector<std::string>{"logits"}
                                             : std::vector<std::string>{"alpha", "beta"};
  for (int h = 0; h < static_cast<int>(heads.size()); ++h) {
    slots.push_back({"decoder." + heads[h] + ".weight", input, hidden, nullptr, h, false});
    slots.push_back({"decoder." + heads[h] + ".bias", input, 0, nullptr, h, true});
  }
  return slots;
}

Layer& slot_layer(VaeModel& model, const TensorSlot& slot) {
  return slot.layer ? model.*slot.layer : model.decoder_heads[static_cast<std::size_t>(slot.head)];
}

const Layer& slot_layer(const VaeModel& model, const TensorSlot& slot) {
  return slot.layer ? model.*slot.layer : model.decoder_heads[static_cast<std::size_t>(slot.head)];
}

std::size_t head_count(LikelihoodFamily family) {
  return family == LikelihoodFamily::bernoulli ? 1 : 2;
}

Eigen::Index positive_dim(const json& manifest, const char* key) {
  if (!manifest.contains(key) || !manifest[key].is_number_integer())
    throw CorruptManifest(std::string("manifest missing integer field ") + key);
  const auto v = manifest[key].get<std::int64_t>();
  if (v <= 0) throw ShapeMismatch(std::string(key) + " must be positive");
  return static_cast<Eigen::Index>(v);
}

}  // namespace

std::string_view to_string(LikelihoodFamily family) {
  return family == LikelihoodFamily::bernoulli ? "bernoulli" : "beta_binomial";
}

LikelihoodFamily parse_likelihood_family(std::string_view name) {
  if (name == "bernoulli") return LikelihoodFamily::bernoulli;
  if (name == "beta_binomial") return LikelihoodFamily::beta_binomial;
  throw UnknownLikelihoodFamily("unknown likelihood family '" + std::string(name) + "'");
}

ModelHash sha256(std::span<const std::uint8_t> bytes) {
  ModelHash out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size())
    throw Error("SHA-256 digest failed");
  return out;
}

std::string to_hex(const ModelHash& hash) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (std::uint8_t b : hash) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

VaeModel parse_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPreambleBytes ||
      std::memcmp(bytes.data(), kWeightMagic.data(), kWeightMagic.size()) != 0)
    throw CorruptManifest("not a VAE weight file (bad magic or truncated)");
  const std::size_t manifest_len = read_u32le(bytes.data() + 8);
  if (bytes.size() - kPreambleBytes < manifest_len)
    throw CorruptManifest("manifest extends past end of file");
  const auto* manifest_begin = reinterpret_cast<const char*>(bytes.data() + kPreambleBytes);

  json manifest;
  try {
    manifest = json::parse(manifest_begin, manifest_begin + manifest_len);
  } catch (const json::exception& e) {
    throw CorruptManifest(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_object() || manifest.value("format", "") != "bbans-vae-weights")
    throw CorruptManifest("manifest format tag missing");
  if (manifest.value("version", 0) != 1) throw CorruptManifest("unsupported weight file version");
  if (!manifest.contains("likelihood") || !manifest["likelihood"].is_string())
    throw CorruptManifest("manifest missing likelihood");

  VaeModel model;
  model.family = parse_likelihood_family(manifest["likelihood"].get<std::string>());
  model.input_dim = positive_dim(manifest, "input_dim");
  model.hidden_dim = positive_dim(manifest, "hidden_dim");
  model.latent_dim = positive_dim(manifest, "latent_dim");
  model.decoder_heads.resize(head_count(model.family));

  if (!manifest.contains("tensors") || !manifest["tensors"].is_array())
    throw CorruptManifest("manifest missing tensor list");
  std::map<std::string, json> entries;
  for (const auto& t : manifest["tensors"]) {
    if (!t.is_object() || !t.contains("name") || !t["name"].is_string())
      throw CorruptManifest("tensor entry without a name");
    entries[t["name"].get<std::string>()] = t;
  }

  const std::uint8_t* data = bytes.data() + kPreambleBytes + manifest_len;
  const std::size_t data_len = bytes.size() - kPreambleBytes - manifest_len;

  for (const TensorSlot& slot : tensor_slots(model.family, model.input_dim, model.hidden_dim,
                                             model.latent_dim)) {
    const auto it = entries.find(slot.name);
    if (it == entries.end()) throw CorruptManifest("missing tensor " + slot.name);
    const json& t = it->second;
    if (t.value("dtype", "") != "f32le") throw CorruptManifest(slot.name + ": dtype must be f32le");
    if (!t.contains("shape") || !t["shape"].is_array() || !t.contains("offset") ||
        !t["offset"].is_number_unsigned())
      throw CorruptManifest(slot.name + ": missing shape or offset");
    std::vector<std::int64_t> shape;
    for (const auto& d : t["shape"]) {
      if (!d.is_number_integer()) throw CorruptManifest(slot.name + ": non-integer shape");
      shape.push_back(d.get<std::int64_t>());
    }
    const std::vector<std::int64_t> expected =
        slot.is_bias ? std::vector<std::int64_t>{slot.rows}
                     : std::vector<std::int64_t>{slot.rows, slot.cols};
    if (shape != expected) throw ShapeMismatch(slot.name + ": shape disagrees with architecture");

    const std::size_t count =
        static_cast<std::size_t>(slot.rows) * static_cast<std::size_t>(slot.is_bias ? 1 : slot.cols);
    const std::uint64_t offset = t["offset"].get<std::uint64_t>();
    if (offset > data_len || data_len - offset < 4 * count)
      throw CorruptManifest(slot.name + ": tensor data truncated");

    const std::uint8_t* src = data + offset;
    Layer& layer = slot_layer(model, slot);
    if (slot.is_bias) {
      layer.bias.resize(slot.rows);
      for (std::size_t i = 0; i < count; ++i)
        layer.bias[static_cast<Eigen::Index>(i)] = read_f32le(src + 4 * i);
    } else {
      layer.weight.resize(slot.rows, slot.cols);
      double* dst = layer.weight.data();
      for (std::size_t i = 0; i < count; ++i) dst[i] = read_f32le(src + 4 * i);
    }
  }
  model.model_hash = sha256(bytes);
  return model;
}

VaeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptManifest("cannot open model file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return parse_model(bytes);
}

std::vector<std::uint8_t> serialize_model(const VaeModel& model) {
  const auto slots =
      tensor_slots(model.family, model.input_dim, model.hidden_dim, model.latent_dim);
  if (model.decoder_heads.size() != head_count(model.family))
    throw ShapeMismatch("decoder head count disagrees with likelihood family");

  json tensors = json::array();
  std::vector<std::uint8_t> data;
  for (const TensorSlot& slot : slots) {
    const Layer& layer = slot_layer(model, slot);
    const bool ok = slot.is_bias ? layer.bias.size() == slot.rows
                                 : layer.weight.rows() == slot.rows && layer.weight.cols() == slot.cols;
    if (!ok) throw ShapeMismatch(slot.name + ": shape disagrees with architecture");
    json entry{{"name", slot.name}, {"dtype", "f32le"}, {"offset", data.size()}};
    entry["shape"] = slot.is_bias ? json::array({slot.rows}) : json::array({slot.rows, slot.cols});
    tensors.push_back(entry);
    const double* src = slot.is_bias ? layer.bias.data() : layer.weight.data();
    const auto count = static_cast<std::size_t>(slot.is_bias ? layer.bias.size() : layer.weight.size());
    for (std::size_t i = 0; i < count; ++i) {
      const auto f = static_cast<float>(src[i]);
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      append_u32le(data, bits);
    }
  }
  const json manifest{{"format", "bbans-vae-weights"},
                      {"version", 1},
                      {"likelihood", std::string(to_string(model.family))},
                      {"input_dim", model.input_dim},
                      {"hidden_dim", model.hidden_dim},
                      {"latent_dim", model.latent_dim},
                      {"tensors", tensors}};
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out(kWeightMagic.begin(), kWeightMagic.end());
  append_u32le(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

void save_model(const VaeModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed to write model file " + path.string());
}

VaeModel finalize_model(const VaeModel& model) { return parse_model(serialize_model(model)); }

VaeModel make_zero_model(LikelihoodFamily family, Eigen::Index input_dim, Eigen::Index hidden_dim,
                         Eigen::Index latent_dim) {
  VaeModel model;
  model.family = family;
  model.input_dim = input_dim;
  model.hidden_dim = hidden_dim;
  model.latent_dim = latent_dim;
  model.decoder_heads.resize(head_count(family));
  for (const TensorSlot& slot : tensor_slots(family, input_dim, hidden_dim, latent_dim)) {
    Layer& layer = slot_layer(model, slot);
    if (slot.is_bias)
      layer.bias = Vector<double>::Zero(slot.rows);
    else
      layer.weight.setZero(slot.rows, slot.cols);
  }
  return finalize_model(model);
}

VaeModel make_random_model(LikelihoodFamily family, Eigen::Index input_dim,
                           Eigen::Index hidden_dim, Eigen::Index latent_dim, std::uint64_t seed,
                           double scale, double bias_scale) {
  VaeModel model = make_zero_model(family, input_dim, hidden_dim, latent_dim);
  Xorshift64Star rng(seed);
  auto normal = [&rng] {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u = 1.0 - rng.uniform();
    const double v = rng.uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  };
  for (const TensorSlot& slot : tensor_slots(family, input_dim, hidden_dim, latent_dim)) {
    Layer& layer = slot_layer(model, slot);
    if (slot.is_bias) {
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = bias_scale * normal();
    } else {
      const double std_dev = scale / std::sqrt(static_cast<double>(slot.cols));
      double* w = layer.weight.data();
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) w[i] = std_dev * normal();
    }
  }
  return finalize_model(model);
}

ElboReport estimate_neg_elbo(const VaeModel& model, std::span<const Image> images,
                             const DiscretizationGrid& grid, std::size_t n_samples,
                             std::uint64_t seed, unsigned precision) {
  if (n_samples < 1) throw std::invalid_argument("estimate_neg_elbo needs n_samples >= 1");
  ElboReport report;
  report.n_samples = n_samples;
  report.seed = seed;
  report.per_image_bpd.reserve(images.size());

  Xorshift64Star rng(seed);
  const std::uint64_t mask = (std::uint64_t{1} << precision) - 1;
  const double prior_log2 = -static_cast<double>(grid.precision()) * static_cast<double>(model.latent_dim);
  LatentIndices indices(static_cast<std::size_t>(model.latent_dim));

  for (const Image& image : images) {
    const auto posterior = recognize(model, image);
    const DiagonalGaussianPosteriorCodec q(posterior.mu, posterior.sigma, grid, precision);
    double total_bits = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      for (std::size_t d = 0; d < q.dims(); ++d) indices[d] = q.dimension(d).locate(rng() & mask);
      const auto params = generate(model, index_to_latent(grid, indices));
      const double log2_lik =
          model.family == LikelihoodFamily::bernoulli
              ? BernoulliImageCodec(params.probs, precision).log2_probability(image)
              : BetaBinomialImageCodec(params.alpha, params.beta, precision).log2_probability(image);
      total_bits += q.log2_probability(indices) - prior_log2 - log2_lik;
    }
    report.per_image_bpd.push_back(total_bits / static_cast<double>(n_samples) /
                                   static_cast<double>(model.input_dim));
  }
  double sum = 0.0;
  for (double v : report.per_image_bpd) sum += v;
  report.mean_bpd = report.per_image_bpd.empty() ? 0.0 : sum / static_cast<double>(report.per_image_bpd.size());
  return report;
}

}  // namespace bbans
