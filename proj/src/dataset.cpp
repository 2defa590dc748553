#include "bbans/dataset.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <utility>

#include "bbans/errors.hpp"
#include "bbans/random.hpp"

namespace bbans {
namespace {

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
    throw std::invalid_argument("bad " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

std::uint32_t read_u32be(const std::uint8_t* p) {
  return std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[2]} << 8 |
         std::uint32_t{p[3]};
}

}  // namespace

Binarization Binarization::parse(std::string_view text) {
  if (text == "none") return {};
  if (text.starts_with("stoch:"))
    return {BinarizeMode::stochastic, parse_u64(text.substr(6), "binarization seed")};
  if (text.starts_with("thresh:")) {
    const std::uint64_t t = parse_u64(text.substr(7), "binarization threshold");
    if (t > 256) throw std::invalid_argument("threshold must be in [0, 256]");
    return {BinarizeMode::threshold, t};
  }
  throw std::invalid_argument("binarization must be none, stoch:SEED or thresh:T, got '" +
                              std::string(text) + "'");
}

std::string Binarization::to_string() const {
  switch (mode) {
    case BinarizeMode::stochastic: return "stoch:" + std::to_string(param);
    case BinarizeMode::threshold: return "thresh:" + std::to_string(param);
    case BinarizeMode::none: break;
  }
  return "none";
}

void binarize(std::vector<Image>& images, const Binarization& how) {
  if (how.mode == BinarizeMode::threshold) {
    for (Image& image : images)
      for (std::uint8_t& v : image) v = v >= how.param ? 1 : 0;
  } else if (how.mode == BinarizeMode::stochastic) {
    Xorshift64Star rng(how.param);
    for (Image& image : images)
      for (std::uint8_t& v : image) v = rng.uniform() < v / 255.0 ? 1 : 0;
  }
}

std::vector<Image> read_idx_images(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || read_u32be(bytes.data()) != kIdxImageMagic)
    throw BadMagic(path.string() + " is not an IDX3 ubyte image file");
  const std::size_t count = read_u32be(bytes.data() + 4);
  const std::size_t rows = read_u32be(bytes.data() + 8);
  const std::size_t cols = read_u32be(bytes.data() + 12);
  if (rows != kMnistSide || cols != kMnistSide)
    throw DimensionMismatch("expected 28x28 images, got " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  if (bytes.size() - 16 < count * kMnistPixels)
    throw DimensionMismatch(path.string() + " is truncated");

  std::vector<Image> images(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* begin = bytes.data() + 16 + i * kMnistPixels;
    images[i].assign(begin, begin + kMnistPixels);
  }
  return images;
}

std::filesystem::path resolve_data_path(const std::filesystem::path& path) {
  if (path.is_absolute() || std::filesystem::exists(path)) return path;
  if (const char* root = std::getenv("BBANS_DATA_DIR"); root && *root) {
    const auto candidate = std::filesystem::path(root) / path;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return path;
}

std::vector<Image> ingest(const DatasetSpec& spec) {
  std::vector<Image> images = read_idx_images(resolve_data_path(spec.images_path));
  if (spec.count != 0) {
    if (spec.count > images.size())
      throw DimensionMismatch("requested " + std::to_string(spec.count) + " images, file has " +
                              std::to_string(images.size()));
    images.resize(spec.count);
  }
  binarize(images, spec.binarize);
  if (spec.repeat <= 1 && !spec.shuffle_seed) return images;

  std::vector<Image> out;
  out.reserve(images.size() * std::max<std::size_t>(spec.repeat, 1));
  std::optional<Xorshift64Star> rng;
  if (spec.shuffle_seed) rng.emplace(*spec.shuffle_seed);
  for (std::size_t copy = 0; copy < std::max<std::size_t>(spec.repeat, 1); ++copy) {
    std::vector<Image> block = images;
    if (rng)
      for (std::size_t i = block.size(); i > 1; --i)
        std::swap(block[i - 1], block[rng->below(i)]);
    for (Image& image : block) out.push_back(std::move(image));
  }
  return out;
}

}  // namespace bbans
