#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbans/codecs.hpp"

namespace bbans {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::size_t kMnistSide = 28;
inline constexpr std::size_t kMnistPixels = kMnistSide * kMnistSide;

enum class BinarizeMode : std::uint8_t { none = 0, stochastic = 1, threshold = 2 };

struct Binarization {
  BinarizeMode mode = BinarizeMode::none;
  /// Seed for stochastic, threshold for threshold mode.
  std::uint64_t param = 0;

  /// "none", "stoch:SEED" or "thresh:T".
  static Binarization parse(std::string_view text);
  std::string to_string() const;
  bool binary() const noexcept { return mode != BinarizeMode::none; }

  friend bool operator==(const Binarization&, const Binarization&) = default;
};

/// stochastic: pixel = [u < v / 255] with u = Xorshift64Star(seed).uniform()
/// drawn per pixel in image-major, row-major order.
/// threshold: pixel = [v >= T].
void binarize(std::vector<Image>& images, const Binarization& how);

struct DatasetSpec {
  std::filesystem::path images_path;
  /// Leading images to keep; 0 keeps the whole file.
  std::size_t count = 0;
  Binarization binarize;
  /// When set, each of the `repeat` copies is Fisher-Yates shuffled with one
  /// Xorshift64Star(shuffle_seed) stream, copy 0 first.
  std::optional<std::uint64_t> shuffle_seed;
  std::size_t repeat = 1;
};

/// Reads an IDX3 ubyte image file. Throws BadMagic, DimensionMismatch (not
/// 28x28, or truncated).
std::vector<Image> read_idx_images(const std::filesystem::path& path);

/// Relative paths that do not exist are looked up under $BBANS_DATA_DIR.
std::filesystem::path resolve_data_path(const std::filesystem::path& path);

/// Read, truncate to count, binarize, then repeat/shuffle.
std::vector<Image> ingest(const DatasetSpec& spec);

}  // namespace bbans
