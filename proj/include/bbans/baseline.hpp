#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bbans/codecs.hpp"

namespace bbans {

/// Raw byte stream a generic compressor sees: 8 pixels per byte (MSB first,
/// row-major, images concatenated) for binary data, one byte per pixel
/// otherwise.
std::vector<std::uint8_t> pack_dataset(std::span<const Image> images, bool binary);

/// gzip container (RFC 1952) at level 9.
std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes);
/// bzip2 stream with 900k blocks.
std::vector<std::uint8_t> bzip2_compress(std::span<const std::uint8_t> bytes);

struct BaselineRates {
  std::size_t pixels = 0;
  std::size_t raw_bytes = 0;
  std::size_t gzip_bytes = 0;
  std::size_t bz2_bytes = 0;
  double gzip_bpd = 0.0;
  double bz2_bpd = 0.0;
};

BaselineRates baseline_rates(std::span<const Image> images, bool binary);

}  // namespace bbans
