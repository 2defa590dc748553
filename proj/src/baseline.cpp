#include "bbans/baseline.hpp"

#include <limits>
#include <stdexcept>

#include <bzlib.h>
#include <zlib.h>

#include "bbans/errors.hpp"

namespace bbans {

std::vector<std::uint8_t> pack_dataset(std::span<const Image> images, bool binary) {
  std::vector<std::uint8_t> out;
  if (!binary) {
    for (const Image& image : images) out.insert(out.end(), image.begin(), image.end());
    return out;
  }
  std::uint8_t acc = 0;
  int filled = 0;
  for (const Image& image : images) {
    for (std::uint8_t px : image) {
      acc = static_cast<std::uint8_t>((acc << 1) | (px ? 1 : 0));
      if (++filled == 8) {
        out.push_back(acc);
        acc = 0;
        filled = 0;
      }
    }
  }
  if (filled) out.push_back(static_cast<std::uint8_t>(acc << (8 - filled)));
  return out;
}

std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes) {
  z_stream zs{};
  // windowBits 15 + 16 selects the gzip wrapper.
  if (deflateInit2(&zs, 9, Z_DEFLATED, 15 + 16, 9, Z_DEFAULT_STRATEGY) != Z_OK)
    throw Error("deflateInit2 failed");
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 32);
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const std::size_t produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error("gzip compression did not finish");
  out.resize(produced);
  return out;
}

std::vector<std::uint8_t> bzip2_compress(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > std::numeric_limits<unsigned>::max() / 2)
    throw std::length_error("input too large for single-call bzip2");
  auto capacity = static_cast<unsigned>(bytes.size() + bytes.size() / 100 + 600);
  std::vector<std::uint8_t> out(capacity);
  const int rc = BZ2_bzBuffToBuffCompress(reinterpret_cast<char*>(out.data()), &capacity,
                                          const_cast<char*>(reinterpret_cast<const char*>(bytes.data())),
                                          static_cast<unsigned>(bytes.size()), 9, 0, 0);
  if (rc != BZ_OK) throw Error("bzip2 compression failed with code " + std::to_string(rc));
  out.resize(capacity);
  return out;
}

BaselineRates baseline_rates(std::span<const Image> images, bool binary) {
  BaselineRates r;
  for (const Image& image : images) r.pixels += image.size();
  const auto raw = pack_dataset(images, binary);
  r.raw_bytes = raw.size();
  r.gzip_bytes = gzip_compress(raw).size();
  r.bz2_bytes = bzip2_compress(raw).size();
  if (r.pixels) {
    r.gzip_bpd = 8.0 * static_cast<double>(r.gzip_bytes) / static_cast<double>(r.pixels);
    r.bz2_bpd = 8.0 * static_cast<double>(r.bz2_bytes) / static_cast<double>(r.pixels);
  }
  return r;
}

}  // namespace bbans
