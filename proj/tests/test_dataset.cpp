#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "bbans/dataset.hpp"
#include "bbans/errors.hpp"
#include "bbans/vae.hpp"

using namespace bbans;

namespace {

const std::filesystem::path kMnist =
    std::filesystem::path(BBANS_SOURCE_DIR) / "data/mnist/t10k-images-idx3-ubyte";

std::filesystem::path write_file(const std::string& name, const std::vector<std::uint8_t>& bytes) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  return path;
}

std::vector<std::uint8_t> idx_header(std::uint32_t magic, std::uint32_t n, std::uint32_t rows,
                                     std::uint32_t cols) {
  std::vector<std::uint8_t> out;
  for (std::uint32_t v : {magic, n, rows, cols})
    for (int k = 3; k >= 0; --k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  return out;
}

}  // namespace

TEST_CASE("MNIST test file ingests to 10000 images of 784 bytes") {
  const auto images = read_idx_images(kMnist);
  REQUIRE(images.size() == 10000);
  for (const auto& img : images) REQUIRE(img.size() == kMnistPixels);
  std::vector<std::uint8_t> flat;
  for (const auto& img : images) flat.insert(flat.end(), img.begin(), img.end());
  CHECK(to_hex(sha256(flat)) == "6d87418db22cc8025d05968bec9bd5c3932904b23485740db143a061a2c9d161");
  CHECK(std::accumulate(images[0].begin(), images[0].end(), 0) == 18454);
}

TEST_CASE("binarization") {
  SUBCASE("parse and print") {
    CHECK(Binarization::parse("none") == Binarization{});
    CHECK(Binarization::parse("stoch:7") == Binarization{BinarizeMode::stochastic, 7});
    CHECK(Binarization::parse("thresh:128") == Binarization{BinarizeMode::threshold, 128});
    CHECK(Binarization::parse("stoch:7").to_string() == "stoch:7");
    CHECK(Binarization::parse("thresh:128").binary());
    CHECK_FALSE(Binarization::parse("none").binary());
    CHECK_THROWS_AS(Binarization::parse("stoch:"), std::invalid_argument);
    CHECK_THROWS_AS(Binarization::parse("thresh:999"), std::invalid_argument);
    CHECK_THROWS_AS(Binarization::parse("random"), std::invalid_argument);
  }
  SUBCASE("threshold of an all-zero image is all zero") {
    std::vector<Image> images{Image(784, 0)};
    binarize(images, Binarization{BinarizeMode::threshold, 128});
    CHECK(images[0] == Image(784, 0));
  }
  SUBCASE("threshold boundary") {
    std::vector<Image> images{Image{0, 127, 128, 255}};
    binarize(images, Binarization{BinarizeMode::threshold, 128});
    CHECK(images[0] == Image{0, 0, 1, 1});
  }
  SUBCASE("stochastic is deterministic per seed and tracks intensity") {
    auto a = read_idx_images(kMnist);
    a.resize(200);
    auto b = a, c = a;
    const auto original = a;
    binarize(a, Binarization{BinarizeMode::stochastic, 7});
    binarize(b, Binarization{BinarizeMode::stochastic, 7});
    binarize(c, Binarization{BinarizeMode::stochastic, 8});
    CHECK(a == b);
    CHECK(a != c);
    double ones = 0, intensity = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < 784; ++j) {
        REQUIRE(a[i][j] <= 1);
        if (original[i][j] == 0) REQUIRE(a[i][j] == 0);
        if (original[i][j] == 255) REQUIRE(a[i][j] == 1);
        ones += a[i][j];
        intensity += original[i][j] / 255.0;
      }
    CHECK(ones / intensity == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("ingest: count, repeat and shuffle") {
  DatasetSpec spec;
  spec.images_path = kMnist;
  spec.count = 50;
  const auto base = ingest(spec);
  REQUIRE(base.size() == 50);

  spec.repeat = 3;
  const auto repeated = ingest(spec);
  REQUIRE(repeated.size() == 150);
  CHECK(std::equal(base.begin(), base.end(), repeated.begin() + 100));

  spec.shuffle_seed = 11;
  const auto shuffled = ingest(spec);
  REQUIRE(shuffled.size() == 150);
  CHECK(shuffled == ingest(spec));
  CHECK(shuffled != repeated);
  for (int copy = 0; copy < 3; ++copy) {
    std::vector<Image> part(shuffled.begin() + 50 * copy, shuffled.begin() + 50 * (copy + 1));
    CHECK(std::is_permutation(part.begin(), part.end(), base.begin()));
  }

  spec.count = 20000;
  CHECK_THROWS_AS(ingest(spec), DimensionMismatch);
}

TEST_CASE("IDX errors") {
  auto bad_magic = idx_header(0x801, 1, 28, 28);
  bad_magic.resize(bad_magic.size() + 784);
  CHECK_THROWS_AS(read_idx_images(write_file("bbans_bad_magic.idx", bad_magic)), BadMagic);

  auto wrong_dims = idx_header(0x803, 1, 32, 32);
  wrong_dims.resize(wrong_dims.size() + 1024);
  CHECK_THROWS_AS(read_idx_images(write_file("bbans_dims.idx", wrong_dims)), DimensionMismatch);

  auto truncated = idx_header(0x803, 2, 28, 28);
  truncated.resize(truncated.size() + 784);
  CHECK_THROWS_AS(read_idx_images(write_file("bbans_trunc.idx", truncated)), DimensionMismatch);

  auto ok = idx_header(0x803, 1, 28, 28);
  ok.resize(ok.size() + 784, 9);
  const auto images = read_idx_images(write_file("bbans_ok.idx", ok));
  REQUIRE(images.size() == 1);
  CHECK(images[0] == Image(784, 9));
}

TEST_CASE("data directory lookup") {
  const auto dir = std::filesystem::path(BBANS_SOURCE_DIR) / "data/mnist";
  ::setenv("BBANS_DATA_DIR", dir.c_str(), 1);
  CHECK(std::filesystem::equivalent(resolve_data_path("t10k-images-idx3-ubyte"), kMnist));
  CHECK(resolve_data_path(kMnist) == kMnist);
  ::unsetenv("BBANS_DATA_DIR");
}
