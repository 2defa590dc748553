#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bbans/bits_back.hpp"
#include "bbans/container.hpp"
#include "bbans/errors.hpp"

using namespace bbans;

namespace {

const std::filesystem::path kData = BBANS_TEST_DATA_DIR;

std::vector<Image> random_binary_images(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Image> out(n, Image(784));
  for (auto& img : out)
    for (auto& px : img) px = static_cast<std::uint8_t>((rng() & 3) == 0);
  return out;
}

}  // namespace

TEST_CASE("container header layout") {
  CompressedContainer c;
  c.header.model_hash.fill(0xAB);
  c.header.image_count = 3;
  c.header.input_dim = 784;
  c.header.latent_precision = 12;
  c.header.ans_precision = 28;
  c.header.seed = 0x0102030405060708ULL;
  c.header.n_init_words = 9;
  c.header.family = LikelihoodFamily::beta_binomial;
  c.header.binarization = Binarization{BinarizeMode::stochastic, 42};
  c.payload = {0x80000000u, 1u, 2u, 3u};
  const auto bytes = serialize_container(c);
  REQUIRE(bytes.size() == kContainerHeaderBytes + 16);
  CHECK(std::equal(kContainerMagic.begin(), kContainerMagic.end(), bytes.begin()));
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 0xAB);
  CHECK(bytes[44] == 3);
  CHECK(bytes[52] == 0x10);  // 784 = 0x310
  CHECK(bytes[53] == 0x03);
  CHECK(bytes[56] == 12);
  CHECK(bytes[60] == 28);
  CHECK(bytes[64] == 0x08);
  CHECK(bytes[71] == 0x01);
  CHECK(bytes[72] == 9);
  CHECK(bytes[76] == 1);
  CHECK(bytes[77] == 1);
  CHECK(bytes[80] == 42);
  CHECK(bytes[88] == 4);
  CHECK(bytes[99] == 0x80);
  CHECK(parse_container(bytes) == c);
  CHECK(c.init_bits() == 64 + 32 * 9);

  SUBCASE("malformed") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(parse_container(bad), MalformedPayload);
    bad = bytes;
    bad[8] = 2;
    CHECK_THROWS_AS(parse_container(bad), MalformedPayload);
    bad = bytes;
    bad[76] = 7;
    CHECK_THROWS_AS(parse_container(bad), MalformedPayload);
    bad = bytes;
    bad[78] = 1;
    CHECK_THROWS_AS(parse_container(bad), MalformedPayload);
    bad.assign(bytes.begin(), bytes.end() - 4);
    CHECK_THROWS_AS(parse_container(bad), MalformedPayload);
    bad.assign(bytes.begin(), bytes.begin() + 50);
    CHECK_THROWS_AS(parse_container(bad), MalformedPayload);
  }
}

TEST_CASE("encode / decode round trip") {
  const VaeModel model = load_model(kData / "fixture_binarized.bbw");
  const DiscretizationGrid grid(16);
  const auto images = random_binary_images(40, 1);
  EncodeOptions opts;
  opts.seed = 99;
  std::size_t callbacks = 0;
  opts.on_image = [&](std::size_t i, const AnsState&) { CHECK(i == callbacks++); };
  const auto c = encode_dataset(model, grid, images, opts);
  CHECK(callbacks == 40);
  CHECK(c.header.image_count == 40);
  CHECK(c.header.model_hash == model.model_hash);
  CHECK(c.header.latent_precision == 16);
  CHECK(c.header.seed == 99);
  CHECK(c.net_bits_per_dim() ==
        doctest::Approx((c.payload_bits() - c.init_bits()) / (40.0 * 784)));
  CHECK(c.gross_bits_per_dim() == doctest::Approx(c.payload_bits() / (40.0 * 784)));
  CHECK(decode_dataset(c, model) == images);

  const auto path = std::filesystem::temp_directory_path() / "bbans_test.bbans";
  write_container(c, path);
  CHECK(read_container(path) == c);
  std::filesystem::remove(path);

  opts.on_image = nullptr;
  CHECK(encode_dataset(model, grid, images, opts) == c);
}

TEST_CASE("decode guards") {
  const VaeModel model = load_model(kData / "fixture_binarized.bbw");
  const VaeModel other = load_model(kData / "fixture_full.bbw");
  const DiscretizationGrid grid(16);
  const auto images = random_binary_images(5, 2);
  const auto c = encode_dataset(model, grid, images, {});
  CHECK_THROWS_AS(decode_dataset(c, other), HashMismatch);

  // A corrupted payload either decodes to different images or fails to unwind.
  auto bad = c;
  bad.payload[bad.payload.size() / 2] ^= 0x00100000u;
  bool detected = false;
  try {
    detected = decode_dataset(bad, model) != images;
  } catch (const Error&) {
    detected = true;
  }
  CHECK(detected);

  auto wrong_seed = c;
  wrong_seed.header.seed ^= 1;
  CHECK_THROWS_AS(decode_dataset(wrong_seed, model), MalformedPayload);
}

TEST_CASE("a single image costs about its log joint on top of the clean bits") {
  const VaeModel model = load_model(kData / "fixture_binarized.bbw");
  const DiscretizationGrid grid(16);
  const auto images = random_binary_images(1, 3);
  EncodeOptions opts;
  opts.seed = 5;
  const auto c = encode_dataset(model, grid, images, opts);

  // Replay the posterior pop to find the latent the encoder drew.
  const VaeCodingModel coder(model, grid);
  AnsState s = ans_init(opts.seed, opts.n_init_words);
  const auto posterior = coder.posterior(images[0]);
  const LatentIndices y = posterior.pop(s);
  const double log_q = posterior.log2_probability(y);
  const double log_joint = coder.likelihood(y).log2_probability(images[0]) +
                           coder.prior().log2_probability(y);
  // Gross payload = clean bits - (-log q) + (-log joint).
  CHECK(std::fabs(static_cast<double>(c.payload_bits()) -
                  (static_cast<double>(c.init_bits()) + log_q - log_joint)) <= 64.0);
  // Without the bits-back refund the image would cost -log joint, far above its ELBO.
  CHECK(-log_joint > -log_q + 100.0);
}
