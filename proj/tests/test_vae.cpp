#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "bbans/vae.hpp"

using namespace bbans;
using nlohmann::json;

namespace {

const std::filesystem::path kData = BBANS_TEST_DATA_DIR;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  return json::parse(in);
}

Image json_image(const json& j) { return j.at("image").get<Image>(); }

// Rebuilds a weight file with an edited manifest; tensor offsets are relative
// to the data block so they stay valid.
std::vector<std::uint8_t> with_manifest(const std::vector<std::uint8_t>& bytes,
                                        const std::function<void(json&)>& edit) {
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + 8, 4);
  json manifest = json::parse(bytes.begin() + 12, bytes.begin() + 12 + n);
  edit(manifest);
  const std::string text = manifest.dump();
  std::vector<std::uint8_t> out(bytes.begin(), bytes.begin() + 8);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(len >> (8 * k)));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), bytes.begin() + 12 + n, bytes.end());
  return out;
}

}  // namespace

TEST_CASE("fixture models load with the expected architectures") {
  const VaeModel bin = load_model(kData / "fixture_binarized.bbw");
  CHECK(bin.family == LikelihoodFamily::bernoulli);
  CHECK(bin.input_dim == 784);
  CHECK(bin.hidden_dim == 100);
  CHECK(bin.latent_dim == 40);

  const VaeModel full = load_model(kData / "fixture_full.bbw");
  CHECK(full.family == LikelihoodFamily::beta_binomial);
  CHECK(full.hidden_dim == 200);
  CHECK(full.latent_dim == 50);
  CHECK(full.decoder_heads.size() == 2);
  CHECK(full.model_hash != bin.model_hash);
}

TEST_CASE("forward passes match the independent numpy reference") {
  for (const char* arch : {"binarized", "full"}) {
    CAPTURE(arch);
    const VaeModel model = load_model(kData / (std::string("fixture_") + arch + ".bbw"));
    const json golden = read_json(kData / (std::string("golden_") + arch + ".json"));
    const Image image = json_image(golden);
    const auto post = recognize(model, image);
    REQUIRE(post.mu.size() == model.latent_dim);
    REQUIRE(post.sigma.size() == model.latent_dim);
    const auto mu = golden.at("mu").get<std::vector<double>>();
    const auto sigma = golden.at("sigma").get<std::vector<double>>();
    for (Eigen::Index d = 0; d < model.latent_dim; ++d) {
      CHECK(post.mu[d] == doctest::Approx(mu[d]).epsilon(1e-5));
      CHECK(post.sigma[d] == doctest::Approx(sigma[d]).epsilon(1e-5));
      CHECK(post.sigma[d] > 0.0);
    }
    const auto lik = generate(model, post.mu);
    if (model.family == LikelihoodFamily::bernoulli) {
      const auto probs = golden.at("probs").get<std::vector<double>>();
      for (Eigen::Index i = 0; i < model.input_dim; ++i)
        CHECK(lik.probs[i] == doctest::Approx(probs[i]).epsilon(1e-5));
    } else {
      const auto alpha = golden.at("alpha").get<std::vector<double>>();
      const auto beta = golden.at("beta").get<std::vector<double>>();
      for (Eigen::Index i = 0; i < model.input_dim; ++i) {
        CHECK(lik.alpha[i] == doctest::Approx(alpha[i]).epsilon(1e-5));
        CHECK(lik.beta[i] == doctest::Approx(beta[i]).epsilon(1e-5));
        CHECK(lik.alpha[i] > 0.0);
        CHECK(lik.beta[i] > 0.0);
      }
    }
  }
}

TEST_CASE("forward passes are deterministic") {
  const VaeModel model = load_model(kData / "fixture_full.bbw");
  const Image image = json_image(read_json(kData / "golden_full.json"));
  const auto a = recognize(model, image);
  const auto b = recognize(model, image);
  CHECK(a.mu == b.mu);
  CHECK(a.sigma == b.sigma);
  CHECK(generate(model, a.mu).alpha == generate(model, b.mu).alpha);
}

TEST_CASE("zero-weight models") {
  VaeModel model = make_zero_model(LikelihoodFamily::bernoulli, 784, 100, 40);
  model.encoder_mu.bias.setLinSpaced(-1.0, 1.0);
  model.encoder_log_sigma.bias.setConstant(-0.5);
  model.decoder_heads[0].bias.setConstant(2.0);
  const Image image(784, 1);
  const auto post = recognize(model, image);
  CHECK(post.mu == model.encoder_mu.bias);
  for (Eigen::Index d = 0; d < 40; ++d) CHECK(post.sigma[d] == doctest::Approx(std::exp(-0.5)));
  const auto lik = generate(model, post.mu);
  for (Eigen::Index i = 0; i < 784; ++i)
    CHECK(lik.probs[i] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));

  const VaeModel bb = make_zero_model(LikelihoodFamily::beta_binomial, 784, 200, 50);
  const auto bb_lik = generate(bb, Eigen::VectorXd::Zero(50));
  CHECK(bb_lik.alpha[0] == doctest::Approx(std::log(2.0) + 1e-4));
  CHECK_THROWS_AS(generate(bb, Eigen::VectorXd::Zero(49)), DomainError);
  CHECK_THROWS_AS(recognize(bb, Image(100)), DomainError);
}

TEST_CASE("beta-binomial heads stay positive for extreme pre-activations") {
  VaeModel model = make_zero_model(LikelihoodFamily::beta_binomial, 4, 3, 2);
  model.decoder_heads[0].bias.setConstant(-800.0);
  model.decoder_heads[1].bias.setConstant(800.0);
  const auto lik = generate(model, Eigen::VectorXd::Zero(2));
  CHECK(lik.alpha[0] == doctest::Approx(1e-4));
  CHECK(lik.beta[0] == doctest::Approx(800.0 + 1e-4));
}

TEST_CASE("weight file round trip and hash") {
  const VaeModel model = make_random_model(LikelihoodFamily::beta_binomial, 20, 7, 3, 5);
  const auto bytes = serialize_model(model);
  const VaeModel back = parse_model(bytes);
  CHECK(back.model_hash == sha256(bytes));
  CHECK(back.encoder_hidden.weight == model.encoder_hidden.weight.cast<float>().cast<double>());
  CHECK(serialize_model(back) == bytes);
  CHECK(to_hex(back.model_hash).size() == 64);

  const auto path = std::filesystem::temp_directory_path() / "bbans_test_model.bbw";
  save_model(back, path);
  CHECK(load_model(path).model_hash == back.model_hash);
  std::filesystem::remove(path);

  const std::array<std::uint8_t, 3> abc{'a', 'b', 'c'};
  CHECK(to_hex(sha256(abc)) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("weight file errors") {
  const auto bytes = serialize_model(make_random_model(LikelihoodFamily::bernoulli, 20, 7, 3, 6));
  SUBCASE("truncated") {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 10);
    CHECK_THROWS_AS(parse_model(cut), CorruptManifest);
    const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 20);
    CHECK_THROWS_AS(parse_model(head), CorruptManifest);
    CHECK_THROWS_AS(parse_model(std::span<const std::uint8_t>{}), CorruptManifest);
  }
  SUBCASE("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(parse_model(bad), CorruptManifest);
  }
  SUBCASE("unknown likelihood") {
    const auto bad = with_manifest(bytes, [](json& m) { m["likelihood"] = "poisson"; });
    CHECK_THROWS_AS(parse_model(bad), UnknownLikelihoodFamily);
  }
  SUBCASE("shape disagreement") {
    const auto bad = with_manifest(bytes, [](json& m) { m["hidden_dim"] = 8; });
    CHECK_THROWS_AS(parse_model(bad), ShapeMismatch);
  }
  SUBCASE("missing tensor") {
    const auto bad = with_manifest(bytes, [](json& m) { m["tensors"].erase(0); });
    CHECK_THROWS_AS(parse_model(bad), CorruptManifest);
  }
  SUBCASE("wrong dtype") {
    const auto bad = with_manifest(bytes, [](json& m) { m["tensors"][0]["dtype"] = "f64le"; });
    CHECK_THROWS_AS(parse_model(bad), CorruptManifest);
  }
  SUBCASE("not JSON") {
    auto bad = bytes;
    bad[12] = '#';
    CHECK_THROWS_AS(parse_model(bad), CorruptManifest);
  }
  CHECK_THROWS_AS(load_model("/nonexistent/model.bbw"), CorruptManifest);
  CHECK_THROWS_AS(parse_likelihood_family("gaussian"), UnknownLikelihoodFamily);
}

TEST_CASE("negative ELBO of the prior-matching, uniform-likelihood model is one bit per pixel") {
  const VaeModel model = finalize_model(make_zero_model(LikelihoodFamily::bernoulli, 784, 100, 40));
  std::vector<Image> images(5, Image(784, 0));
  for (std::size_t i = 0; i < 784; i += 3) images[1][i] = 1;
  const DiscretizationGrid grid(16);
  const ElboReport coarse = estimate_neg_elbo(model, images, grid, 4, 1, 24);
  CHECK(coarse.mean_bpd == doctest::Approx(1.0).epsilon(1e-3));
  const ElboReport fine = estimate_neg_elbo(model, images, grid, 4, 1, 32);
  CHECK(fine.mean_bpd == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fine.per_image_bpd.size() == 5);
  CHECK(fine.n_samples == 4);
  double sum = 0.0;
  for (double v : fine.per_image_bpd) sum += v;
  CHECK(fine.mean_bpd == doctest::Approx(sum / 5));
  CHECK_THROWS_AS(estimate_neg_elbo(model, images, grid, 0, 1), std::invalid_argument);
}
