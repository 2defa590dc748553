#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "bbans/bits_back.hpp"
#include "bbans/errors.hpp"
#include "oracle_model.hpp"

using namespace bbans;

namespace {

const std::filesystem::path kData = BBANS_TEST_DATA_DIR;

std::vector<std::size_t> draw_marginal(std::size_t n, std::uint64_t seed) {
  const auto ps = oracle::marginal();
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> draw(ps.begin(), ps.end());
  std::vector<std::size_t> out(n);
  for (auto& s : out) s = draw(rng);
  return out;
}

// Codec that records every operation into a shared log.
struct LoggingCodec {
  using symbol_type = std::size_t;
  std::string name;
  std::vector<std::string>* log;
  void push(AnsState& state, std::size_t v) const {
    log->push_back("push " + name);
    UniformCodec(2).push(state, static_cast<std::uint32_t>(v));
  }
  std::size_t pop(AnsState& state) const {
    log->push_back("pop " + name);
    return UniformCodec(2).pop(state);
  }
};

struct LoggingModel {
  using data_type = std::size_t;
  using latent_type = std::size_t;
  std::vector<std::string>* log;
  LoggingCodec posterior(std::size_t) const { return {"posterior", log}; }
  LoggingCodec likelihood(std::size_t) const { return {"likelihood", log}; }
  LoggingCodec prior() const { return {"prior", log}; }
};

static_assert(LatentVariableModel<LoggingModel>);
static_assert(LatentVariableModel<oracle::Model>);
static_assert(LatentVariableModel<VaeCodingModel>);

}  // namespace

TEST_CASE("append and pop run their steps in mirror order") {
  std::vector<std::string> log;
  const LoggingModel model{&log};
  AnsState s = ans_init(0, 4);
  bits_back_append(s, model, 3);
  CHECK(log == std::vector<std::string>{"pop posterior", "push likelihood", "push prior"});
  log.clear();
  CHECK(bits_back_pop(s, model) == 3);
  CHECK(log == std::vector<std::string>{"pop prior", "pop likelihood", "push posterior"});
}

TEST_CASE("oracle model: pop inverts append step by step") {
  const oracle::Model model(oracle::Posterior::perturbed);
  AnsState s = ans_init(1, 8);
  const AnsState initial = s;
  const auto data = draw_marginal(5000, 2);
  for (std::size_t v : data) {
    const AnsState before = s;
    bits_back_append(s, model, v);
    AnsState probe = s;
    REQUIRE(bits_back_pop(probe, model) == v);
    REQUIRE(probe == before);
  }
  for (std::size_t i = data.size(); i-- > 0;) REQUIRE(bits_back_pop(s, model) == data[i]);
  CHECK(s == initial);
}

TEST_CASE("oracle model: long-run rate") {
  struct Case { oracle::Posterior kind; double target; };
  const Case cases[] = {
      {oracle::Posterior::exact, oracle::kEntropy},
      {oracle::Posterior::mixed, oracle::kMixedNegElbo},
      // Aggregate posterior differs from the prior: the chain drifts away from
      // the negative ELBO and settles on the collapsed rate.
      {oracle::Posterior::perturbed, oracle::kPerturbedChainRate},
  };
  for (const auto& c : cases) {
    const oracle::Model model(c.kind);
    AnsState s = ans_init(3, 8);
    const double start = static_cast<double>(s.total_length_bits());
    const auto data = draw_marginal(20000, 4);
    for (std::size_t v : data) bits_back_append(s, model, v);
    const double rate = (static_cast<double>(s.total_length_bits()) - start) / data.size();
    CAPTURE(static_cast<int>(c.kind));
    CHECK(rate == doctest::Approx(c.target).epsilon(0.02));
  }
  CHECK(oracle::kMixedNegElbo > 1.02 * oracle::kEntropy);
}

TEST_CASE("VAE chain round trip on the binarized fixture") {
  const VaeModel model = load_model(kData / "fixture_binarized.bbw");
  const DiscretizationGrid grid(16);
  std::mt19937_64 rng(5);
  std::vector<Image> images(12, Image(784));
  for (auto& img : images)
    for (auto& px : img) px = static_cast<std::uint8_t>((rng() % 5) == 0);

  const AnsState initial = ans_init(7, 64);
  ChainSession session(model, grid, initial);
  for (const auto& img : images) session.append(img);
  CHECK(session.images_coded() == 12);
  REQUIRE(session.rate_log().size() == 12);
  for (std::size_t i = 1; i < 12; ++i) CHECK(session.rate_log()[i] > session.rate_log()[i - 1]);
  CHECK(session.init_bits() == initial.total_length_bits());
  CHECK(session.net_bits_per_dim() > 0.0);
  for (std::size_t i = images.size(); i-- > 0;) REQUIRE(session.pop() == images[i]);
  CHECK(session.state() == initial);
  CHECK_THROWS_AS(session.pop(), StateUnderflow);
}

TEST_CASE("VAE chain round trip on the full fixture") {
  const VaeModel model = load_model(kData / "fixture_full.bbw");
  const DiscretizationGrid grid(12);
  std::mt19937_64 rng(6);
  std::vector<Image> images(3, Image(784));
  for (auto& img : images)
    for (auto& px : img) px = static_cast<std::uint8_t>(rng());
  const AnsState initial = ans_init(8, 64);
  const VaeCodingModel coder(model, grid);
  AnsState s = initial;
  for (const auto& img : images) bits_back_append(s, coder, img);
  for (std::size_t i = images.size(); i-- > 0;) REQUIRE(bits_back_pop(s, coder) == images[i]);
  CHECK(s == initial);
}

TEST_CASE("chain errors") {
  const VaeModel model = finalize_model(make_zero_model(LikelihoodFamily::bernoulli, 784, 100, 40));
  const DiscretizationGrid grid(16);
  SUBCASE("pixel outside the Bernoulli domain") {
    Image img(784, 0);
    img[10] = 2;
    CHECK_THROWS_AS(check_image(model, img), DomainError);
    ChainSession session(model, grid, ans_init(0, 64));
    CHECK_THROWS_AS(session.append(img), DomainError);
    CHECK(session.images_coded() == 0);
  }
  SUBCASE("wrong image size") {
    CHECK_THROWS_AS(check_image(model, Image(783, 0)), DomainError);
  }
  SUBCASE("too few clean bits") {
    // A posterior equal to the prior needs 16 bits per latent dimension up front.
    ChainSession session(model, grid, ans_init(0, 2));
    CHECK_THROWS_AS(session.append(Image(784, 0)), StateUnderflow);
  }
  SUBCASE("precision too low for the grid") {
    CHECK_THROWS_AS(VaeCodingModel(model, grid, 20), std::invalid_argument);
  }
}
