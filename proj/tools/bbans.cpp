// bbans: compress MNIST-style image sets with bits-back ANS.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bbans/commands.hpp"
#include "bbans/errors.hpp"

namespace {

struct DatasetFlags {
  std::string data;
  std::size_t count = 0;
  std::string binarize = "none";
  std::size_t repeat = 1;
  std::optional<std::uint64_t> shuffle_seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", data, "IDX3 ubyte image file (relative paths also tried under $BBANS_DATA_DIR)")
        ->required();
    cmd->add_option("--count", count, "Use only the first N images (0 = all)");
    cmd->add_option("--binarize", binarize, "none | stoch:SEED | thresh:T")->capture_default_str();
    cmd->add_option("--repeat", repeat, "Concatenate this many copies of the dataset");
    cmd->add_option("--shuffle-seed", shuffle_seed, "Shuffle each copy with this seed");
  }

  bbans::DatasetSpec spec() const {
    bbans::DatasetSpec s;
    s.images_path = data;
    s.count = count;
    s.binarize = bbans::Binarization::parse(binarize);
    s.repeat = repeat;
    s.shuffle_seed = shuffle_seed;
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossless image-set compression with bits-back ANS and a VAE"};
  app.require_subcommand(1);

  // compress
  auto* compress = app.add_subcommand("compress", "Encode a dataset into a container");
  DatasetFlags compress_data;
  compress_data.attach(compress);
  bbans::CompressOptions copt;
  std::string compress_model, compress_out, rate_log;
  compress->add_option("--model", compress_model, "VAE weight file")->required();
  compress->add_option("--out", compress_out, "Output container")->required();
  compress->add_option("--latent-precision", copt.latent_precision, "Bits per latent dimension")
      ->capture_default_str();
  compress->add_option("--ans-precision", copt.ans_precision, "ANS frequency precision in bits")
      ->capture_default_str();
  compress->add_option("--seed", copt.seed, "Seed of the initial clean bits")->capture_default_str();
  compress->add_option("--init-words", copt.n_init_words, "32-bit words of initial clean bits")
      ->capture_default_str();
  compress->add_option("--rate-log", rate_log, "Write index<TAB>cumulative_bpd per image");

  // decompress
  auto* decompress = app.add_subcommand("decompress", "Decode a container to raw image bytes");
  std::string dec_container, dec_model, dec_out;
  decompress->add_option("container", dec_container, "Container file")->required();
  decompress->add_option("--model", dec_model, "VAE weight file")->required();
  decompress->add_option("--out", dec_out, "Raw output file")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "Check a container against the original dataset");
  DatasetFlags verify_data;
  verify_data.attach(verify);
  std::string ver_container, ver_model;
  verify->add_option("container", ver_container, "Container file")->required();
  verify->add_option("--model", ver_model, "VAE weight file")->required();

  // baseline
  auto* baseline = app.add_subcommand("baseline", "gzip and bz2 rates on the same dataset");
  DatasetFlags baseline_data;
  baseline_data.attach(baseline);

  // elbo
  auto* elbo = app.add_subcommand("elbo", "Monte Carlo negative ELBO in bits per pixel");
  DatasetFlags elbo_data;
  elbo_data.attach(elbo);
  std::string elbo_model;
  unsigned elbo_p = bbans::kDefaultLatentPrecision, elbo_r = bbans::kDefaultAnsPrecision;
  std::size_t elbo_samples = 1;
  std::uint64_t elbo_seed = 0;
  elbo->add_option("--model", elbo_model, "VAE weight file")->required();
  elbo->add_option("--latent-precision", elbo_p)->capture_default_str();
  elbo->add_option("--ans-precision", elbo_r)->capture_default_str();
  elbo->add_option("--samples", elbo_samples, "Posterior samples per image")->capture_default_str();
  elbo->add_option("--seed", elbo_seed)->capture_default_str();

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Write a random-weight VAE for testing");
  std::string fx_arch = "binarized", fx_out;
  std::uint64_t fx_seed = 0;
  double fx_scale = 1.0, fx_bias = 0.1;
  fixture->add_option("--arch", fx_arch, "binarized (784-100-40, Bernoulli) or full (784-200-50, beta-binomial)")
      ->check(CLI::IsMember({"binarized", "full"}))
      ->capture_default_str();
  fixture->add_option("--seed", fx_seed)->capture_default_str();
  fixture->add_option("--scale", fx_scale, "Weight std * sqrt(fan_in)")->capture_default_str();
  fixture->add_option("--bias-scale", fx_bias, "Bias std")->capture_default_str();
  fixture->add_option("--out", fx_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compress) {
      copt.model_path = compress_model;
      copt.out_path = compress_out;
      copt.data = compress_data.spec();
      if (!rate_log.empty()) copt.rate_log_path = rate_log;
      const auto s = bbans::cmd_compress(copt);
      std::printf("images        %zu\n", s.images);
      std::printf("payload bits  %zu (initial %zu)\n", s.payload_bits, s.init_bits);
      std::printf("net rate      %.6f bits/dim\n", s.net_bpd);
      std::printf("gross rate    %.6f bits/dim\n", s.gross_bpd);
      std::printf("container     %zu bytes -> %s\n", s.container_bytes, compress_out.c_str());
    } else if (*decompress) {
      const auto s = bbans::cmd_decompress(dec_container, dec_model, dec_out);
      std::printf("decoded %zu images, %zu bytes -> %s\n", s.images, s.bytes_written, dec_out.c_str());
    } else if (*verify) {
      const auto r = bbans::cmd_verify(verify_data.spec(), ver_container, ver_model);
      std::printf("%s: %s\n", r.ok ? "PASS" : "FAIL", r.message.c_str());
      return r.ok ? 0 : 1;
    } else if (*baseline) {
      const auto r = bbans::cmd_baseline(baseline_data.spec());
      std::printf("pixels %zu, raw %zu bytes\n", r.pixels, r.raw_bytes);
      std::printf("bz2   %.4f bits/dim (%zu bytes)\n", r.bz2_bpd, r.bz2_bytes);
      std::printf("gzip  %.4f bits/dim (%zu bytes)\n", r.gzip_bpd, r.gzip_bytes);
    } else if (*elbo) {
      const auto r = bbans::cmd_elbo(elbo_model, elbo_data.spec(), elbo_p, elbo_r, elbo_samples, elbo_seed);
      std::printf("images %zu, samples %zu, seed %llu\n", r.per_image_bpd.size(), r.n_samples,
                  static_cast<unsigned long long>(r.seed));
      std::printf("negative ELBO %.6f bits/dim\n", r.mean_bpd);
    } else if (*fixture) {
      const bool full = fx_arch == "full";
      const auto model = bbans::make_random_model(
          full ? bbans::LikelihoodFamily::beta_binomial : bbans::LikelihoodFamily::bernoulli, 784,
          full ? 200 : 100, full ? 50 : 40, fx_seed, fx_scale, fx_bias);
      bbans::save_model(model, fx_out);
      std::printf("wrote %s (sha256 %s)\n", fx_out.c_str(), bbans::to_hex(model.model_hash).c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
