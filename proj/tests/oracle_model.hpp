#pragma once

// Fully enumerable latent model: y and s both take 4 values. Reference rates
// come from tests/oracle/enumerate_oracle.py.

#include <array>
#include <vector>

#include "bbans/ans.hpp"

namespace oracle {

inline constexpr double kEntropy = 1.9825419728259752;
inline constexpr double kMixedNegElbo = 2.0491046374576574;
inline constexpr double kPerturbedNegElbo = 2.2062655589385457;
// Rate of a chain whose popped bits lock onto y = 0 (see the oracle script).
inline constexpr double kPerturbedChainRate = 3.1564203358655535;

inline constexpr std::array<double, 4> kPrior{0.1, 0.2, 0.3, 0.4};
inline constexpr std::array<std::array<double, 4>, 4> kLikelihood{{
    {0.70, 0.10, 0.10, 0.10},
    {0.10, 0.60, 0.20, 0.10},
    {0.05, 0.15, 0.50, 0.30},
    {0.25, 0.25, 0.25, 0.25},
}};
inline constexpr std::array<std::array<double, 4>, 4> kPerturbedPosterior{{
    {0.4, 0.2, 0.2, 0.2},
    {0.1, 0.5, 0.3, 0.1},
    {0.1, 0.2, 0.5, 0.2},
    {0.1, 0.2, 0.3, 0.4},
}};

inline std::array<double, 4> marginal() {
  std::array<double, 4> ps{};
  for (int s = 0; s < 4; ++s)
    for (int y = 0; y < 4; ++y) ps[s] += kPrior[y] * kLikelihood[y][s];
  return ps;
}

enum class Posterior { exact, mixed, perturbed };

class Model {
 public:
  using data_type = std::size_t;
  using latent_type = std::size_t;

  explicit Model(Posterior kind, unsigned precision = bbans::kDefaultAnsPrecision) {
    using bbans::QuantizedDistribution;
    prior_.push_back(QuantizedDistribution::from_masses(kPrior, precision));
    const auto ps = marginal();
    for (int y = 0; y < 4; ++y)
      likelihood_.push_back(QuantizedDistribution::from_masses(kLikelihood[y], precision));
    for (int s = 0; s < 4; ++s) {
      std::array<double, 4> q{};
      for (int y = 0; y < 4; ++y) {
        const double exact = kPrior[y] * kLikelihood[y][s] / ps[s];
        switch (kind) {
          case Posterior::exact: q[y] = exact; break;
          case Posterior::mixed: q[y] = 0.5 * (exact + kPrior[y]); break;
          case Posterior::perturbed: q[y] = kPerturbedPosterior[s][y]; break;
        }
      }
      posterior_.push_back(QuantizedDistribution::from_masses(q, precision));
    }
  }

  bbans::QuantizedDistribution posterior(std::size_t s) const { return posterior_.at(s); }
  bbans::QuantizedDistribution likelihood(std::size_t y) const { return likelihood_.at(y); }
  bbans::QuantizedDistribution prior() const { return prior_.front(); }

 private:
  std::vector<bbans::QuantizedDistribution> prior_, likelihood_, posterior_;
};

}  // namespace oracle
