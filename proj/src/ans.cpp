#include "bbans/ans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bbans/errors.hpp"
#include "bbans/random.hpp"

namespace bbans {
namespace {

void check_precision(unsigned precision) {
  if (precision == 0 || precision > kMaxAnsPrecision)
    throw std::invalid_argument("ANS precision must be in [1, 32], got " +
                                std::to_string(precision));
}

}  // namespace

AnsState::AnsState(std::uint64_t head, std::vector<std::uint32_t> tail,
                   unsigned precision)
    : head_(head), tail_(std::move(tail)), precision_(precision) {
  check_precision(precision);
}

void AnsState::encode(std::uint64_t start, std::uint64_t freq, unsigned precision) {
  // Head must land in [freq * 2^(32 - precision), freq * 2^(64 - precision))
  // before the update so the result stays in [2^32, 2^64).
  if ((head_ >> (64 - precision)) >= freq) {
    tail_.push_back(static_cast<std::uint32_t>(head_));
    head_ >>= 32;
  }
  head_ = ((head_ / freq) << precision) + (head_ % freq) + start;
}

void AnsState::decode(std::uint64_t start, std::uint64_t freq, unsigned precision) {
  const std::uint64_t cf = peek(precision);
  std::uint64_t next = freq * (head_ >> precision) + cf - start;
  if (next < kHeadLowerBound) {
    if (tail_.empty())
      throw StateUnderflow("ANS state exhausted: increase the initial word count");
    next = (next << 32) | tail_.back();
    tail_.pop_back();
  }
  head_ = next;
}

AnsState ans_init(std::uint64_t seed, std::size_t n_init_words, unsigned precision) {
  if (n_init_words < 2)
    throw std::invalid_argument("ans_init needs at least 2 initial words");
  Xorshift64Star rng(seed);
  const std::uint64_t head = rng() | (std::uint64_t{1} << 63);
  std::vector<std::uint32_t> tail(n_init_words);
  for (auto& w : tail) w = static_cast<std::uint32_t>(rng());
  return AnsState(head, std::move(tail), precision);
}

std::vector<std::uint32_t> ans_flatten(const AnsState& state) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + state.tail().size());
  words.push_back(static_cast<std::uint32_t>(state.head() >> 32));
  words.push_back(static_cast<std::uint32_t>(state.head()));
  const auto tail = state.tail();
  words.insert(words.end(), tail.rbegin(), tail.rend());
  return words;
}

AnsState ans_unflatten(std::span<const std::uint32_t> words, unsigned precision) {
  if (words.size() < 2)
    throw MalformedPayload("ANS payload shorter than its 2-word head");
  const std::uint64_t head = (std::uint64_t{words[0]} << 32) | words[1];
  if (head < AnsState::kHeadLowerBound)
    throw MalformedPayload("ANS head below renormalization interval");
  std::vector<std::uint32_t> tail(words.rbegin(), words.rend() - 2);
  return AnsState(head, std::move(tail), precision);
}

QuantizedDistribution::QuantizedDistribution(std::vector<std::uint64_t> freqs,
                                             unsigned precision)
    : freqs_(std::move(freqs)), cumfreqs_(freqs_.size() + 1, 0), precision_(precision) {
  std::partial_sum(freqs_.begin(), freqs_.end(), cumfreqs_.begin() + 1);
}

QuantizedDistribution QuantizedDistribution::from_frequencies(
    std::vector<std::uint64_t> freqs, unsigned precision) {
  check_precision(precision);
  if (freqs.empty()) throw InvalidDistribution("empty alphabet");
  const std::uint64_t total = std::accumulate(freqs.begin(), freqs.end(), std::uint64_t{0});
  if (total != (std::uint64_t{1} << precision))
    throw InvalidDistribution("frequencies sum to " + std::to_string(total) +
                              ", expected 2^" + std::to_string(precision));
  return QuantizedDistribution(std::move(freqs), precision);
}

QuantizedDistribution QuantizedDistribution::from_masses(std::span<const double> masses,
                                                         unsigned precision) {
  check_precision(precision);
  const std::size_t n = masses.size();
  const std::uint64_t total = std::uint64_t{1} << precision;
  if (n == 0 || n > total)
    throw InvalidDistribution("alphabet size " + std::to_string(n) +
                              " does not fit precision " + std::to_string(precision));
  double mass_sum = 0.0;
  for (double m : masses) {
    if (!std::isfinite(m) || m < 0.0) throw InvalidDistribution("mass not finite and >= 0");
    mass_sum += m;
  }
  if (!(mass_sum > 0.0)) throw InvalidDistribution("masses sum to zero");

  std::vector<std::uint64_t> freqs(n);
  std::vector<double> remainder(n);
  const double scale = static_cast<double>(total) / mass_sum;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scaled = std::min(masses[i] * scale, static_cast<double>(total));
    const double floored = std::floor(scaled);
    freqs[i] = static_cast<std::uint64_t>(floored);
    remainder[i] = scaled - floored;
    assigned += freqs[i];
  }

  auto argmax = [&freqs] {
    return static_cast<std::size_t>(std::max_element(freqs.begin(), freqs.end()) -
                                    freqs.begin());
  };
  if (assigned < total) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto by_remainder = [&](std::size_t a, std::size_t b) {
      return remainder[a] > remainder[b] || (remainder[a] == remainder[b] && a < b);
    };
    std::uint64_t deficit = total - assigned;
    if (deficit < n)
      std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(deficit),
                       order.end(), by_remainder);
    else
      std::sort(order.begin(), order.end(), by_remainder);
    for (std::size_t k = 0; deficit > 0; k = (k + 1) % n, --deficit) ++freqs[order[k]];
  } else {
    // Floating-point rounding can overshoot by a few units.
    for (std::uint64_t excess = assigned - total; excess > 0; --excess) --freqs[argmax()];
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (freqs[i] == 0) {
      --freqs[argmax()];
      freqs[i] = 1;
    }
  }

  // Unit exchanges until no single move lowers the cross-entropy. The objective
  // is separable and concave in each frequency, so the result is the optimum
  // and refining r can only help.
  auto gain = [&](std::size_t i) { return masses[i] * std::log1p(1.0 / freqs[i]); };
  auto loss = [&](std::size_t i) {
    return freqs[i] > 1 ? -masses[i] * std::log1p(-1.0 / freqs[i])
                        : std::numeric_limits<double>::infinity();
  };
  std::vector<double> gains(n), losses(n);
  for (std::size_t i = 0; i < n; ++i) {
    gains[i] = gain(i);
    losses[i] = loss(i);
  }
  for (;;) {
    const auto j = static_cast<std::size_t>(std::max_element(gains.begin(), gains.end()) -
                                            gains.begin());
    const auto k = static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) -
                                            losses.begin());
    if (j == k || !(gains[j] > losses[k] * (1.0 + 1e-12))) break;
    ++freqs[j];
    --freqs[k];
    for (std::size_t i : {j, k}) {
      gains[i] = gain(i);
      losses[i] = loss(i);
    }
  }
  return QuantizedDistribution(std::move(freqs), precision);
}

double QuantizedDistribution::probability(std::size_t symbol) const {
  return std::ldexp(static_cast<double>(frequency(symbol)), -static_cast<int>(precision_));
}

void QuantizedDistribution::push(AnsState& state, std::size_t symbol) const {
  if (symbol >= freqs_.size())
    throw IndexOutOfRange("symbol " + std::to_string(symbol) + " outside alphabet of " +
                          std::to_string(freqs_.size()));
  if (freqs_[symbol] == 0)
    throw ZeroFrequencySymbol("symbol " + std::to_string(symbol) + " has zero frequency");
  state.encode(cumfreqs_[symbol], freqs_[symbol], precision_);
}

std::size_t QuantizedDistribution::pop(AnsState& state) const {
  const std::uint64_t cf = state.peek(precision_);
  const auto it = std::upper_bound(cumfreqs_.begin() + 1, cumfreqs_.end(), cf);
  const auto symbol = static_cast<std::size_t>(it - (cumfreqs_.begin() + 1));
  state.decode(cumfreqs_[symbol], freqs_[symbol], precision_);
  return symbol;
}

}  // namespace bbans
