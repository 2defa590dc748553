#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bbans {

inline constexpr unsigned kDefaultAnsPrecision = 24;
inline constexpr unsigned kMaxAnsPrecision = 32;

/// Stack-like rANS message.
///
/// The head is kept in [2^32, 2^64) after every operation; whenever it would
/// leave that interval one 32-bit word moves between the head and the tail.
/// Symbols come off in the reverse order they went on.
class AnsState {
 public:
  static constexpr std::uint64_t kHeadLowerBound = std::uint64_t{1} << 32;

  AnsState() = default;
  AnsState(std::uint64_t head, std::vector<std::uint32_t> tail,
           unsigned precision = kDefaultAnsPrecision);

  std::uint64_t head() const noexcept { return head_; }
  std::span<const std::uint32_t> tail() const noexcept { return tail_; }
  /// Default frequency precision for codecs built against this message.
  unsigned precision() const noexcept { return precision_; }

  /// 64 bits of head plus 32 per stacked word.
  std::size_t total_length_bits() const noexcept { return 64 + 32 * tail_.size(); }

  /// Encodes the interval [start, start + freq) out of 2^precision.
  void encode(std::uint64_t start, std::uint64_t freq, unsigned precision);
  /// Low `precision` bits of the head: the cumulative frequency a decoder
  /// must locate before calling decode().
  std::uint64_t peek(unsigned precision) const noexcept {
    return head_ & ((std::uint64_t{1} << precision) - 1);
  }
  /// Removes the interval [start, start + freq) that contains peek().
  /// Throws StateUnderflow (leaving the state untouched) if a word is needed
  /// and the tail is empty.
  void decode(std::uint64_t start, std::uint64_t freq, unsigned precision);

  friend bool operator==(const AnsState&, const AnsState&) = default;

 private:
  std::uint64_t head_ = kHeadLowerBound;
  std::vector<std::uint32_t> tail_;
  unsigned precision_ = kDefaultAnsPrecision;
};

/// Fresh message holding 64 + 32 * n_init_words clean bits drawn from
/// Xorshift64Star(seed). The head takes the first draw with its top bit
/// forced on; each later draw supplies one tail word (low half).
/// n_init_words must be at least 2.
AnsState ans_init(std::uint64_t seed, std::size_t n_init_words,
                  unsigned precision = kDefaultAnsPrecision);

/// Serialized payload: head high word, head low word, then the tail from the
/// top of the stack down.
std::vector<std::uint32_t> ans_flatten(const AnsState& state);
/// Inverse of ans_flatten. Throws MalformedPayload on fewer than two words
/// or a head below the renormalization interval.
AnsState ans_unflatten(std::span<const std::uint32_t> words,
                       unsigned precision = kDefaultAnsPrecision);

/// Finite-alphabet distribution with integer frequencies summing to
/// 2^precision. This is the only form the coder consumes.
class QuantizedDistribution {
 public:
  /// Largest-remainder rounding of `masses` (any positive scale) to
  /// 2^precision units, then every zero-frequency symbol is raised to 1 by
  /// taking a unit from the currently largest frequency.
  using symbol_type = std::size_t;

  static QuantizedDistribution from_masses(std::span<const double> masses,
                                           unsigned precision);
  /// Wraps explicit frequencies; throws InvalidDistribution unless they sum
  /// to 2^precision.
  static QuantizedDistribution from_frequencies(std::vector<std::uint64_t> freqs,
                                                unsigned precision);

  std::size_t size() const noexcept { return freqs_.size(); }
  unsigned precision() const noexcept { return precision_; }
  std::uint64_t frequency(std::size_t symbol) const { return freqs_.at(symbol); }
  std::uint64_t cumulative(std::size_t symbol) const { return cumfreqs_.at(symbol); }
  std::span<const std::uint64_t> frequencies() const noexcept { return freqs_; }
  /// Exclusive prefix sums; one longer than the alphabet, ending at 2^precision.
  std::span<const std::uint64_t> cumulative_frequencies() const noexcept {
    return cumfreqs_;
  }
  double probability(std::size_t symbol) const;

  void push(AnsState& state, std::size_t symbol) const;
  std::size_t pop(AnsState& state) const;

 private:
  QuantizedDistribution(std::vector<std::uint64_t> freqs, unsigned precision);

  std::vector<std::uint64_t> freqs_;
  std::vector<std::uint64_t> cumfreqs_;
  unsigned precision_ = 0;
};

/// Anything with an exact push/pop pair over some symbol type.
template <typename C>
concept SymbolCodec = requires(const C& codec, AnsState& state,
                               const typename C::symbol_type& symbol) {
  codec.push(state, symbol);
  { codec.pop(state) } -> std::convertible_to<typename C::symbol_type>;
};

}  // namespace bbans
