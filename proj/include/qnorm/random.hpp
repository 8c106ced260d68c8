#pragma once

// Bit-source concept and the pseudorandom stream.
//
// Every stochastic operation in the library is a template over a type that
// can hand out k fresh random bits. Uniform reals and bounded integers are
// derived from those bits here, not through <random> distributions (their
// output is implementation-defined, and seeded runs must replay byte-exact).

#include <concepts>
#include <cstdint>
#include <random>
#include <string_view>

#include "qnorm/error.hpp"

namespace qnorm {

template <class S>
concept BitSource = requires(S& s, int k) {
  { s.next_bits(k) } -> std::same_as<std::uint64_t>;
};

inline constexpr int kUniformBits = 53;

// Uniform real in [0, 1) from exactly 53 bits.
template <BitSource S>
double uniform01(S& source) {
  return static_cast<double>(source.next_bits(kUniformBits)) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection sampling keeps the result unbiased.
template <BitSource S>
std::uint64_t uniform_below(S& source, std::uint64_t n) {
  if (n == 0) throw ConfigError("uniform_below: empty range");
  if (n == 1) return 0;
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = source.next_bits(64);
    if (x >= threshold) return x % n;
  }
}

// Uniform real in [lo, hi).
template <BitSource S>
double uniform_real(S& source, double lo, double hi) {
  return lo + (hi - lo) * uniform01(source);
}

template <BitSource S>
bool bernoulli(S& source, double p) {
  return uniform01(source) < p;
}

// Fisher-Yates with our own bounded draws (std::shuffle is not portable).
template <BitSource S, class Range>
void shuffle(Range& range, S& source) {
  const auto n = static_cast<std::uint64_t>(std::size(range));
  for (std::uint64_t i = n; i > 1; --i) {
    const std::uint64_t j = uniform_below(source, i);
    using std::swap;
    swap(range[i - 1], range[j]);
  }
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for ensemble replica `index`, independent of worker scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + 0x9E3779B97F4A7C15ULL * (index + 1));
}

inline constexpr std::string_view kPseudoGeneratorName = "std::mt19937_64";
inline constexpr std::string_view kSeedDerivationName = "splitmix64-v1";

// Seeded Mersenne Twister; its output sequence is fixed by the standard.
class PseudoStream {
 public:
  explicit PseudoStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_bits(int k) {
    if (k < 0 || k > 64) throw ConfigError("next_bits: k must be in [0, 64]");
    if (k == 0) return 0;
    const std::uint64_t word = engine_();
    return k == 64 ? word : word >> (64 - k);
  }

 private:
  std::mt19937_64 engine_;
};

static_assert(BitSource<PseudoStream>);

}  // namespace qnorm
