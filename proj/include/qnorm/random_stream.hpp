#pragma once

// Runtime-selectable randomness: the pseudorandom stream, or a stream whose
// bits come from simulated measurements of Hadamard-prepared registers.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "qnorm/error.hpp"
#include "qnorm/quantum/state_vector.hpp"
#include "qnorm/random.hpp"

namespace qnorm {

enum class RandomnessSource { Pseudo, QuantumSim };

inline std::string_view to_string(RandomnessSource s) {
  return s == RandomnessSource::Pseudo ? "pseudo" : "quantum-sim";
}

inline RandomnessSource parse_randomness_source(std::string_view name) {
  if (name == "pseudo") return RandomnessSource::Pseudo;
  if (name == "quantum-sim" || name == "quantum_sim") return RandomnessSource::QuantumSim;
  throw ConfigError("unknown randomness source '" + std::string(name) +
                    "' (expected pseudo or quantum-sim)");
}

// Bits drawn through quantum::sample_bits. The simulator's own measurement
// sampling runs on an internal pseudo stream seeded from `seed`.
class QuantumStream {
 public:
  static constexpr int kRegisterWidth = 4;

  explicit QuantumStream(std::uint64_t seed) : sampler_(seed) {}

  std::uint64_t next_bits(int k) {
    if (k < 0 || k > 64) throw ConfigError("next_bits: k must be in [0, 64]");
    std::uint64_t word = 0;
    const auto bits = quantum::sample_bits(k, sampler_, kRegisterWidth);
    for (const auto b : bits) word = (word << 1) | b;
    return word;
  }

 private:
  PseudoStream sampler_;
};

static_assert(BitSource<QuantumStream>);

class RandomStream {
 public:
  RandomStream(RandomnessSource source, std::uint64_t seed) {
    if (source == RandomnessSource::Pseudo) {
      impl_.emplace<PseudoStream>(seed);
    } else {
      impl_.emplace<QuantumStream>(seed);
    }
  }

  std::uint64_t next_bits(int k) {
    return std::visit([k](auto& s) { return s.next_bits(k); }, impl_);
  }

  RandomnessSource source() const {
    return std::holds_alternative<PseudoStream>(impl_) ? RandomnessSource::Pseudo
                                                       : RandomnessSource::QuantumSim;
  }

 private:
  std::variant<PseudoStream, QuantumStream> impl_{std::in_place_type<PseudoStream>, 0};
};

static_assert(BitSource<RandomStream>);

inline RandomStream make_random_stream(RandomnessSource source, std::uint64_t seed) {
  return RandomStream(source, seed);
}

}  // namespace qnorm
