#pragma once

// Two-outcome behavioral states |S> = p_R|R> + p_N|N>, the norm operator
// [[s, 1-s], [1-s, s]], entangled pairs p_RR|RR> + p_NN|NN>, and the
// product composition of independent individuals.
//
// Amplitudes are nonnegative reals. The norm operator is not unitary for
// 0 < s < 1, so every application is followed by L2 renormalization.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnorm/error.hpp"
#include "qnorm/random.hpp"

namespace qnorm::social {

inline constexpr double kNormTolerance = 1e-9;

enum class MeasuredBehavior { RoleConforming, NormBreaking };

inline const char* to_string(MeasuredBehavior b) {
  return b == MeasuredBehavior::RoleConforming ? "R" : "N";
}

class BehaviorAmplitudes {
 public:
  BehaviorAmplitudes(double conforming, double breaking) : r_(conforming), n_(breaking) {
    if (!(r_ >= 0.0) || !(n_ >= 0.0)) throw ConfigError("behavior amplitudes must be nonnegative");
    if (std::abs(r_ * r_ + n_ * n_ - 1.0) > kNormTolerance) {
      throw ConfigError("behavior amplitudes must satisfy p_R^2 + p_N^2 = 1");
    }
  }

  // Normalizes (r, n); throws InvariantError when both vanish.
  static BehaviorAmplitudes normalized(double r, double n) {
    const double norm = std::hypot(r, n);
    if (!(norm > 0.0)) throw InvariantError("behavior state collapsed to the zero vector");
    return {r / norm, n / norm};
  }

  double conforming() const { return r_; }
  double breaking() const { return n_; }
  double conforming_probability() const { return r_ * r_; }

  friend bool operator==(const BehaviorAmplitudes&, const BehaviorAmplitudes&) = default;

 private:
  double r_;
  double n_;
};

// p_R = sqrt(bias), p_N = sqrt(1 - bias).
inline BehaviorAmplitudes from_bias(double bias) {
  if (!(bias >= 0.0 && bias <= 1.0)) {
    throw ConfigError("bias must be in [0, 1], got " + std::to_string(bias));
  }
  return {std::sqrt(bias), std::sqrt(1.0 - bias)};
}

class NormOperator {
 public:
  explicit NormOperator(double strength) : s_(strength) {
    if (!(s_ >= 0.0 && s_ <= 1.0)) {
      throw ConfigError("norm strength must be in [0, 1], got " + std::to_string(strength));
    }
  }
  double strength() const { return s_; }

 private:
  double s_;
};

inline BehaviorAmplitudes apply_norm(const BehaviorAmplitudes& state, const NormOperator& op) {
  const double s = op.strength();
  const double r = s * state.conforming() + (1.0 - s) * state.breaking();
  const double n = (1.0 - s) * state.conforming() + s * state.breaking();
  return BehaviorAmplitudes::normalized(r, n);
}

template <BitSource S>
MeasuredBehavior measure(const BehaviorAmplitudes& state, S& rng) {
  return uniform01(rng) < state.conforming_probability() ? MeasuredBehavior::RoleConforming
                                                         : MeasuredBehavior::NormBreaking;
}

// a' = normalize((1-e) a + e b), b' = normalize((1-e) b + e a).
inline std::pair<BehaviorAmplitudes, BehaviorAmplitudes> entangle_adjust(const BehaviorAmplitudes& a,
                                                                         const BehaviorAmplitudes& b,
                                                                         double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("entanglement strength must be in [0, 1], got " + std::to_string(epsilon));
  }
  const double keep = 1.0 - epsilon;
  return {BehaviorAmplitudes::normalized(keep * a.conforming() + epsilon * b.conforming(),
                                         keep * a.breaking() + epsilon * b.breaking()),
          BehaviorAmplitudes::normalized(keep * b.conforming() + epsilon * a.conforming(),
                                         keep * b.breaking() + epsilon * a.breaking())};
}

class PairState {
 public:
  PairState(double both_conform, double both_break) : rr_(both_conform), nn_(both_break) {
    if (!(rr_ >= 0.0) || !(nn_ >= 0.0)) throw ConfigError("pair amplitudes must be nonnegative");
    if (std::abs(rr_ * rr_ + nn_ * nn_ - 1.0) > kNormTolerance) {
      throw ConfigError("pair amplitudes must satisfy p_RR^2 + p_NN^2 = 1");
    }
  }
  double both_conform() const { return rr_; }
  double both_break() const { return nn_; }

 private:
  double rr_;
  double nn_;
};

// Outcomes are always (R, R) or (N, N).
template <BitSource S>
std::pair<MeasuredBehavior, MeasuredBehavior> pair_measure(const PairState& pair, S& rng) {
  const auto b = uniform01(rng) < pair.both_conform() * pair.both_conform() ? MeasuredBehavior::RoleConforming
                                                                            : MeasuredBehavior::NormBreaking;
  return {b, b};
}

inline constexpr int kMaxComposedAgents = 12;

// Dense amplitude table over 2^n configurations. Bit i of the configuration
// index is 1 when agent i is norm-breaking (agent 0 is the low bit).
struct JointAmplitudeTable {
  int agents = 0;
  std::vector<double> amplitudes;

  // Probability that agent i is role-conforming.
  double marginal_conforming(int agent) const {
    double p = 0.0;
    for (std::size_t c = 0; c < amplitudes.size(); ++c) {
      if (((c >> agent) & 1U) == 0) p += amplitudes[c] * amplitudes[c];
    }
    return p;
  }
};

inline JointAmplitudeTable compose_product(std::span<const BehaviorAmplitudes> states) {
  if (states.size() > static_cast<std::size_t>(kMaxComposedAgents)) {
    throw CapacityError("compose_product: " + std::to_string(states.size()) +
                        " agents exceed the dense limit of " + std::to_string(kMaxComposedAgents) +
                        "; keep the per-agent list as the implicit product instead");
  }
  JointAmplitudeTable table;
  table.agents = static_cast<int>(states.size());
  table.amplitudes.assign(std::size_t{1} << states.size(), 1.0);
  for (std::size_t c = 0; c < table.amplitudes.size(); ++c) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      table.amplitudes[c] *= ((c >> i) & 1U) ? states[i].breaking() : states[i].conforming();
    }
  }
  return table;
}

}  // namespace qnorm::social
