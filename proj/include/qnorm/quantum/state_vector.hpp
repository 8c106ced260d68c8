#pragma once

// Dense state-vector simulation for small registers.
//
// Bit order: qubit q is bit q of the basis index (qubit 0 is the least
// significant bit), so |q2 q1 q0> = |101> is index 5.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnorm/error.hpp"
#include "qnorm/random.hpp"

namespace qnorm::quantum {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 20;
inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

enum class GateKind { Hadamard, PauliX, CNOT };

struct GateOp {
  GateKind kind;
  int qubit;        // target of single-qubit gates, control of CNOT
  int target = -1;  // CNOT only

  static GateOp hadamard(int q) { return {GateKind::Hadamard, q}; }
  static GateOp pauli_x(int q) { return {GateKind::PauliX, q}; }
  static GateOp cnot(int control, int target) { return {GateKind::CNOT, control, target}; }

  friend bool operator==(const GateOp&, const GateOp&) = default;
};

struct PauliZZ {
  int i;
  int j;
};

inline void check_register_size(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw ConfigError("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                      "], got " + std::to_string(n));
  }
}

class StateVector {
 public:
  // |0...0> on n qubits.
  explicit StateVector(int num_qubits) : num_qubits_(num_qubits) {
    check_register_size(num_qubits);
    amps_.assign(std::size_t{1} << num_qubits, Amplitude{0.0, 0.0});
    amps_[0] = 1.0;
  }

  // Adopts raw amplitudes; length must be a power of two within range.
  static StateVector from_amplitudes(std::vector<Amplitude> amps) {
    int n = 0;
    while ((std::size_t{1} << n) < amps.size()) ++n;
    if (amps.size() < 2 || (std::size_t{1} << n) != amps.size()) {
      throw ConfigError("amplitude vector length must be a power of two >= 2");
    }
    StateVector s(n);
    s.amps_ = std::move(amps);
    return s;
  }

  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const Amplitude> amplitudes() const { return amps_; }
  const Amplitude& operator[](std::size_t k) const { return amps_[k]; }

  double norm_squared() const {
    double total = 0.0;
    for (const auto& a : amps_) total += std::norm(a);
    return total;
  }

  double probability(std::uint64_t basis) const { return std::norm(amps_.at(basis)); }

  StateVector& apply(const GateOp& gate) {
    check_qubit(gate.qubit);
    switch (gate.kind) {
      case GateKind::Hadamard: apply_hadamard(gate.qubit); break;
      case GateKind::PauliX: apply_x(gate.qubit); break;
      case GateKind::CNOT:
        check_qubit(gate.target);
        if (gate.target == gate.qubit) throw GateError("CNOT control and target must differ");
        apply_cnot(gate.qubit, gate.target);
        break;
    }
    return *this;
  }

  void check_qubit(int q) const {
    if (q < 0 || q >= num_qubits_) {
      throw GateError("qubit index " + std::to_string(q) + " out of range for " +
                      std::to_string(num_qubits_) + "-qubit register");
    }
  }

  // Collapse onto one basis state.
  void collapse_to(std::uint64_t basis) {
    std::fill(amps_.begin(), amps_.end(), Amplitude{0.0, 0.0});
    amps_.at(basis) = 1.0;
  }

 private:
  void apply_hadamard(int q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t k = 0; k < amps_.size(); ++k) {
      if (k & bit) continue;
      const Amplitude a0 = amps_[k];
      const Amplitude a1 = amps_[k | bit];
      amps_[k] = (a0 + a1) * kInvSqrt2;
      amps_[k | bit] = (a0 - a1) * kInvSqrt2;
    }
  }

  void apply_x(int q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t k = 0; k < amps_.size(); ++k) {
      if (!(k & bit)) std::swap(amps_[k], amps_[k | bit]);
    }
  }

  void apply_cnot(int control, int target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t k = 0; k < amps_.size(); ++k) {
      if ((k & cbit) && !(k & tbit)) std::swap(amps_[k], amps_[k | tbit]);
    }
  }

  int num_qubits_;
  std::vector<Amplitude> amps_;
};

inline StateVector init_zero(int n) { return StateVector(n); }

inline StateVector apply_gate(StateVector state, const GateOp& gate) {
  state.apply(gate);
  return state;
}

inline StateVector apply_circuit(StateVector state, std::span<const GateOp> gates) {
  for (const auto& g : gates) state.apply(g);
  return state;
}

// H_0 followed by CX_{0,1} ... CX_{n-2,n-1}, on qubits [offset, offset + n).
inline void append_ghz_circuit(std::vector<GateOp>& circuit, int n, int offset = 0) {
  circuit.push_back(GateOp::hadamard(offset));
  for (int q = 0; q + 1 < n; ++q) circuit.push_back(GateOp::cnot(offset + q, offset + q + 1));
}

inline StateVector prepare_ghz(int n) {
  check_register_size(n);
  std::vector<GateOp> circuit;
  append_ghz_circuit(circuit, n);
  return apply_circuit(StateVector(n), circuit);
}

// <Z_i Z_j> = sum_k |a_k|^2 (-1)^(bit_i(k) xor bit_j(k)).
inline double expectation_zz(const StateVector& state, PauliZZ obs) {
  state.check_qubit(obs.i);
  state.check_qubit(obs.j);
  if (obs.i == obs.j) throw GateError("ZZ observable needs two distinct qubits");
  const auto amps = state.amplitudes();
  double value = 0.0;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const bool parity = (((k >> obs.i) ^ (k >> obs.j)) & 1U) != 0;
    const double p = std::norm(amps[k]);
    value += parity ? -p : p;
  }
  return value;
}

// X on a uniformly chosen qubit; returns its index.
template <BitSource S>
int flip_random_qubit(StateVector& state, S& rng) {
  const int q = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(state.num_qubits())));
  state.apply(GateOp::pauli_x(q));
  return q;
}

struct FlipOutcome {
  StateVector state;
  int qubit;
};

template <BitSource S>
FlipOutcome apply_random_flip(StateVector state, S& rng) {
  const int q = flip_random_qubit(state, rng);
  return {std::move(state), q};
}

struct Measurement {
  std::uint64_t outcome;
  StateVector collapsed;
};

// Inverse-CDF sampling over |a_k|^2 with a single uniform draw.
template <BitSource S>
std::uint64_t sample_outcome(const StateVector& state, S& rng) {
  const auto amps = state.amplitudes();
  const double total = state.norm_squared();
  if (!(total > 0.0)) throw InvariantError("cannot measure an all-zero state vector");
  const double u = uniform01(rng) * total;
  double cumulative = 0.0;
  std::uint64_t last_nonzero = 0;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const double p = std::norm(amps[k]);
    if (p == 0.0) continue;
    last_nonzero = k;
    cumulative += p;
    if (u < cumulative) return k;
  }
  return last_nonzero;  // u landed in the rounding slack at the top
}

template <BitSource S>
Measurement measure_all(const StateVector& state, S& rng) {
  const std::uint64_t k = sample_outcome(state, rng);
  StateVector collapsed(state.num_qubits());
  collapsed.collapse_to(k);
  return {k, std::move(collapsed)};
}

// Basis index rendered as a bitstring, highest qubit first.
inline std::string to_bitstring(std::uint64_t outcome, int num_qubits) {
  std::string s(static_cast<std::size_t>(num_qubits), '0');
  for (int q = 0; q < num_qubits; ++q) {
    if ((outcome >> q) & 1U) s[static_cast<std::size_t>(num_qubits - 1 - q)] = '1';
  }
  return s;
}

inline constexpr int kDefaultSampleRegister = 8;

// k unbiased bits, each chunk drawn by preparing H on every qubit of a
// register of at most `register_width` qubits and measuring it. Bit order in
// the result follows qubit order within each chunk.
template <BitSource S>
std::vector<std::uint8_t> sample_bits(int k, S& rng, int register_width = kDefaultSampleRegister) {
  if (k < 0) throw ConfigError("sample_bits: negative bit count");
  check_register_size(register_width);
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(k));
  while (static_cast<int>(bits.size()) < k) {
    const int width = std::min(register_width, k - static_cast<int>(bits.size()));
    StateVector reg(width);
    for (int q = 0; q < width; ++q) reg.apply(GateOp::hadamard(q));
    const std::uint64_t outcome = sample_outcome(reg, rng);
    for (int q = 0; q < width; ++q) bits.push_back(static_cast<std::uint8_t>((outcome >> q) & 1U));
  }
  return bits;
}

}  // namespace qnorm::quantum
