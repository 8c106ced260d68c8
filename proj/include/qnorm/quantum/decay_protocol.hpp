#pragma once

// GHZ correlation-decay protocols.
//
// One GHZ group (flips disabled or periodic) or two GHZ groups joined by
// cross-group CNOTs. A single unitary run keeps |<ZZ>| at 1 for adjacent
// in-group pairs; decay is the ensemble mean over independently seeded
// replicas, each of which flips uniformly random qubits on every step that
// is a multiple of `flip_period` (steps are numbered from 1).

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnorm/error.hpp"
#include "qnorm/parallel.hpp"
#include "qnorm/quantum/state_vector.hpp"
#include "qnorm/random_stream.hpp"

namespace qnorm::quantum {

enum class PairSelection { Adjacent, All };

struct DecayProtocolConfig {
  std::vector<int> group_sizes{5};
  int steps = 30;
  int flip_period = 3;
  // Explicit (control, target) CNOTs applied once after preparation. When
  // unset and there are two groups, qubit k of A controls qubit k of B.
  std::optional<std::vector<std::pair<int, int>>> cross_pairs;
  int runs = 1000;
  std::uint64_t seed = 0;
  RandomnessSource randomness = RandomnessSource::Pseudo;
  PairSelection pairs = PairSelection::Adjacent;
  bool record_events = true;
  unsigned workers = 0;

  int total_qubits() const {
    int total = 0;
    for (int g : group_sizes) total += g;
    return total;
  }
};

enum class ProtocolEventKind { CrossCnot, Flip };

inline std::string to_string(ProtocolEventKind k) {
  return k == ProtocolEventKind::CrossCnot ? "cross_cnot" : "flip";
}

struct ProtocolEvent {
  int replica;
  int step;
  ProtocolEventKind kind;
  std::vector<int> qubits;
};

struct DecayResult {
  int num_qubits = 0;
  std::vector<PauliZZ> pairs;
  // [step][pair], steps 0..config.steps (step 0 is the prepared state).
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> std_error;
  std::vector<ProtocolEvent> events;
};

inline void validate(const DecayProtocolConfig& c) {
  qnorm::detail::require(c.group_sizes.size() == 1 || c.group_sizes.size() == 2,
                  "protocol: group_sizes must list one or two groups");
  for (int g : c.group_sizes) qnorm::detail::require(g >= 1, "protocol: every group needs >= 1 qubit");
  const int total = c.total_qubits();
  qnorm::detail::require(total >= 2 && total <= kMaxQubits,
                  "protocol: total qubits must be in [2, " + std::to_string(kMaxQubits) + "], got " +
                      std::to_string(total));
  qnorm::detail::require(c.steps >= 0, "protocol: steps must be >= 0");
  qnorm::detail::require(c.flip_period >= 1, "protocol: flip_period must be >= 1");
  qnorm::detail::require(c.runs >= 1, "protocol: runs must be >= 1");
  if (c.cross_pairs) {
    for (const auto& [ctl, tgt] : *c.cross_pairs) {
      qnorm::detail::require(ctl >= 0 && ctl < total && tgt >= 0 && tgt < total && ctl != tgt,
                      "protocol: cross pair (" + std::to_string(ctl) + ", " + std::to_string(tgt) +
                          ") is not a valid CNOT on " + std::to_string(total) + " qubits");
    }
  }
}

inline std::vector<std::pair<int, int>> resolved_cross_pairs(const DecayProtocolConfig& c) {
  if (c.cross_pairs) return *c.cross_pairs;
  std::vector<std::pair<int, int>> pairs;
  if (c.group_sizes.size() == 2) {
    const int a = c.group_sizes[0];
    const int b = c.group_sizes[1];
    for (int k = 0; k < std::min(a, b); ++k) pairs.emplace_back(k, a + k);
  }
  return pairs;
}

inline std::vector<PauliZZ> observed_pairs(int num_qubits, PairSelection selection) {
  std::vector<PauliZZ> pairs;
  for (int i = 0; i < num_qubits; ++i) {
    if (selection == PairSelection::Adjacent) {
      if (i + 1 < num_qubits) pairs.push_back({i, i + 1});
    } else {
      for (int j = i + 1; j < num_qubits; ++j) pairs.push_back({i, j});
    }
  }
  return pairs;
}

// Initial register: GHZ on each group, then the cross-group CNOT layer.
inline StateVector prepare_protocol_state(const DecayProtocolConfig& c) {
  std::vector<GateOp> circuit;
  int offset = 0;
  for (int g : c.group_sizes) {
    append_ghz_circuit(circuit, g, offset);
    offset += g;
  }
  for (const auto& [ctl, tgt] : resolved_cross_pairs(c)) circuit.push_back(GateOp::cnot(ctl, tgt));
  return apply_circuit(StateVector(c.total_qubits()), circuit);
}

namespace detail {

struct ReplicaTrace {
  std::vector<double> zz;  // (steps + 1) * pairs, row-major by step
  std::vector<ProtocolEvent> events;
};

inline ReplicaTrace run_replica(const DecayProtocolConfig& c, const StateVector& initial,
                                const std::vector<PauliZZ>& pairs, int replica) {
  ReplicaTrace trace;
  trace.zz.reserve(static_cast<std::size_t>(c.steps + 1) * pairs.size());
  auto rng = make_random_stream(c.randomness, derive_seed(c.seed, static_cast<std::uint64_t>(replica)));
  StateVector state = initial;

  if (c.record_events) {
    for (const auto& [ctl, tgt] : resolved_cross_pairs(c)) {
      trace.events.push_back({replica, 0, ProtocolEventKind::CrossCnot, {ctl, tgt}});
    }
  }
  for (const auto& p : pairs) trace.zz.push_back(expectation_zz(state, p));

  for (int step = 1; step <= c.steps; ++step) {
    if (step % c.flip_period == 0) {
      const int q = flip_random_qubit(state, rng);
      if (c.record_events) trace.events.push_back({replica, step, ProtocolEventKind::Flip, {q}});
    }
    for (const auto& p : pairs) trace.zz.push_back(expectation_zz(state, p));
  }
  return trace;
}

}  // namespace detail

inline DecayResult run_decay_protocol(const DecayProtocolConfig& config) {
  validate(config);
  const StateVector initial = prepare_protocol_state(config);
  const auto pairs = observed_pairs(config.total_qubits(), config.pairs);

  auto traces = run_ensemble(
      static_cast<std::size_t>(config.runs),
      [&](std::size_t r) { return detail::run_replica(config, initial, pairs, static_cast<int>(r)); },
      config.workers);

  DecayResult result;
  result.num_qubits = config.total_qubits();
  result.pairs = pairs;
  const std::size_t rows = static_cast<std::size_t>(config.steps + 1);
  const std::size_t cols = pairs.size();
  std::vector<double> sum(rows * cols, 0.0);
  std::vector<double> sum_sq(rows * cols, 0.0);
  // Reduction in replica order so the floating-point result is fixed.
  for (auto& t : traces) {
    for (std::size_t k = 0; k < t.zz.size(); ++k) {
      sum[k] += t.zz[k];
      sum_sq[k] += t.zz[k] * t.zz[k];
    }
    for (auto& e : t.events) result.events.push_back(std::move(e));
  }

  const double n = static_cast<double>(config.runs);
  result.mean.assign(rows, std::vector<double>(cols));
  result.std_error.assign(rows, std::vector<double>(cols));
  for (std::size_t s = 0; s < rows; ++s) {
    for (std::size_t p = 0; p < cols; ++p) {
      const double m = sum[s * cols + p] / n;
      const double var = std::max(0.0, sum_sq[s * cols + p] / n - m * m);
      result.mean[s][p] = m;
      result.std_error[s][p] = config.runs > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    }
  }
  return result;
}

}  // namespace qnorm::quantum
