#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "qnorm/quantum/decay_protocol.hpp"
#include "qnorm/quantum/state_vector.hpp"
#include "qnorm/random.hpp"
#include "support/dense_oracle.hpp"

namespace q = qnorm::quantum;
using qnorm::PseudoStream;

namespace {

const double kR = 1.0 / std::sqrt(2.0);

void expect_amplitudes(const q::StateVector& s, const std::vector<double>& expected, double tol = 1e-12) {
  ASSERT_EQ(s.dimension(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    EXPECT_NEAR(s[k].real(), expected[k], tol) << "index " << k;
    EXPECT_NEAR(s[k].imag(), 0.0, tol) << "index " << k;
  }
}

q::GateOp random_gate(int n, PseudoStream& rng) {
  const auto kind = n == 1 ? qnorm::uniform_below(rng, 2) : qnorm::uniform_below(rng, 3);
  const int a = static_cast<int>(qnorm::uniform_below(rng, n));
  if (kind == 0) return q::GateOp::hadamard(a);
  if (kind == 1) return q::GateOp::pauli_x(a);
  int b = static_cast<int>(qnorm::uniform_below(rng, n - 1));
  if (b >= a) ++b;
  return q::GateOp::cnot(a, b);
}

}  // namespace

TEST(InitZero, SingleQubit) { expect_amplitudes(q::init_zero(1), {1, 0}); }

TEST(InitZero, TwoQubits) { expect_amplitudes(q::init_zero(2), {1, 0, 0, 0}); }

TEST(InitZero, RejectsOutOfRange) {
  EXPECT_THROW(q::init_zero(21), qnorm::ConfigError);
  EXPECT_THROW(q::init_zero(0), qnorm::ConfigError);
  EXPECT_NO_THROW(q::init_zero(20));
}

TEST(ApplyGate, HadamardOnZero) {
  expect_amplitudes(q::apply_gate(q::init_zero(1), q::GateOp::hadamard(0)), {kR, kR});
}

TEST(ApplyGate, PauliXOnZero) { expect_amplitudes(q::apply_gate(q::init_zero(1), q::GateOp::pauli_x(0)), {0, 1}); }

TEST(ApplyGate, CnotLowBitControl) {
  // Index 2 has only qubit 1 set, so control 0 never fires on this state.
  const auto s = q::StateVector::from_amplitudes({kR, 0, kR, 0});
  expect_amplitudes(q::apply_gate(s, q::GateOp::cnot(0, 1)), {kR, 0, kR, 0});
  expect_amplitudes(q::apply_gate(s, q::GateOp::cnot(1, 0)), {kR, 0, 0, kR});
  const auto t = q::StateVector::from_amplitudes({kR, kR, 0, 0});
  expect_amplitudes(q::apply_gate(t, q::GateOp::cnot(0, 1)), {kR, 0, 0, kR});
}

TEST(ApplyGate, CnotMatchesFourByFourOracle) {
  const std::vector<oracle::C> in{kR, 0, kR, 0};
  const auto expected = oracle::multiply(oracle::gate_matrix(q::GateOp::cnot(0, 1), 2), in);
  const auto got = q::apply_gate(q::StateVector::from_amplitudes(in), q::GateOp::cnot(0, 1));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(got[k] - expected[k]), 0.0, 1e-12);
}

TEST(ApplyGate, RejectsBadIndices) {
  const auto s = q::init_zero(3);
  EXPECT_THROW(q::apply_gate(s, q::GateOp::hadamard(3)), qnorm::GateError);
  EXPECT_THROW(q::apply_gate(s, q::GateOp::pauli_x(-1)), qnorm::GateError);
  EXPECT_THROW(q::apply_gate(s, q::GateOp::cnot(0, 3)), qnorm::GateError);
  EXPECT_THROW(q::apply_gate(s, q::GateOp::cnot(1, 1)), qnorm::GateError);
}

TEST(ApplyGate, MatchesDenseOracleOnRandomSequences) {
  PseudoStream rng(11);
  for (int n = 1; n <= 5; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      q::StateVector s(n);
      auto ref = oracle::zero_state(n);
      for (int g = 0; g < 50; ++g) {
        const auto gate = random_gate(n, rng);
        s = q::apply_gate(s, gate);
        ref = oracle::multiply(oracle::gate_matrix(gate, n), ref);
        for (std::size_t k = 0; k < ref.size(); ++k) {
          ASSERT_NEAR(std::abs(s[k] - ref[k]), 0.0, 1e-12) << "n=" << n << " gate " << g;
        }
        ASSERT_NEAR(s.norm_squared(), 1.0, 1e-9);
      }
    }
  }
}

TEST(PrepareGhz, OneQubitIsHadamard) { expect_amplitudes(q::prepare_ghz(1), {kR, kR}); }

TEST(PrepareGhz, ThreeQubits) { expect_amplitudes(q::prepare_ghz(3), {kR, 0, 0, 0, 0, 0, 0, kR}); }

TEST(PrepareGhz, FiveQubitsMatchesOracle) {
  std::vector<q::GateOp> circuit;
  q::append_ghz_circuit(circuit, 5);
  auto ref = oracle::zero_state(5);
  for (const auto& g : circuit) ref = oracle::multiply(oracle::gate_matrix(g, 5), ref);
  const auto s = q::prepare_ghz(5);
  for (std::size_t k = 0; k < 32; ++k) {
    const double want = (k == 0 || k == 31) ? kR : 0.0;
    EXPECT_NEAR(std::abs(s[k] - ref[k]), 0.0, 1e-12);
    EXPECT_NEAR(s[k].real(), want, 1e-12);
  }
}

TEST(PrepareGhz, RejectsOutOfRange) { EXPECT_THROW(q::prepare_ghz(21), qnorm::ConfigError); }

TEST(ExpectationZz, GhzAdjacentIsOne) {
  for (int n = 2; n <= 12; ++n) {
    const auto s = q::prepare_ghz(n);
    for (int i = 0; i + 1 < n; ++i) EXPECT_NEAR(q::expectation_zz(s, {i, i + 1}), 1.0, 1e-12);
  }
}

TEST(ExpectationZz, UniformSuperpositionIsZero) {
  q::StateVector s(3);
  for (int k = 0; k < 3; ++k) s.apply(q::GateOp::hadamard(k));
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 2}}) EXPECT_NEAR(q::expectation_zz(s, {i, j}), 0.0, 1e-12);
}

TEST(ExpectationZz, GhzAfterFlipOnQubitOne) {
  const auto s = q::apply_gate(q::prepare_ghz(3), q::GateOp::pauli_x(1));
  EXPECT_NEAR(q::expectation_zz(s, {0, 1}), -1.0, 1e-12);
  EXPECT_NEAR(q::expectation_zz(s, {1, 2}), -1.0, 1e-12);
  EXPECT_NEAR(q::expectation_zz(s, {0, 2}), 1.0, 1e-12);
}

TEST(ExpectationZz, MatchesDenseOracleOnRandomStates) {
  PseudoStream rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4;
    q::StateVector s(n);
    auto ref = oracle::zero_state(n);
    for (int g = 0; g < 12; ++g) {
      const auto gate = random_gate(n, rng);
      s.apply(gate);
      ref = oracle::multiply(oracle::gate_matrix(gate, n), ref);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) EXPECT_NEAR(q::expectation_zz(s, {i, j}), oracle::zz(ref, n, i, j), 1e-12);
  }
}

TEST(ExpectationZz, RejectsBadObservable) {
  const auto s = q::prepare_ghz(3);
  EXPECT_THROW(q::expectation_zz(s, {0, 3}), qnorm::GateError);
  EXPECT_THROW(q::expectation_zz(s, {1, 1}), qnorm::GateError);
}

TEST(RandomFlip, SingleQubitAlwaysFlipsQubitZero) {
  PseudoStream rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto out = q::apply_random_flip(q::init_zero(1), rng);
    EXPECT_EQ(out.qubit, 0);
    expect_amplitudes(out.state, {0, 1});
  }
}

TEST(RandomFlip, SignRuleOnGhzFour) {
  const auto s = q::apply_gate(q::prepare_ghz(4), q::GateOp::pauli_x(2));
  EXPECT_NEAR(q::expectation_zz(s, {1, 2}), -1.0, 1e-12);
  EXPECT_NEAR(q::expectation_zz(s, {2, 3}), -1.0, 1e-12);
  EXPECT_NEAR(q::expectation_zz(s, {0, 1}), 1.0, 1e-12);
}

// Property: X on q negates exactly the pairs containing q, on arbitrary states.
TEST(RandomFlip, SignRuleProperty) {
  PseudoStream rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(qnorm::uniform_below(rng, 4));
    q::StateVector s(n);
    for (int g = 0; g < 15; ++g) s.apply(random_gate(n, rng));
    const int flip = static_cast<int>(qnorm::uniform_below(rng, n));
    const auto t = q::apply_gate(s, q::GateOp::pauli_x(flip));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double before = q::expectation_zz(s, {i, j});
        const double after = q::expectation_zz(t, {i, j});
        const bool contains = i == flip || j == flip;
        EXPECT_NEAR(after, contains ? -before : before, 1e-12);
      }
    }
  }
}

TEST(RandomFlip, ReplaysWithSameSeed) {
  PseudoStream a(99), b(99);
  for (int t = 0; t < 50; ++t) {
    EXPECT_EQ(q::apply_random_flip(q::prepare_ghz(6), a).qubit, q::apply_random_flip(q::prepare_ghz(6), b).qubit);
  }
}

TEST(RandomFlip, CoversEveryQubit) {
  PseudoStream rng(1);
  std::set<int> seen;
  for (int t = 0; t < 200; ++t) seen.insert(q::apply_random_flip(q::init_zero(5), rng).qubit);
  EXPECT_EQ(seen.size(), 5U);
}

TEST(MeasureAll, BasisStateIsDeterministic) {
  PseudoStream rng(2);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(q::measure_all(q::init_zero(1), rng).outcome, 0U);
}

TEST(MeasureAll, GhzAllZerosFraction) {
  PseudoStream rng(8);
  const auto s = q::prepare_ghz(3);
  const int draws = 100000;
  int zeros = 0;
  for (int t = 0; t < draws; ++t) {
    const auto k = q::sample_outcome(s, rng);
    ASSERT_TRUE(k == 0 || k == 7);
    zeros += k == 0;
  }
  EXPECT_NEAR(static_cast<double>(zeros) / draws, 0.5, 0.01);
}

TEST(MeasureAll, CollapsedStateRemeasuresIdentically) {
  PseudoStream rng(4);
  q::StateVector s(4);
  for (int k = 0; k < 4; ++k) s.apply(q::GateOp::hadamard(k));
  for (int t = 0; t < 20; ++t) {
    const auto m = q::measure_all(s, rng);
    EXPECT_DOUBLE_EQ(m.collapsed.probability(m.outcome), 1.0);
    for (int r = 0; r < 5; ++r) EXPECT_EQ(q::measure_all(m.collapsed, rng).outcome, m.outcome);
  }
}

TEST(MeasureAll, ZeroVectorIsInvariantViolation) {
  PseudoStream rng(1);
  const auto s = q::StateVector::from_amplitudes({0, 0, 0, 0});
  EXPECT_THROW(q::measure_all(s, rng), qnorm::InvariantError);
}

TEST(MeasureAll, Bitstring) {
  EXPECT_EQ(q::to_bitstring(0b0110, 4), "0110");
  EXPECT_EQ(q::to_bitstring(1, 3), "001");
}

TEST(SampleBits, UnbiasedSingleBits) {
  PseudoStream rng(21);
  const int draws = 100000;
  int ones = 0;
  for (int t = 0; t < draws; ++t) ones += q::sample_bits(1, rng)[0];
  EXPECT_NEAR(static_cast<double>(ones) / draws, 0.5, 0.01);
}

TEST(SampleBits, Reproducible) {
  PseudoStream a(5), b(5);
  EXPECT_EQ(q::sample_bits(37, a), q::sample_bits(37, b));
}

TEST(SampleBits, ZeroIsEmpty) {
  PseudoStream rng(5);
  EXPECT_TRUE(q::sample_bits(0, rng).empty());
}

TEST(SampleBits, ChunksLongRequests) {
  PseudoStream rng(5);
  const auto bits = q::sample_bits(45, rng, 20);
  EXPECT_EQ(bits.size(), 45U);
  for (auto b : bits) EXPECT_LE(b, 1);
}

TEST(DecayProtocol, NoFlipsKeepsCorrelation) {
  q::DecayProtocolConfig c;
  c.group_sizes = {5};
  c.steps = 10;
  c.flip_period = 11;
  c.runs = 20;
  const auto r = q::run_decay_protocol(c);
  ASSERT_EQ(r.mean.size(), 11U);
  for (const auto& row : r.mean)
    for (double m : row) EXPECT_DOUBLE_EQ(m, 1.0);
  EXPECT_TRUE(r.events.empty());
}

TEST(DecayProtocol, FiveQubitDecayLaw) {
  q::DecayProtocolConfig c;
  c.group_sizes = {5};
  c.steps = 4;
  c.flip_period = 1;
  c.runs = 10000;
  c.seed = 77;
  c.record_events = false;
  const auto r = q::run_decay_protocol(c);
  for (int m = 1; m <= 4; ++m) {
    const double want = std::pow(1.0 - 4.0 / 5.0, m);
    // Each replica value is +-1; binomial sigma of the mean.
    const double sigma = std::sqrt((1.0 - want * want) / c.runs);
    for (std::size_t p = 0; p < r.pairs.size(); ++p) {
      EXPECT_NEAR(r.mean[m][p], want, 3.0 * sigma) << "m=" << m << " pair " << p;
    }
  }
}

TEST(DecayProtocol, FourQubitsOneFlipIsZero) {
  q::DecayProtocolConfig c;
  c.group_sizes = {4};
  c.steps = 1;
  c.flip_period = 1;
  c.runs = 10000;
  c.seed = 3;
  const auto r = q::run_decay_protocol(c);
  const double sigma = std::sqrt(1.0 / c.runs);
  for (double m : r.mean[1]) EXPECT_NEAR(m, 0.0, 3.0 * sigma);
}

TEST(DecayProtocol, FlipTiming) {
  q::DecayProtocolConfig c;
  c.group_sizes = {4};
  c.steps = 10;
  c.flip_period = 3;
  c.runs = 3;
  const auto r = q::run_decay_protocol(c);
  std::vector<int> steps;
  for (const auto& e : r.events) {
    if (e.replica == 0) steps.push_back(e.step);
  }
  EXPECT_EQ(steps, (std::vector<int>{3, 6, 9}));
}

TEST(DecayProtocol, CrossGroupDefaultsAndEvents) {
  q::DecayProtocolConfig c;
  c.group_sizes = {3, 2};
  EXPECT_EQ(q::resolved_cross_pairs(c), (std::vector<std::pair<int, int>>{{0, 3}, {1, 4}}));
  c.steps = 0;
  c.runs = 2;
  const auto r = q::run_decay_protocol(c);
  int cnots = 0;
  for (const auto& e : r.events) {
    EXPECT_EQ(e.kind, q::ProtocolEventKind::CrossCnot);
    EXPECT_EQ(e.step, 0);
    ++cnots;
  }
  EXPECT_EQ(cnots, 4);
}

// After the cross layer, two GHZ groups in the same branch basis: each
// branch of A is (0..0) or (1..1) and B's qubits get XORed by the matching
// A qubit, so the combined state is an equal mix of four basis states.
TEST(DecayProtocol, CrossGroupStateMatchesOracle) {
  q::DecayProtocolConfig c;
  c.group_sizes = {2, 2};
  const auto s = q::prepare_protocol_state(c);
  std::vector<q::GateOp> circuit;
  q::append_ghz_circuit(circuit, 2, 0);
  q::append_ghz_circuit(circuit, 2, 2);
  circuit.push_back(q::GateOp::cnot(0, 2));
  circuit.push_back(q::GateOp::cnot(1, 3));
  auto ref = oracle::zero_state(4);
  for (const auto& g : circuit) ref = oracle::multiply(oracle::gate_matrix(g, 4), ref);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(std::abs(s[k] - ref[k]), 0.0, 1e-12);
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
}

TEST(DecayProtocol, AllPairSelection) {
  EXPECT_EQ(q::observed_pairs(4, q::PairSelection::All).size(), 6U);
  EXPECT_EQ(q::observed_pairs(4, q::PairSelection::Adjacent).size(), 3U);
}

TEST(DecayProtocol, DeterministicAndWorkerIndependent) {
  q::DecayProtocolConfig c;
  c.steps = 9;
  c.runs = 64;
  c.seed = 123;
  c.workers = 1;
  const auto a = q::run_decay_protocol(c);
  c.workers = 4;
  const auto b = q::run_decay_protocol(c);
  EXPECT_EQ(a.mean, b.mean);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    EXPECT_EQ(a.events[k].replica, b.events[k].replica);
    EXPECT_EQ(a.events[k].qubits, b.events[k].qubits);
  }
}

TEST(DecayProtocol, RejectsBadParameters) {
  q::DecayProtocolConfig c;
  c.flip_period = 0;
  EXPECT_THROW(q::run_decay_protocol(c), qnorm::ConfigError);
  c = {};
  c.group_sizes = {15, 6};
  EXPECT_THROW(q::run_decay_protocol(c), qnorm::ConfigError);
  c = {};
  c.runs = 0;
  EXPECT_THROW(q::run_decay_protocol(c), qnorm::ConfigError);
  c = {};
  c.cross_pairs = std::vector<std::pair<int, int>>{{0, 0}};
  EXPECT_THROW(q::run_decay_protocol(c), qnorm::ConfigError);
}
