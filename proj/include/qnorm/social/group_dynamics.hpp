#pragma once

// Two paired groups under their own norm operators with pairwise
// entanglement, as run by exp1.
//
// Per step: apply each group's norm to every member, blend each pair, then
// measure every member and record counts. Measurement does not collapse the
// persistent amplitudes.

#include <algorithm>
#include <string>
#include <vector>

#include "qnorm/error.hpp"
#include "qnorm/random.hpp"
#include "qnorm/social/behavior.hpp"

namespace qnorm::social {

struct GroupSettings {
  int size = 13;
  double bias = 0.6;
  double strength = 0.9;
};

struct GroupDynamicsConfig {
  GroupSettings group_a{13, 0.6, 0.9};
  GroupSettings group_b{12, 0.4, 0.6};
  double entanglement = 0.05;
  bool apply_norms = true;
  bool entangle = true;
  int steps = 30;

  int pair_count() const { return std::min(group_a.size, group_b.size); }
};

struct GroupPopulation {
  char group_tag = 'A';
  NormOperator norm{1.0};
  std::vector<BehaviorAmplitudes> members;
};

struct GroupCounts {
  int conforming = 0;
  int breaking = 0;
};

struct GroupStep {
  int step = 0;
  GroupCounts a;
  GroupCounts b;
};

struct GroupTrajectory {
  std::vector<GroupStep> steps;  // step 0 measures the initial population
  GroupPopulation final_a;
  GroupPopulation final_b;
  int pairs = 0;
};

inline void validate(const GroupDynamicsConfig& c) {
  for (const auto* g : {&c.group_a, &c.group_b}) {
    qnorm::detail::require(g->size >= 1, "exp1: group size must be >= 1");
    qnorm::detail::require(g->bias >= 0.0 && g->bias <= 1.0, "exp1: group bias must be in [0, 1]");
    qnorm::detail::require(g->strength >= 0.0 && g->strength <= 1.0,
                           "exp1: group strength must be in [0, 1]");
  }
  qnorm::detail::require(c.entanglement >= 0.0 && c.entanglement <= 1.0,
                         "exp1: entanglement must be in [0, 1]");
  qnorm::detail::require(c.steps >= 0, "exp1: steps must be >= 0");
}

inline GroupPopulation make_population(char tag, const GroupSettings& g) {
  return {tag, NormOperator(g.strength),
          std::vector<BehaviorAmplitudes>(static_cast<std::size_t>(g.size), from_bias(g.bias))};
}

template <BitSource S>
GroupCounts measure_counts(const GroupPopulation& pop, S& rng) {
  GroupCounts counts;
  for (const auto& m : pop.members) {
    if (measure(m, rng) == MeasuredBehavior::RoleConforming) {
      ++counts.conforming;
    } else {
      ++counts.breaking;
    }
  }
  return counts;
}

template <BitSource S>
GroupTrajectory run_group_dynamics(const GroupDynamicsConfig& config, S& rng) {
  validate(config);
  GroupPopulation a = make_population('A', config.group_a);
  GroupPopulation b = make_population('B', config.group_b);
  const int pairs = config.pair_count();

  GroupTrajectory out;
  out.pairs = pairs;
  out.steps.reserve(static_cast<std::size_t>(config.steps) + 1);
  {
    GroupStep row{0, measure_counts(a, rng), {}};
    row.b = measure_counts(b, rng);
    out.steps.push_back(row);
  }

  for (int step = 1; step <= config.steps; ++step) {
    if (config.apply_norms) {
      for (auto& m : a.members) m = apply_norm(m, a.norm);
      for (auto& m : b.members) m = apply_norm(m, b.norm);
    }
    if (config.entangle) {
      for (int i = 0; i < pairs; ++i) {
        auto [na, nb] = entangle_adjust(a.members[i], b.members[i], config.entanglement);
        a.members[i] = na;
        b.members[i] = nb;
      }
    }
    GroupStep row{step, measure_counts(a, rng), {}};
    row.b = measure_counts(b, rng);
    out.steps.push_back(row);
  }
  out.final_a = std::move(a);
  out.final_b = std::move(b);
  return out;
}

}  // namespace qnorm::social
