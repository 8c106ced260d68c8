#pragma once

// Continuous-trait agents pulled toward a norm target (Experiments 2-3).
//
// Update for one trait value b with target tau and peer mean m:
//
//   b' = clamp01(b + eta_d * k_role * (tau - b)
//                  + [|tau - b| > delta] * eta_pun * (tau - b)
//                  + eta_peer * (m - b)
//                  + xi),      xi ~ U[-sigma * n_role, +sigma * n_role]
//
// Updates are synchronous: every agent sees the previous step's peer mean.
// At each shock (a schedule segment starting after step 0) the effective
// discipline rate is multiplied by the fatigue factor and stays degraded.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnorm/error.hpp"
#include "qnorm/random.hpp"

namespace qnorm::agents {

struct BehaviorProfile {
  double compliance = 0.0;
  double trust = 0.0;
};

enum class Role { Complier = 0, Rebel = 1, Authority = 2 };
inline constexpr std::array<Role, 3> kRoles{Role::Complier, Role::Rebel, Role::Authority};

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::Complier: return "complier";
    case Role::Rebel: return "rebel";
    case Role::Authority: return "authority";
  }
  return "?";
}

inline std::size_t index_of(Role r) { return static_cast<std::size_t>(r); }

struct RoleMultipliers {
  double discipline = 1.0;
  double noise = 1.0;
};

struct DynamicsParams {
  double discipline_rate = 0.1;       // eta_d
  double punishment_rate = 0.1;       // eta_pun
  double deviation_threshold = 0.25;  // delta
  double peer_rate = 0.03;            // eta_peer
  double noise_amplitude = 0.01;      // sigma
  double fatigue_factor = 0.7;        // phi
  std::array<RoleMultipliers, 3> roles{{{1.5, 1.0}, {0.3, 2.0}, {2.0, 0.0}}};

  const RoleMultipliers& multipliers(Role r) const { return roles[index_of(r)]; }

  // exp3 preset: roles, shocks and fatigue.
  static DynamicsParams role_shock_defaults() { return {}; }

  // exp2 preset: a single homogeneous population converging slowly
  // enough that the entropy decline spans the whole 300-step horizon.
  static DynamicsParams convergence_defaults() {
    DynamicsParams p;
    p.discipline_rate = 0.015;
    p.punishment_rate = 0.10;
    p.deviation_threshold = 0.25;
    p.peer_rate = 0.005;
    p.noise_amplitude = 0.005;
    p.fatigue_factor = 1.0;
    p.roles = {{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}};
    return p;
  }

  void validate() const {
    using qnorm::detail::require;
    require(discipline_rate >= 0.0, "dynamics: discipline_rate must be >= 0");
    require(punishment_rate >= 0.0, "dynamics: punishment_rate must be >= 0");
    require(deviation_threshold >= 0.0, "dynamics: deviation_threshold must be >= 0");
    require(peer_rate >= 0.0, "dynamics: peer_rate must be >= 0");
    require(noise_amplitude >= 0.0, "dynamics: noise_amplitude must be >= 0");
    require(fatigue_factor > 0.0 && fatigue_factor <= 1.0, "dynamics: fatigue_factor must be in (0, 1]");
    for (auto r : kRoles) {
      require(multipliers(r).discipline >= 0.0 && multipliers(r).noise >= 0.0,
              "dynamics: role multipliers must be >= 0 (" + std::string(to_string(r)) + ")");
    }
  }
};

struct NormSegment {
  int start_step = 0;
  double target = 0.0;
};

class NormSchedule {
 public:
  NormSchedule() : segments_{{0, 0.85}} {}
  explicit NormSchedule(std::vector<NormSegment> segments) : segments_(std::move(segments)) {
    using qnorm::detail::require;
    require(!segments_.empty(), "schedule: at least one segment is required");
    require(segments_.front().start_step == 0, "schedule: first segment must start at step 0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      require(segments_[i].target >= 0.0 && segments_[i].target <= 1.0,
              "schedule: targets must be in [0, 1]");
      if (i > 0) {
        require(segments_[i].start_step > segments_[i - 1].start_step,
                "schedule: segment start steps must be strictly increasing");
      }
    }
  }

  static NormSchedule constant(double target) { return NormSchedule({{0, target}}); }

  // Shocks at 150 and 230, targets centred in the 10-bin histogram cells.
  static NormSchedule shock_defaults() { return NormSchedule({{0, 0.85}, {150, 0.35}, {230, 0.65}}); }

  const std::vector<NormSegment>& segments() const { return segments_; }

  bool is_shock(int step) const {
    return step > 0 && std::any_of(segments_.begin(), segments_.end(),
                                   [step](const NormSegment& s) { return s.start_step == step; });
  }

 private:
  std::vector<NormSegment> segments_;
};

inline double current_target(const NormSchedule& schedule, int step) {
  double tau = schedule.segments().front().target;
  for (const auto& seg : schedule.segments()) {
    if (seg.start_step > step) break;
    tau = seg.target;
  }
  return tau;
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// One synchronous update of a single trait value. Always consumes one
// uniform draw so the stream position does not depend on parameters.
template <BitSource S>
double step_agent(double b, double tau, double peer_mean, const DynamicsParams& params, Role role, S& rng) {
  const auto& m = params.multipliers(role);
  const double gap = tau - b;
  double next = b + params.discipline_rate * m.discipline * gap;
  if (std::abs(gap) > params.deviation_threshold) next += params.punishment_rate * gap;
  next += params.peer_rate * (peer_mean - b);
  const double amplitude = params.noise_amplitude * m.noise;
  const double u = uniform01(rng);
  if (amplitude > 0.0) next += (2.0 * u - 1.0) * amplitude;
  return clamp01(next);
}

// Counts by largest-remainder rounding, then a seeded shuffle of the order.
template <BitSource S>
std::vector<Role> assign_roles(int n, const std::array<double, 3>& fractions, S& rng) {
  using qnorm::detail::require;
  require(n >= 0, "roles: agent count must be >= 0");
  double total = 0.0;
  for (double f : fractions) {
    require(f >= 0.0, "roles: fractions must be >= 0");
    total += f;
  }
  require(std::abs(total - 1.0) <= 1e-9, "roles: fractions must sum to 1");

  std::array<int, 3> counts{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (std::size_t r = 0; r < 3; ++r) {
    const double exact = fractions[r] * n;
    counts[r] = static_cast<int>(std::floor(exact));
    remainder[r] = exact - counts[r];
    assigned += counts[r];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return remainder[x] > remainder[y]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
    ++counts[order[k]];
    ++assigned;
  }

  std::vector<Role> roles;
  roles.reserve(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < 3; ++r) roles.insert(roles.end(), static_cast<std::size_t>(counts[r]), kRoles[r]);
  shuffle(roles, rng);
  return roles;
}

struct ShockEvent {
  int step = 0;
  double previous_target = 0.0;
  double new_target = 0.0;
  double discipline_rate = 0.0;  // effective rate after fatigue
};

struct TrajectoryRecord {
  int agents = 0;
  int steps = 0;
  std::vector<Role> roles;
  // [step][agent], steps 0..steps.
  std::vector<std::vector<double>> compliance;
  std::vector<std::vector<double>> trust;
  std::vector<double> discipline_rate;  // effective eta_d per step
  std::vector<double> target;           // tau per step
  std::vector<ShockEvent> shocks;
};

struct DynamicsConfig {
  int agents = 25;
  int steps = 300;
  DynamicsParams params;
  NormSchedule schedule = NormSchedule::shock_defaults();
  std::array<double, 3> role_fractions{0.6, 0.2, 0.2};
};

inline void validate(const DynamicsConfig& c) {
  qnorm::detail::require(c.agents >= 2, "dynamics: at least 2 agents are required for a peer mean");
  qnorm::detail::require(c.steps >= 0, "dynamics: steps must be >= 0");
  c.params.validate();
}

namespace detail {

inline std::vector<double> peer_means(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  const double others = static_cast<double>(values.size() - 1);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (sum - values[i]) / others;
  return out;
}

}  // namespace detail

// Draw order: role assignment, initial (compliance, trust) per agent, then
// per step and agent one compliance draw followed by one trust draw.
template <BitSource S>
TrajectoryRecord run_dynamics(const DynamicsConfig& config, S& rng) {
  validate(config);
  TrajectoryRecord rec;
  rec.agents = config.agents;
  rec.steps = config.steps;
  rec.roles = assign_roles(config.agents, config.role_fractions, rng);

  const auto n = static_cast<std::size_t>(config.agents);
  std::vector<double> compliance(n);
  std::vector<double> trust(n);
  for (std::size_t i = 0; i < n; ++i) {
    compliance[i] = uniform01(rng);
    trust[i] = uniform01(rng);
  }

  DynamicsParams effective = config.params;
  rec.compliance.reserve(static_cast<std::size_t>(config.steps) + 1);
  rec.trust.reserve(static_cast<std::size_t>(config.steps) + 1);
  rec.compliance.push_back(compliance);
  rec.trust.push_back(trust);
  rec.discipline_rate.push_back(effective.discipline_rate);
  rec.target.push_back(current_target(config.schedule, 0));

  for (int step = 1; step <= config.steps; ++step) {
    const double tau = current_target(config.schedule, step);
    if (config.schedule.is_shock(step)) {
      effective.discipline_rate *= config.params.fatigue_factor;
      rec.shocks.push_back({step, current_target(config.schedule, step - 1), tau, effective.discipline_rate});
    }
    const auto peer_c = detail::peer_means(compliance);
    const auto peer_t = detail::peer_means(trust);
    for (std::size_t i = 0; i < n; ++i) {
      compliance[i] = step_agent(compliance[i], tau, peer_c[i], effective, rec.roles[i], rng);
      trust[i] = step_agent(trust[i], tau, peer_t[i], effective, rec.roles[i], rng);
    }
    rec.compliance.push_back(compliance);
    rec.trust.push_back(trust);
    rec.discipline_rate.push_back(effective.discipline_rate);
    rec.target.push_back(tau);
  }
  return rec;
}

}  // namespace qnorm::agents
