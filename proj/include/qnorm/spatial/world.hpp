#pragma once

// Headless surveillance world used by exp4. Agents walk a schedule between
// Home, Park and Cafe; a deviating agent heads for another place, and an
// omnipresent Watcher detects the deviation with probability p_obs. Detected
// agents are sent to School, lose pi compliance, and their deviation
// multiplier becomes psi^k after k interventions.
//
// Per-agent draw order inside a tick (ascending id, Scheduled agents only):
// deviation uniform, then on deviation a retarget index and a detection draw.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnorm/agents/dynamics.hpp"
#include "qnorm/error.hpp"
#include "qnorm/random.hpp"

namespace qnorm::spatial {

using agents::BehaviorProfile;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

enum class Place { Home = 0, Park = 1, Cafe = 2, School = 3 };
inline constexpr std::array<Place, 4> kPlaces{Place::Home, Place::Park, Place::Cafe, Place::School};

inline std::string_view to_string(Place p) {
  switch (p) {
    case Place::Home: return "Home";
    case Place::Park: return "Park";
    case Place::Cafe: return "Cafe";
    case Place::School: return "School";
  }
  return "?";
}

inline std::optional<Place> parse_place(std::string_view s) {
  for (auto p : kPlaces) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

struct Layout {
  double width = 800.0;
  double height = 600.0;
  std::array<Point, 4> places{{{100, 500}, {400, 100}, {700, 450}, {400, 300}}};
  Point watcher{780, 20};
  double speed = 8.0;

  Point position(Place p) const { return places[static_cast<std::size_t>(p)]; }

  bool contains(Point p) const { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }

  void validate() const {
    using qnorm::detail::require;
    require(width > 0.0 && height > 0.0, "layout: grid width and height must be > 0");
    require(speed > 0.0, "layout: speed must be > 0");
    for (auto p : kPlaces) {
      require(contains(position(p)), "layout: " + std::string(to_string(p)) + " lies outside the grid");
      for (auto q : kPlaces) {
        if (p < q) {
          require(!(position(p) == position(q)),
                  "layout: " + std::string(to_string(p)) + " and " + std::string(to_string(q)) +
                      " share a position");
        }
      }
    }
    require(contains(watcher), "layout: watcher lies outside the grid");
  }
};

struct ScheduleEntry {
  int start_step = 0;
  Place place = Place::Home;
};

class Schedule {
 public:
  Schedule() : entries_{{0, Place::Home}} {}
  explicit Schedule(std::vector<ScheduleEntry> entries) : entries_(std::move(entries)) {
    using qnorm::detail::require;
    require(!entries_.empty(), "schedule: at least one entry is required");
    require(entries_.front().start_step == 0, "schedule: first entry must start at step 0");
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      require(entries_[i].start_step > entries_[i - 1].start_step,
              "schedule: start steps must be strictly increasing");
    }
  }

  // Repeats `cycle` in segments of `segment` steps out to `horizon`.
  static Schedule cycle(const std::vector<Place>& cycle, int segment, int horizon) {
    qnorm::detail::require(!cycle.empty(), "schedule: cycle must not be empty");
    qnorm::detail::require(segment >= 1, "schedule: segment length must be >= 1");
    std::vector<ScheduleEntry> entries;
    for (int start = 0, k = 0; start == 0 || start <= horizon; start += segment, ++k) {
      entries.push_back({start, cycle[static_cast<std::size_t>(k) % cycle.size()]});
    }
    return Schedule(std::move(entries));
  }

  Place at(int step) const {
    Place p = entries_.front().place;
    for (const auto& e : entries_) {
      if (e.start_step > step) break;
      p = e.place;
    }
    return p;
  }

  const std::vector<ScheduleEntry>& entries() const { return entries_; }

 private:
  std::vector<ScheduleEntry> entries_;
};

struct WatcherParams {
  double base_rate = 0.1;        // kappa
  double observe_prob = 0.9;     // p_obs
  double penalty = 0.05;         // pi, compliance units per intervention
  double internalization = 0.9;  // psi

  void validate() const {
    using qnorm::detail::require;
    require(base_rate >= 0.0, "watcher: base_rate (kappa) must be >= 0");
    require(observe_prob >= 0.0 && observe_prob <= 1.0, "watcher: observe_prob must be in [0, 1]");
    require(penalty >= 0.0 && penalty <= 1.0, "watcher: penalty must be in [0, 1]");
    require(internalization >= 0.0 && internalization <= 1.0, "watcher: internalization must be in [0, 1]");
  }
};

inline double deviation_probability(const BehaviorProfile& profile, double multiplier, double kappa) {
  return agents::clamp01(kappa * (1.0 - profile.compliance) * (1.0 - profile.trust) * multiplier);
}

enum class AgentMode { Scheduled, Deviating, Redirected };

struct SpatialAgent {
  int id = 0;
  Point position;
  BehaviorProfile profile;
  double initial_compliance = 0.0;
  Schedule schedule;
  double deviation_multiplier = 1.0;
  int intervention_count = 0;
  AgentMode mode = AgentMode::Scheduled;
  Place target = Place::Home;

  bool redirect_active() const { return mode == AgentMode::Redirected; }
};

struct InterventionEvent {
  int step = 0;
  int agent = 0;
  Place deviated_toward = Place::Home;
  double penalty = 0.0;
};

enum class EventKind { Comply, Deviate, Intervened };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Comply: return "comply";
    case EventKind::Deviate: return "deviate";
    case EventKind::Intervened: return "intervened";
  }
  return "?";
}

struct AgentEvent {
  int step = 0;
  int agent = 0;
  EventKind kind = EventKind::Comply;
  Place place = Place::Home;
  BehaviorProfile profile;  // snapshot after the event
};

struct World {
  Layout layout;
  WatcherParams watcher;
  std::vector<SpatialAgent> agents;
  int step = 0;
  std::vector<InterventionEvent> interventions;
  std::vector<AgentEvent> events;
};

inline void validate(const World& w) {
  w.layout.validate();
  w.watcher.validate();
  for (std::size_t i = 0; i < w.agents.size(); ++i) {
    const auto& a = w.agents[i];
    qnorm::detail::require(a.id == static_cast<int>(i), "world: agent ids must be 0..n-1 in order");
    qnorm::detail::require(w.layout.contains(a.position), "world: agent position outside the grid");
    for (double v : {a.profile.compliance, a.profile.trust}) {
      qnorm::detail::require(v >= 0.0 && v <= 1.0, "world: agent traits must be in [0, 1]");
    }
  }
}

namespace detail {

// Moves min(speed, remaining) toward `to`; snaps exactly onto it on arrival.
inline Point step_toward(Point from, Point to, double speed) {
  const double d = distance(from, to);
  if (d <= speed) return to;
  const double f = speed / d;
  return {from.x + (to.x - from.x) * f, from.y + (to.y - from.y) * f};
}

template <BitSource S>
Place pick_deviation(Place scheduled, S& rng) {
  std::array<Place, 3> options{};
  std::size_t n = 0;
  for (auto p : {Place::Home, Place::Park, Place::Cafe}) {
    if (p != scheduled) options[n++] = p;
  }
  return options[static_cast<std::size_t>(uniform_below(rng, n))];
}

}  // namespace detail

template <BitSource S>
void tick(World& w, S& rng) {
  const int step = ++w.step;
  for (auto& a : w.agents) {
    const Place scheduled = a.schedule.at(step);
    if (a.mode == AgentMode::Scheduled) {
      a.target = scheduled;
      const double u = uniform01(rng);
      if (u < deviation_probability(a.profile, a.deviation_multiplier, w.watcher.base_rate)) {
        const Place toward = detail::pick_deviation(scheduled, rng);
        a.target = toward;
        a.mode = AgentMode::Deviating;
        w.events.push_back({step, a.id, EventKind::Deviate, toward, a.profile});
        if (bernoulli(rng, w.watcher.observe_prob)) {
          ++a.intervention_count;
          a.profile.compliance =
              std::max(0.0, a.initial_compliance - w.watcher.penalty * a.intervention_count);
          a.deviation_multiplier = std::pow(w.watcher.internalization, a.intervention_count);
          a.target = Place::School;
          a.mode = AgentMode::Redirected;
          w.interventions.push_back({step, a.id, toward, w.watcher.penalty});
          w.events.push_back({step, a.id, EventKind::Intervened, toward, a.profile});
        }
      }
    }

    const Point goal = w.layout.position(a.target);
    const bool was_there = a.position == goal;
    a.position = detail::step_toward(a.position, goal, w.layout.speed);
    if (a.position == goal) {
      if (a.mode == AgentMode::Scheduled && !was_there) {
        w.events.push_back({step, a.id, EventKind::Comply, a.target, a.profile});
      }
      a.mode = AgentMode::Scheduled;
    }
  }
}

struct FrameAgent {
  int id = 0;
  Point position;
  Place target = Place::Home;
  double compliance = 0.0;
  double trust = 0.0;
  bool redirected = false;
};

struct Frame {
  int step = 0;
  std::vector<FrameAgent> agents;
};

inline Frame snapshot(const World& w) {
  Frame f{w.step, {}};
  f.agents.reserve(w.agents.size());
  for (const auto& a : w.agents) {
    f.agents.push_back({a.id, a.position, a.target, a.profile.compliance, a.profile.trust, a.redirect_active()});
  }
  return f;
}

enum class ProfileMode { Uniform, Polarized };

inline std::string_view to_string(ProfileMode m) { return m == ProfileMode::Uniform ? "uniform" : "polarized"; }

// Polarized: the first round(n * low_fraction) agents draw both traits from
// [0, low_max], the rest from [high_min, 1].
struct PopulationSpec {
  ProfileMode mode = ProfileMode::Uniform;
  double low_fraction = 0.5;
  double low_max = 0.2;
  double high_min = 0.8;

  int low_count(int agents) const {
    return mode == ProfileMode::Polarized ? static_cast<int>(std::lround(agents * low_fraction)) : 0;
  }
};

struct SpatialConfig {
  int agents = 25;
  int steps = 300;
  Layout layout;
  WatcherParams watcher;
  PopulationSpec population;
  std::vector<Place> cycle{Place::Home, Place::Park, Place::Cafe};
  int segment = 50;
};

inline void validate(const SpatialConfig& c) {
  using qnorm::detail::require;
  require(c.agents >= 0, "exp4: agents must be >= 0");
  require(c.steps >= 0, "exp4: steps must be >= 0");
  require(c.segment >= 1, "exp4: schedule segment must be >= 1");
  require(!c.cycle.empty(), "exp4: schedule cycle must not be empty");
  c.layout.validate();
  c.watcher.validate();
  const auto& p = c.population;
  require(p.low_fraction >= 0.0 && p.low_fraction <= 1.0, "exp4: population low_fraction must be in [0, 1]");
  require(p.low_max >= 0.0 && p.low_max <= 1.0, "exp4: population low_max must be in [0, 1]");
  require(p.high_min >= 0.0 && p.high_min <= 1.0, "exp4: population high_min must be in [0, 1]");
}

template <BitSource S>
World make_world(const SpatialConfig& c, S& rng) {
  validate(c);
  World w{c.layout, c.watcher, {}, 0, {}, {}};
  const Schedule schedule = Schedule::cycle(c.cycle, c.segment, c.steps);
  const int low = c.population.low_count(c.agents);
  for (int i = 0; i < c.agents; ++i) {
    double lo = 0.0, hi = 1.0;
    if (c.population.mode == ProfileMode::Polarized) {
      if (i < low) {
        hi = c.population.low_max;
      } else {
        lo = c.population.high_min;
      }
    }
    SpatialAgent a;
    a.id = i;
    a.profile.compliance = uniform_real(rng, lo, hi);
    a.profile.trust = uniform_real(rng, lo, hi);
    a.initial_compliance = a.profile.compliance;
    a.schedule = schedule;
    a.target = schedule.at(0);
    a.position = c.layout.position(a.target);
    w.agents.push_back(std::move(a));
  }
  return w;
}

struct InterventionSummary {
  int agent = 0;
  int interventions = 0;
  double final_compliance = 0.0;
  double final_trust = 0.0;
};

struct SpatialResult {
  std::vector<Frame> frames;  // one per tick, steps 1..n
  World world;                // final state, including event logs
  std::vector<InterventionSummary> summary;
};

template <BitSource S>
SpatialResult run_world(World world, int steps, S& rng) {
  validate(world);
  qnorm::detail::require(steps >= 0, "exp4: steps must be >= 0");
  SpatialResult out;
  out.frames.reserve(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    tick(world, rng);
    out.frames.push_back(snapshot(world));
  }
  for (const auto& a : world.agents) {
    out.summary.push_back({a.id, a.intervention_count, a.profile.compliance, a.profile.trust});
  }
  out.world = std::move(world);
  return out;
}

template <BitSource S>
SpatialResult run_spatial(const SpatialConfig& config, S& rng) {
  World w = make_world(config, rng);
  return run_world(std::move(w), config.steps, rng);
}

}  // namespace qnorm::spatial
