#pragma once

// Scenario configuration: per-experiment defaults, a TOML file with strict
// key checking, then command-line overrides. Every default is resolved
// before anything runs so the manifest can echo the complete config.

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "qnorm/agents/dynamics.hpp"
#include "qnorm/error.hpp"
#include "qnorm/metrics/entropy.hpp"
#include "qnorm/quantum/decay_protocol.hpp"
#include "qnorm/random_stream.hpp"
#include "qnorm/social/group_dynamics.hpp"
#include "qnorm/spatial/remote_commentary.hpp"
#include "qnorm/spatial/world.hpp"

namespace qnorm::scenario {

enum class Experiment { Exp1, Exp2, Exp3, Exp4, It3, It4, It5 };

inline constexpr std::array<Experiment, 7> kExperiments{Experiment::Exp1, Experiment::Exp2, Experiment::Exp3,
                                                        Experiment::Exp4, Experiment::It3,  Experiment::It4,
                                                        Experiment::It5};

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::Exp1: return "exp1";
    case Experiment::Exp2: return "exp2";
    case Experiment::Exp3: return "exp3";
    case Experiment::Exp4: return "exp4";
    case Experiment::It3: return "it3";
    case Experiment::It4: return "it4";
    case Experiment::It5: return "it5";
  }
  return "?";
}

inline Experiment parse_experiment(std::string_view s) {
  for (auto e : kExperiments) {
    if (to_string(e) == s) return e;
  }
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

inline bool is_protocol(Experiment e) {
  return e == Experiment::It3 || e == Experiment::It4 || e == Experiment::It5;
}

inline constexpr int kStepsShort = 30;
inline constexpr int kStepsMid = 300;
inline constexpr int kStepsLong = 3000;

inline int parse_steps(std::string_view s) {
  if (s == "short") return kStepsShort;
  if (s == "mid") return kStepsMid;
  if (s == "long") return kStepsLong;
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) {
    throw ConfigError("steps: expected an integer or one of short/mid/long, got '" + std::string(s) + "'");
  }
  if (v < 0) throw ConfigError("steps: must be >= 0");
  return v;
}

inline metrics::Trait parse_trait(std::string_view s) {
  if (s == "compliance") return metrics::Trait::Compliance;
  if (s == "trust") return metrics::Trait::Trust;
  throw ConfigError("metrics.trait: expected compliance or trust, got '" + std::string(s) + "'");
}

inline std::string_view to_string(metrics::Trait t) {
  return t == metrics::Trait::Compliance ? "compliance" : "trust";
}

struct CommentarySettings {
  bool remote = false;
  spatial::RemoteCommentaryConfig endpoint;
};

struct ScenarioConfig {
  Experiment experiment = Experiment::Exp2;
  std::uint64_t seed = 42;
  int steps = kStepsMid;
  int runs = 1;
  unsigned workers = 0;
  RandomnessSource randomness = RandomnessSource::Pseudo;
  std::filesystem::path out_dir = "runs";
  int num_individuals = 25;

  social::GroupDynamicsConfig groups;
  agents::DynamicsConfig dynamics;
  metrics::HistogramSpec histogram;
  metrics::Trait entropy_trait = metrics::Trait::Compliance;
  spatial::SpatialConfig spatial;
  quantum::DecayProtocolConfig protocol;
  CommentarySettings commentary;

  // Informational findings surfaced to stderr and the manifest.
  std::vector<std::string> notes;
};

// Unresolved values the finalizer needs to know were set explicitly.
struct ExplicitKeys {
  std::optional<int> group_a_size;
  std::optional<int> group_b_size;
  std::optional<int> flip_period;
};

inline ScenarioConfig defaults_for(Experiment e) {
  ScenarioConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::Exp1:
      c.steps = kStepsShort;
      break;
    case Experiment::Exp2:
      c.dynamics.params = agents::DynamicsParams::convergence_defaults();
      c.dynamics.schedule = agents::NormSchedule::constant(0.85);
      c.dynamics.role_fractions = {1.0, 0.0, 0.0};
      break;
    case Experiment::Exp3:
      c.dynamics.params = agents::DynamicsParams::role_shock_defaults();
      c.dynamics.schedule = agents::NormSchedule::shock_defaults();
      break;
    case Experiment::Exp4:
      break;
    case Experiment::It3:
      c.steps = kStepsShort;
      c.runs = 1000;
      c.protocol.group_sizes = {5};
      break;
    case Experiment::It4:
      c.steps = kStepsShort;
      c.runs = 1000;
      c.protocol.group_sizes = {5};
      c.protocol.flip_period = 3;
      break;
    case Experiment::It5:
      c.steps = kStepsShort;
      c.runs = 1000;
      c.protocol.group_sizes = {3, 3};
      c.protocol.flip_period = 5;
      break;
  }
  return c;
}

namespace detail {

// Reads keys from one TOML table and remembers which were consumed so the
// remainder can be reported as unknown.
class TableReader {
 public:
  TableReader(const toml::table& table, std::string path) : table_(table), path_(std::move(path)) {}

  std::string key_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const toml::node* take(std::string_view key) {
    used_.insert(std::string(key));
    return table_.get(key);
  }

  bool read(std::string_view key, double& out) {
    const auto* n = take(key);
    if (!n) return false;
    if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) {
      out = *v;
      return true;
    }
    throw ConfigError(key_path(key) + ": expected a number");
  }

  bool read(std::string_view key, double& out, double lo, double hi) {
    if (!read(key, out)) return false;
    if (!(out >= lo && out <= hi)) {
      throw ConfigError(key_path(key) + ": " + std::to_string(out) + " is outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    return true;
  }

  bool read(std::string_view key, std::int64_t& out) {
    const auto* n = take(key);
    if (!n) return false;
    if (!n->is_integer()) throw ConfigError(key_path(key) + ": expected an integer");
    out = *n->value<std::int64_t>();
    return true;
  }

  bool read(std::string_view key, int& out, int lo, int hi) {
    std::int64_t v = 0;
    if (!read(key, v)) return false;
    if (v < lo || v > hi) {
      throw ConfigError(key_path(key) + ": " + std::to_string(v) + " is outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    out = static_cast<int>(v);
    return true;
  }

  bool read(std::string_view key, bool& out) {
    const auto* n = take(key);
    if (!n) return false;
    if (!n->is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
    out = *n->value<bool>();
    return true;
  }

  bool read(std::string_view key, std::string& out) {
    const auto* n = take(key);
    if (!n) return false;
    if (!n->is_string()) throw ConfigError(key_path(key) + ": expected a string");
    out = *n->value<std::string>();
    return true;
  }

  const toml::array* array(std::string_view key) {
    const auto* n = take(key);
    if (!n) return nullptr;
    if (!n->is_array()) throw ConfigError(key_path(key) + ": expected an array");
    return n->as_array();
  }

  std::optional<TableReader> table(std::string_view key) {
    const auto* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_table()) throw ConfigError(key_path(key) + ": expected a table");
    return TableReader(*n->as_table(), key_path(key));
  }

  void finish() const {
    for (const auto& [k, v] : table_) {
      if (!used_.contains(std::string(k.str()))) throw ConfigError("unknown config key '" + key_path(k.str()) + "'");
    }
  }

 private:
  const toml::table& table_;
  std::string path_;
  std::set<std::string, std::less<>> used_;
};

inline double number_at(const toml::node& n, const std::string& where) {
  if (auto v = n.value<double>(); v && (n.is_floating_point() || n.is_integer())) return *v;
  throw ConfigError(where + ": expected a number");
}

inline std::int64_t integer_at(const toml::node& n, const std::string& where) {
  if (!n.is_integer()) throw ConfigError(where + ": expected an integer");
  return *n.value<std::int64_t>();
}

inline spatial::Point point_at(const toml::node& n, const std::string& where) {
  const auto* a = n.as_array();
  if (!a || a->size() != 2) throw ConfigError(where + ": expected [x, y]");
  return {number_at(*a->get(0), where), number_at(*a->get(1), where)};
}

inline void read_role(TableReader& roles, std::string_view name, agents::RoleMultipliers& m) {
  if (auto t = roles.table(name)) {
    t->read("discipline", m.discipline, 0.0, 1e9);
    t->read("noise", m.noise, 0.0, 1e9);
    t->finish();
  }
}

inline void read_groups(TableReader& t, ScenarioConfig& c, ExplicitKeys& x) {
  int size = 0;
  if (t.read("a_size", size, 1, 1 << 20)) x.group_a_size = size;
  if (t.read("b_size", size, 1, 1 << 20)) x.group_b_size = size;
  t.read("a_bias", c.groups.group_a.bias, 0.0, 1.0);
  t.read("b_bias", c.groups.group_b.bias, 0.0, 1.0);
  t.read("a_strength", c.groups.group_a.strength, 0.0, 1.0);
  t.read("b_strength", c.groups.group_b.strength, 0.0, 1.0);
  t.read("entanglement", c.groups.entanglement, 0.0, 1.0);
  t.read("apply_norms", c.groups.apply_norms);
  t.read("entangle", c.groups.entangle);
  t.finish();
}

inline void read_dynamics(TableReader& t, ScenarioConfig& c) {
  auto& p = c.dynamics.params;
  t.read("discipline_rate", p.discipline_rate, 0.0, 1.0);
  t.read("punishment_rate", p.punishment_rate, 0.0, 1.0);
  t.read("deviation_threshold", p.deviation_threshold, 0.0, 1.0);
  t.read("peer_rate", p.peer_rate, 0.0, 1.0);
  t.read("noise_amplitude", p.noise_amplitude, 0.0, 1.0);
  t.read("fatigue_factor", p.fatigue_factor, 0.0, 1.0);
  if (const auto* a = t.array("role_fractions")) {
    if (a->size() != 3) throw ConfigError(t.key_path("role_fractions") + ": expected [complier, rebel, authority]");
    for (std::size_t i = 0; i < 3; ++i) {
      c.dynamics.role_fractions[i] = number_at(*a->get(i), t.key_path("role_fractions"));
    }
  }
  if (auto roles = t.table("roles")) {
    for (auto r : agents::kRoles) read_role(*roles, agents::to_string(r), p.roles[agents::index_of(r)]);
    roles->finish();
  }
  if (const auto* a = t.array("schedule")) {
    std::vector<agents::NormSegment> segments;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const std::string where = t.key_path("schedule") + "[" + std::to_string(i) + "]";
      const auto* seg = a->get(i)->as_array();
      if (!seg || seg->size() != 2) throw ConfigError(where + ": expected [start_step, target]");
      segments.push_back({static_cast<int>(integer_at(*seg->get(0), where)), number_at(*seg->get(1), where)});
    }
    try {
      c.dynamics.schedule = agents::NormSchedule(std::move(segments));
    } catch (const ConfigError& e) {
      throw ConfigError(t.key_path("schedule") + ": " + e.what());
    }
  }
  t.finish();
}

inline void read_metrics(TableReader& t, ScenarioConfig& c) {
  t.read("bins", c.histogram.bins, 2, 1 << 20);
  std::string trait;
  if (t.read("trait", trait)) c.entropy_trait = parse_trait(trait);
  t.finish();
}

inline void read_spatial(TableReader& t, ScenarioConfig& c) {
  auto& s = c.spatial;
  t.read("width", s.layout.width, 1e-9, 1e9);
  t.read("height", s.layout.height, 1e-9, 1e9);
  t.read("speed", s.layout.speed, 1e-9, 1e9);
  t.read("kappa", s.watcher.base_rate, 0.0, 1e9);
  t.read("observe_prob", s.watcher.observe_prob, 0.0, 1.0);
  t.read("penalty", s.watcher.penalty, 0.0, 1.0);
  t.read("internalization", s.watcher.internalization, 0.0, 1.0);
  t.read("segment", s.segment, 1, 1 << 30);
  std::string population;
  if (t.read("population", population)) {
    if (population == "uniform") {
      s.population.mode = spatial::ProfileMode::Uniform;
    } else if (population == "polarized") {
      s.population.mode = spatial::ProfileMode::Polarized;
    } else {
      throw ConfigError(t.key_path("population") + ": expected uniform or polarized, got '" + population + "'");
    }
  }
  t.read("low_fraction", s.population.low_fraction, 0.0, 1.0);
  t.read("low_max", s.population.low_max, 0.0, 1.0);
  t.read("high_min", s.population.high_min, 0.0, 1.0);
  if (const auto* a = t.array("cycle")) {
    s.cycle.clear();
    for (std::size_t i = 0; i < a->size(); ++i) {
      const auto name = a->get(i)->value<std::string>();
      const auto place = name ? spatial::parse_place(*name) : std::nullopt;
      if (!place) throw ConfigError(t.key_path("cycle") + "[" + std::to_string(i) + "]: expected a place name");
      s.cycle.push_back(*place);
    }
  }
  if (const auto* n = t.take("watcher")) s.layout.watcher = point_at(*n, t.key_path("watcher"));
  if (auto places = t.table("places")) {
    for (auto p : spatial::kPlaces) {
      if (const auto* n = places->take(spatial::to_string(p))) {
        s.layout.places[static_cast<std::size_t>(p)] = point_at(*n, places->key_path(spatial::to_string(p)));
      }
    }
    places->finish();
  }
  t.finish();
}

inline void read_protocol(TableReader& t, ScenarioConfig& c, ExplicitKeys& x) {
  if (const auto* a = t.array("group_sizes")) {
    c.protocol.group_sizes.clear();
    for (std::size_t i = 0; i < a->size(); ++i) {
      c.protocol.group_sizes.push_back(static_cast<int>(integer_at(*a->get(i), t.key_path("group_sizes"))));
    }
  }
  int period = 0;
  if (t.read("flip_period", period, 1, 1 << 30)) x.flip_period = period;
  if (const auto* a = t.array("cross_pairs")) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const std::string where = t.key_path("cross_pairs") + "[" + std::to_string(i) + "]";
      const auto* p = a->get(i)->as_array();
      if (!p || p->size() != 2) throw ConfigError(where + ": expected [control, target]");
      pairs.emplace_back(static_cast<int>(integer_at(*p->get(0), where)),
                         static_cast<int>(integer_at(*p->get(1), where)));
    }
    c.protocol.cross_pairs = std::move(pairs);
  }
  std::string pairs;
  if (t.read("pairs", pairs)) {
    if (pairs == "adjacent") {
      c.protocol.pairs = quantum::PairSelection::Adjacent;
    } else if (pairs == "all") {
      c.protocol.pairs = quantum::PairSelection::All;
    } else {
      throw ConfigError(t.key_path("pairs") + ": expected adjacent or all, got '" + pairs + "'");
    }
  }
  t.read("record_events", c.protocol.record_events);
  t.finish();
}

inline void read_commentary(TableReader& t, ScenarioConfig& c) {
  std::string mode;
  if (t.read("mode", mode)) {
    if (mode != "stub" && mode != "remote") {
      throw ConfigError(t.key_path("mode") + ": expected stub or remote, got '" + mode + "'");
    }
    c.commentary.remote = mode == "remote";
  }
  t.read("endpoint", c.commentary.endpoint.endpoint);
  t.read("credential_env", c.commentary.endpoint.credential_env);
  t.read("timeout_seconds", c.commentary.endpoint.timeout_seconds, 1e-3, 3600.0);
  t.finish();
}

}  // namespace detail

// Applies a parsed TOML document on top of `c`.
inline void apply_toml(const toml::table& doc, ScenarioConfig& c, ExplicitKeys& x) {
  detail::TableReader t(doc, "");
  std::string s;
  if (t.read("experiment", s) && parse_experiment(s) != c.experiment) {
    throw ConfigError("experiment: config declares '" + s + "' but the command is '" +
                      std::string(to_string(c.experiment)) + "'");
  }
  std::int64_t seed = 0;
  if (t.read("seed", seed)) {
    if (seed < 0) throw ConfigError("seed: must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  if (const auto* n = t.take("steps")) {
    if (n->is_string()) {
      c.steps = parse_steps(*n->value<std::string>());
    } else if (n->is_integer() && *n->value<std::int64_t>() >= 0 && *n->value<std::int64_t>() <= (1 << 30)) {
      c.steps = static_cast<int>(*n->value<std::int64_t>());
    } else {
      throw ConfigError("steps: expected a non-negative integer or one of short/mid/long");
    }
  }
  t.read("runs", c.runs, 1, 1 << 30);
  int workers = 0;
  if (t.read("workers", workers, 0, 4096)) c.workers = static_cast<unsigned>(workers);
  if (t.read("randomness", s)) c.randomness = parse_randomness_source(s);
  if (t.read("out", s)) c.out_dir = s;
  t.read("num_individuals", c.num_individuals, 0, 1 << 20);
  t.read("initial_role_bias", c.groups.group_a.bias, 0.0, 1.0);
  t.read("strength", c.groups.group_a.strength, 0.0, 1.0);

  if (auto sub = t.table("groups")) detail::read_groups(*sub, c, x);
  if (auto sub = t.table("dynamics")) detail::read_dynamics(*sub, c);
  if (auto sub = t.table("metrics")) detail::read_metrics(*sub, c);
  if (auto sub = t.table("spatial")) detail::read_spatial(*sub, c);
  if (auto sub = t.table("protocol")) detail::read_protocol(*sub, c, x);
  if (auto sub = t.table("commentary")) detail::read_commentary(*sub, c);
  t.finish();
}

inline toml::table load_toml(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  try {
    return toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    std::string msg = "config " + path.string() + ": " + std::string(e.description());
    if (e.source().begin) msg += " (line " + std::to_string(e.source().begin.line) + ")";
    throw ConfigError(msg);
  }
}

// Flag overrides; unset fields leave the file/default value in place.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> steps;
  std::optional<int> runs;
  std::optional<unsigned> workers;
  std::optional<std::string> randomness;
  std::optional<std::filesystem::path> out_dir;
};

inline void apply_overrides(const Overrides& o, ScenarioConfig& c) {
  if (o.seed) c.seed = *o.seed;
  if (o.steps) c.steps = parse_steps(*o.steps);
  if (o.runs) {
    if (*o.runs < 1) throw ConfigError("runs: must be >= 1");
    c.runs = *o.runs;
  }
  if (o.workers) c.workers = *o.workers;
  if (o.randomness) c.randomness = parse_randomness_source(*o.randomness);
  if (o.out_dir) c.out_dir = *o.out_dir;
}

inline constexpr double kStudiedStrengthLow = 0.5;
inline constexpr double kStudiedStrengthHigh = 1.0;

// Propagates shared fields into the module configs and validates everything.
inline void finalize(ScenarioConfig& c, const ExplicitKeys& x) {
  using qnorm::detail::require;
  require(c.steps >= 0, "steps: must be >= 0");
  require(c.runs >= 1, "runs: must be >= 1");
  require(c.num_individuals >= 0, "num_individuals: must be >= 0");

  const int n = c.num_individuals;
  c.groups.group_a.size = x.group_a_size.value_or((n + 1) / 2);
  c.groups.group_b.size = x.group_b_size.value_or(n / 2);
  c.groups.steps = c.steps;
  c.dynamics.agents = n;
  c.dynamics.steps = c.steps;
  c.spatial.agents = n;
  c.spatial.steps = c.steps;
  c.protocol.steps = c.steps;
  c.protocol.runs = c.runs;
  c.protocol.seed = c.seed;
  c.protocol.randomness = c.randomness;
  c.protocol.workers = c.workers;
  if (x.flip_period) {
    c.protocol.flip_period = *x.flip_period;
  } else if (c.experiment == Experiment::It3) {
    c.protocol.flip_period = c.steps + 1;  // no flips
  }

  c.notes.clear();
  switch (c.experiment) {
    case Experiment::Exp1:
      social::validate(c.groups);
      for (const auto& [tag, g] : {std::pair{'A', c.groups.group_a}, std::pair{'B', c.groups.group_b}}) {
        if (g.strength < kStudiedStrengthLow || g.strength > kStudiedStrengthHigh) {
          c.notes.push_back(std::string("group ") + tag + " strength " + std::to_string(g.strength) +
                            " lies outside the studied band [0.5, 1.0]");
        }
      }
      break;
    case Experiment::Exp2:
    case Experiment::Exp3:
      agents::validate(c.dynamics);
      c.histogram.validate();
      break;
    case Experiment::Exp4:
      spatial::validate(c.spatial);
      if (c.commentary.remote) {
        require(!c.commentary.endpoint.endpoint.empty(), "commentary.endpoint: required when commentary.mode = remote");
        require(spatial::split_url(c.commentary.endpoint.endpoint).has_value(),
                "commentary.endpoint: expected an http:// or https:// URL");
      }
      break;
    case Experiment::It3:
    case Experiment::It4:
    case Experiment::It5:
      quantum::validate(c.protocol);
      break;
  }
}

// defaults -> optional config file -> flags -> finalize.
inline ScenarioConfig parse_config(Experiment e, const std::optional<std::filesystem::path>& path,
                                   const Overrides& overrides = {}) {
  ScenarioConfig c = defaults_for(e);
  ExplicitKeys x;
  if (path) apply_toml(load_toml(*path), c, x);
  apply_overrides(overrides, c);
  finalize(c, x);
  return c;
}

inline ScenarioConfig parse_config_string(Experiment e, std::string_view toml_text, const Overrides& overrides = {}) {
  ScenarioConfig c = defaults_for(e);
  ExplicitKeys x;
  try {
    apply_toml(toml::parse(toml_text), c, x);
  } catch (const toml::parse_error& err) {
    throw ConfigError("config: " + std::string(err.description()));
  }
  apply_overrides(overrides, c);
  finalize(c, x);
  return c;
}

}  // namespace qnorm::scenario
