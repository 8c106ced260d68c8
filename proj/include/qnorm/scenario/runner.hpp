#pragma once

// Experiment drivers. Every output is rendered in memory first, then written
// under <out>/<experiment>-<seed>-<timestamp>/, and manifest.json goes last.
// With runs > 1 (exp1-exp4) each replica writes into replica-NNN/ using the
// seed derive_seed(seed, r); a single run uses derive_seed(seed, 0).

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "qnorm/agents/dynamics.hpp"
#include "qnorm/metrics/entropy.hpp"
#include "qnorm/metrics/statistics.hpp"
#include "qnorm/parallel.hpp"
#include "qnorm/quantum/decay_protocol.hpp"
#include "qnorm/random_stream.hpp"
#include "qnorm/scenario/config.hpp"
#include "qnorm/scenario/format.hpp"
#include "qnorm/social/group_dynamics.hpp"
#include "qnorm/spatial/commentary.hpp"
#include "qnorm/spatial/remote_commentary.hpp"
#include "qnorm/spatial/world.hpp"

#ifndef QNORM_VERSION
#define QNORM_VERSION "0.0.0"
#endif

namespace qnorm::scenario {

inline constexpr std::string_view kEngineName = "qnorm";
inline constexpr std::string_view kEngineVersion = QNORM_VERSION;

struct OutputFile {
  std::string path;  // relative to the run directory, '/' separated
  std::string content;
};

using OutputSet = std::vector<OutputFile>;
using WarningSink = spatial::WarningSink;

// ---- renderers -------------------------------------------------------------

inline std::string render_group_counts(const social::GroupTrajectory& t) {
  CsvBuilder csv("step,group_a_conforming,group_a_breaking,group_b_conforming,group_b_breaking");
  for (const auto& s : t.steps) {
    csv.cell(s.step).cell(s.a.conforming).cell(s.a.breaking).cell(s.b.conforming).cell(s.b.breaking);
    csv.end_row();
  }
  return csv.str();
}

inline std::string render_final_states(const social::GroupTrajectory& t) {
  CsvBuilder csv("group,member,p_conforming,p_breaking");
  for (const auto* pop : {&t.final_a, &t.final_b}) {
    for (std::size_t i = 0; i < pop->members.size(); ++i) {
      csv.cell(std::string_view(&pop->group_tag, 1))
          .cell(static_cast<int>(i))
          .cell(pop->members[i].conforming())
          .cell(pop->members[i].breaking());
      csv.end_row();
    }
  }
  return csv.str();
}

inline std::string render_trajectory(const agents::TrajectoryRecord& r) {
  CsvBuilder csv("step,agent_id,role,compliance,trust,effective_discipline,target");
  for (std::size_t s = 0; s < r.compliance.size(); ++s) {
    for (std::size_t i = 0; i < r.roles.size(); ++i) {
      csv.cell(static_cast<int>(s))
          .cell(static_cast<int>(i))
          .cell(agents::to_string(r.roles[i]))
          .cell(r.compliance[s][i])
          .cell(r.trust[s][i])
          .cell(r.discipline_rate[s])
          .cell(r.target[s]);
      csv.end_row();
    }
  }
  return csv.str();
}

inline std::string render_entropy(const std::vector<metrics::EntropyRow>& rows) {
  CsvBuilder csv("step,pooled_entropy,entropy_complier,entropy_rebel,entropy_authority");
  for (const auto& row : rows) {
    csv.cell(row.step).cell(row.pooled);
    for (const auto& e : row.by_role) csv.cell(e);
    csv.end_row();
  }
  return csv.str();
}

inline std::string render_variance(const agents::TrajectoryRecord& r, metrics::Trait trait) {
  const auto& matrix = trait == metrics::Trait::Compliance ? r.compliance : r.trust;
  CsvBuilder csv("step,pooled_variance,variance_complier,variance_rebel,variance_authority");
  for (std::size_t s = 0; s < matrix.size(); ++s) {
    csv.cell(static_cast<int>(s)).cell(metrics::variance(matrix[s]));
    for (auto role : agents::kRoles) {
      const auto v = metrics::values_for_role(matrix[s], r.roles, role);
      csv.cell(v.empty() ? std::optional<double>{} : std::optional<double>{metrics::variance(v)});
    }
    csv.end_row();
  }
  return csv.str();
}

inline std::string render_shocks(const agents::TrajectoryRecord& r) {
  CsvBuilder csv("step,previous_target,new_target,effective_discipline");
  for (const auto& s : r.shocks) {
    csv.cell(s.step).cell(s.previous_target).cell(s.new_target).cell(s.discipline_rate);
    csv.end_row();
  }
  return csv.str();
}

inline std::string render_frames(const std::vector<spatial::Frame>& frames) {
  std::string out;
  for (const auto& f : frames) {
    out += "{\"step\":" + std::to_string(f.step) + ",\"agents\":[";
    for (std::size_t i = 0; i < f.agents.size(); ++i) {
      const auto& a = f.agents[i];
      if (i) out += ',';
      out += "{\"id\":" + std::to_string(a.id);
      out += ",\"x\":" + format_number(a.position.x);
      out += ",\"y\":" + format_number(a.position.y);
      out += ",\"target\":\"";
      out += spatial::to_string(a.target);
      out += "\",\"compliance\":" + format_number(a.compliance);
      out += ",\"trust\":" + format_number(a.trust);
      out += ",\"redirected\":";
      out += a.redirected ? "true" : "false";
      out += '}';
    }
    out += "]}\n";
  }
  return out;
}

inline std::string render_intervention_summary(const std::vector<spatial::InterventionSummary>& rows) {
  CsvBuilder csv("agent_id,interventions,final_compliance,final_trust");
  for (const auto& r : rows) {
    csv.cell(r.agent).cell(r.interventions).cell(r.final_compliance).cell(r.final_trust);
    csv.end_row();
  }
  return csv.str();
}

inline std::string render_intervention_events(const std::vector<spatial::InterventionEvent>& events) {
  CsvBuilder csv("step,agent_id,deviated_toward,penalty");
  for (const auto& e : events) {
    csv.cell(e.step).cell(e.agent).cell(spatial::to_string(e.deviated_toward)).cell(e.penalty);
    csv.end_row();
  }
  return csv.str();
}

inline std::string render_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

inline std::string render_correlations(const quantum::DecayResult& r) {
  CsvBuilder csv("step,qubit_i,qubit_j,mean_zz,std_error");
  for (std::size_t s = 0; s < r.mean.size(); ++s) {
    for (std::size_t p = 0; p < r.pairs.size(); ++p) {
      csv.cell(static_cast<int>(s)).cell(r.pairs[p].i).cell(r.pairs[p].j).cell(r.mean[s][p]).cell(r.std_error[s][p]);
      csv.end_row();
    }
  }
  return csv.str();
}

inline std::string render_protocol_events(const quantum::DecayResult& r) {
  CsvBuilder csv("replica,step,event,qubits");
  for (const auto& e : r.events) {
    std::string qubits;
    for (std::size_t k = 0; k < e.qubits.size(); ++k) {
      if (k) qubits += ' ';
      qubits += std::to_string(e.qubits[k]);
    }
    csv.cell(e.replica).cell(e.step).cell(quantum::to_string(e.kind)).cell(qubits);
    csv.end_row();
  }
  return csv.str();
}

// ---- config echo -----------------------------------------------------------

inline nlohmann::ordered_json config_echo(const ScenarioConfig& c) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["steps"] = c.steps;
  j["runs"] = c.runs;
  j["randomness"] = to_string(c.randomness);
  j["num_individuals"] = c.num_individuals;

  switch (c.experiment) {
    case Experiment::Exp1: {
      auto group = [](const social::GroupSettings& g) {
        return ordered_json{{"size", g.size}, {"bias", g.bias}, {"strength", g.strength}};
      };
      j["groups"] = {{"a", group(c.groups.group_a)},
                     {"b", group(c.groups.group_b)},
                     {"entanglement", c.groups.entanglement},
                     {"apply_norms", c.groups.apply_norms},
                     {"entangle", c.groups.entangle},
                     {"pairs", c.groups.pair_count()}};
      break;
    }
    case Experiment::Exp2:
    case Experiment::Exp3: {
      const auto& p = c.dynamics.params;
      ordered_json roles;
      for (auto r : agents::kRoles) {
        roles[std::string(agents::to_string(r))] = {{"discipline", p.multipliers(r).discipline},
                                                    {"noise", p.multipliers(r).noise}};
      }
      ordered_json schedule = ordered_json::array();
      for (const auto& s : c.dynamics.schedule.segments()) schedule.push_back({s.start_step, s.target});
      j["dynamics"] = {{"discipline_rate", p.discipline_rate},
                       {"punishment_rate", p.punishment_rate},
                       {"deviation_threshold", p.deviation_threshold},
                       {"peer_rate", p.peer_rate},
                       {"noise_amplitude", p.noise_amplitude},
                       {"fatigue_factor", p.fatigue_factor},
                       {"role_fractions", c.dynamics.role_fractions},
                       {"roles", roles},
                       {"schedule", schedule}};
      j["metrics"] = {{"bins", c.histogram.bins}, {"trait", to_string(c.entropy_trait)}};
      break;
    }
    case Experiment::Exp4: {
      const auto& s = c.spatial;
      ordered_json places;
      for (auto p : spatial::kPlaces) {
        places[std::string(spatial::to_string(p))] = {s.layout.position(p).x, s.layout.position(p).y};
      }
      ordered_json cycle = ordered_json::array();
      for (auto p : s.cycle) cycle.push_back(spatial::to_string(p));
      j["spatial"] = {{"width", s.layout.width},
                      {"height", s.layout.height},
                      {"speed", s.layout.speed},
                      {"places", places},
                      {"watcher", {s.layout.watcher.x, s.layout.watcher.y}},
                      {"kappa", s.watcher.base_rate},
                      {"observe_prob", s.watcher.observe_prob},
                      {"penalty", s.watcher.penalty},
                      {"internalization", s.watcher.internalization},
                      {"population", spatial::to_string(s.population.mode)},
                      {"low_fraction", s.population.low_fraction},
                      {"low_max", s.population.low_max},
                      {"high_min", s.population.high_min},
                      {"cycle", cycle},
                      {"segment", s.segment}};
      ordered_json schedule = ordered_json::array();
      const auto cycle_schedule = spatial::Schedule::cycle(s.cycle, s.segment, s.steps);
      for (const auto& e : cycle_schedule.entries()) {
        schedule.push_back({e.start_step, spatial::to_string(e.place)});
      }
      j["spatial"]["schedule"] = schedule;
      // The credential value is never echoed, only the variable name.
      j["commentary"] = {{"mode", c.commentary.remote ? "remote" : "stub"},
                         {"endpoint", c.commentary.endpoint.endpoint},
                         {"credential_env", c.commentary.endpoint.credential_env}};
      break;
    }
    case Experiment::It3:
    case Experiment::It4:
    case Experiment::It5: {
      ordered_json cross = ordered_json::array();
      for (const auto& [a, b] : quantum::resolved_cross_pairs(c.protocol)) cross.push_back({a, b});
      j["protocol"] = {{"group_sizes", c.protocol.group_sizes},
                       {"flip_period", c.protocol.flip_period},
                       {"cross_pairs", cross},
                       {"pairs", c.protocol.pairs == quantum::PairSelection::Adjacent ? "adjacent" : "all"},
                       {"record_events", c.protocol.record_events}};
      break;
    }
  }
  return j;
}

// ---- digests and manifest --------------------------------------------------

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw InvariantError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

inline std::string render_manifest(const ScenarioConfig& c, const OutputSet& files) {
  nlohmann::ordered_json m;
  m["engine"] = {{"name", kEngineName}, {"version", kEngineVersion}};
  m["experiment"] = to_string(c.experiment);
  m["seed"] = c.seed;
  m["randomness"] = {{"source", to_string(c.randomness)},
                     {"generator", kPseudoGeneratorName},
                     {"seed_derivation", kSeedDerivationName},
                     {"uniform_bits", kUniformBits}};
  m["config"] = config_echo(c);
  m["notes"] = c.notes;
  auto list = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    list.push_back({{"path", f.path}, {"bytes", f.content.size()}, {"sha256", sha256_hex(f.content)}});
  }
  m["files"] = list;
  return m.dump(2) + "\n";
}

// ---- drivers ---------------------------------------------------------------

struct ReplicaOutput {
  OutputSet files;
  std::vector<spatial::AgentEvent> events;  // exp4 commentary input
};

inline ReplicaOutput run_replica(const ScenarioConfig& c, int replica) {
  auto rng = make_random_stream(c.randomness, derive_seed(c.seed, static_cast<std::uint64_t>(replica)));
  ReplicaOutput out;
  switch (c.experiment) {
    case Experiment::Exp1: {
      const auto t = social::run_group_dynamics(c.groups, rng);
      out.files.push_back({"group_counts.csv", render_group_counts(t)});
      out.files.push_back({"final_states.csv", render_final_states(t)});
      break;
    }
    case Experiment::Exp2:
    case Experiment::Exp3: {
      const auto r = agents::run_dynamics(c.dynamics, rng);
      out.files.push_back({"trajectory.csv", render_trajectory(r)});
      out.files.push_back({"entropy.csv", render_entropy(metrics::entropy_series(r, c.histogram, c.entropy_trait))});
      out.files.push_back({"variance.csv", render_variance(r, c.entropy_trait)});
      out.files.push_back({"shocks.csv", render_shocks(r)});
      break;
    }
    case Experiment::Exp4: {
      auto r = spatial::run_spatial(c.spatial, rng);
      out.files.push_back({"frames.jsonl", render_frames(r.frames)});
      out.files.push_back({"interventions.csv", render_intervention_summary(r.summary)});
      out.files.push_back({"intervention_events.csv", render_intervention_events(r.world.interventions)});
      out.events = std::move(r.world.events);
      break;
    }
    default:
      throw InvariantError("run_replica: protocol experiments run as one ensemble");
  }
  return out;
}

inline std::string replica_prefix(const ScenarioConfig& c, int replica) {
  if (c.runs == 1) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "replica-%03d/", replica);
  return buf;
}

// Produces every output file in memory, in a fixed order.
inline OutputSet produce_outputs(const ScenarioConfig& c, const WarningSink& warn = {}) {
  OutputSet files;
  if (is_protocol(c.experiment)) {
    const auto r = quantum::run_decay_protocol(c.protocol);
    files.push_back({"correlations.csv", render_correlations(r)});
    files.push_back({"events.csv", render_protocol_events(r)});
    return files;
  }

  auto replicas = run_ensemble(
      static_cast<std::size_t>(c.runs), [&](std::size_t r) { return run_replica(c, static_cast<int>(r)); },
      c.workers);
  // Remote commentary runs here, after every replica has finished.
  for (std::size_t r = 0; r < replicas.size(); ++r) {
    const auto prefix = replica_prefix(c, static_cast<int>(r));
    for (auto& f : replicas[r].files) files.push_back({prefix + f.path, std::move(f.content)});
    if (c.experiment == Experiment::Exp4) {
      const auto lines = c.commentary.remote
                             ? spatial::remote_commentary(replicas[r].events, c.commentary.endpoint, warn)
                             : spatial::stub_commentary(replicas[r].events);
      files.push_back({prefix + "commentary.txt", render_lines(lines)});
    }
  }
  return files;
}

// ---- filesystem ------------------------------------------------------------

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// Creates <out>/<experiment>-<seed>-<timestamp>, adding -2, -3, ... if taken.
inline std::filesystem::path create_run_dir(const ScenarioConfig& c) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + c.out_dir.string() + ": " + ec.message());
  const std::string base = std::string(to_string(c.experiment)) + "-" + std::to_string(c.seed) + "-" + utc_timestamp();
  for (int k = 1;; ++k) {
    const fs::path dir = c.out_dir / (k == 1 ? base : base + "-" + std::to_string(k));
    if (fs::create_directory(dir, ec)) return dir;
    if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  }
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

struct RunReport {
  std::filesystem::path directory;
  OutputSet files;  // excludes manifest.json
};

inline constexpr std::string_view kManifestName = "manifest.json";

inline RunReport write_outputs(const ScenarioConfig& c, OutputSet files) {
  RunReport report{create_run_dir(c), std::move(files)};
  for (const auto& f : report.files) write_file(report.directory / f.path, f.content);
  write_file(report.directory / kManifestName, render_manifest(c, report.files));
  return report;
}

// Config must already be finalized; nothing is written if a run throws.
inline RunReport run_experiment(const ScenarioConfig& c, const WarningSink& warn = {}) {
  return write_outputs(c, produce_outputs(c, warn));
}

}  // namespace qnorm::scenario
