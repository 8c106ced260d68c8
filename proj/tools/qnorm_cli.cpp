#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qnorm/scenario/config.hpp"
#include "qnorm/scenario/runner.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kRuntimeError = 2, kIoError = 3 };

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> steps;
  std::optional<int> runs;
  std::optional<unsigned> workers;
  std::optional<std::string> randomness;
  std::optional<std::string> out;
};

const char* describe(qnorm::scenario::Experiment e) {
  using qnorm::scenario::Experiment;
  switch (e) {
    case Experiment::Exp1: return "paired groups under norm operators with pairwise entanglement";
    case Experiment::Exp2: return "entropy decline under discipline and peer influence";
    case Experiment::Exp3: return "roles, norm shocks and discipline fatigue";
    case Experiment::Exp4: return "scheduled agents under an omnipresent Watcher";
    case Experiment::It3: return "GHZ correlations without perturbation";
    case Experiment::It4: return "GHZ correlation decay under periodic random flips";
    case Experiment::It5: return "two GHZ groups joined by cross-group CNOTs";
  }
  return "";
}

int run(qnorm::scenario::Experiment e, const Flags& f) {
  namespace sc = qnorm::scenario;
  sc::ScenarioConfig config;
  try {
    sc::Overrides o;
    o.seed = f.seed;
    o.steps = f.steps;
    o.runs = f.runs;
    o.workers = f.workers;
    o.randomness = f.randomness;
    if (f.out) o.out_dir = *f.out;
    std::optional<std::filesystem::path> path;
    if (!f.config.empty()) path = f.config;
    config = sc::parse_config(e, path, o);
  } catch (const qnorm::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kConfigError;
  }
  for (const auto& note : config.notes) std::cerr << "note: " << note << "\n";

  try {
    const auto report =
        sc::run_experiment(config, [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; });
    std::cout << report.directory.string() << "\n";
    return kOk;
  } catch (const qnorm::IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kIoError;
  } catch (const qnorm::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kConfigError;
  } catch (const std::exception& err) {
    std::cerr << "runtime error: " << err.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-inspired social norm simulations"};
  app.set_version_flag("--version", std::string(qnorm::scenario::kEngineVersion));
  app.require_subcommand(1);

  Flags flags;
  std::optional<qnorm::scenario::Experiment> chosen;
  for (auto e : qnorm::scenario::kExperiments) {
    auto* sub = app.add_subcommand(std::string(qnorm::scenario::to_string(e)), describe(e));
    sub->add_option("--config", flags.config, "TOML scenario file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--steps", flags.steps, "step count or preset (short=30, mid=300, long=3000)");
    sub->add_option("--runs", flags.runs, "replicas (ensemble size for it3-it5)");
    sub->add_option("--randomness", flags.randomness, "pseudo or quantum-sim")
        ->check(CLI::IsMember({"pseudo", "quantum-sim", "quantum_sim"}));
    sub->add_option("--out", flags.out, "output root directory");
    sub->add_option("--workers", flags.workers, "worker threads (0 = hardware concurrency)");
    sub->callback([&chosen, e] { chosen = e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kConfigError;
  }
  return run(*chosen, flags);
}
