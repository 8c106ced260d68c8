#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnorm/scenario/config.hpp"
#include "qnorm/scenario/format.hpp"
#include "qnorm/scenario/runner.hpp"

namespace sc = qnorm::scenario;
namespace fs = std::filesystem;
using sc::Experiment;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qnorm-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(Experiment e, const std::string& toml) {
  try {
    sc::parse_config_string(e, toml);
  } catch (const qnorm::ConfigError& err) {
    return err.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QNORM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string cell; std::getline(s, cell, sep);) out.push_back(cell);
  return out;
}

}  // namespace

TEST(ParseSteps, Presets) {
  EXPECT_EQ(sc::parse_steps("short"), 30);
  EXPECT_EQ(sc::parse_steps("mid"), 300);
  EXPECT_EQ(sc::parse_steps("long"), 3000);
  EXPECT_EQ(sc::parse_steps("42"), 42);
  EXPECT_THROW(sc::parse_steps("medium"), qnorm::ConfigError);
  EXPECT_THROW(sc::parse_steps("-1"), qnorm::ConfigError);
}

TEST(ParseConfig, MinimalExp2ResolvesDefaults) {
  const auto c = sc::parse_config_string(Experiment::Exp2, "");
  EXPECT_EQ(c.histogram.bins, 10);
  EXPECT_EQ(c.steps, 300);
  EXPECT_EQ(c.seed, 42U);
  EXPECT_EQ(c.dynamics.agents, 25);
  EXPECT_EQ(c.dynamics.steps, 300);
  EXPECT_EQ(c.dynamics.params.discipline_rate, qnorm::agents::DynamicsParams::convergence_defaults().discipline_rate);
  EXPECT_TRUE(c.notes.empty());
}

TEST(ParseConfig, MidPresetInFile) {
  EXPECT_EQ(sc::parse_config_string(Experiment::Exp1, "steps = \"mid\"").steps, 300);
}

TEST(ParseConfig, StrengthOutOfRangeNamesKey) {
  const auto msg = error_of(Experiment::Exp1, "strength = 1.2");
  EXPECT_NE(msg.find("strength"), std::string::npos) << msg;
  const auto nested = error_of(Experiment::Exp1, "[groups]\nb_strength = -0.1");
  EXPECT_NE(nested.find("groups.b_strength"), std::string::npos) << nested;
}

TEST(ParseConfig, UnknownKeyNamed) {
  const auto msg = error_of(Experiment::Exp3, "[dynamics]\ndiscipline = 0.1");
  EXPECT_NE(msg.find("dynamics.discipline"), std::string::npos) << msg;
  EXPECT_NE(error_of(Experiment::Exp2, "colour = 3").find("colour"), std::string::npos);
}

TEST(ParseConfig, ExperimentMismatch) {
  EXPECT_NE(error_of(Experiment::Exp2, "experiment = \"exp3\"").find("exp3"), std::string::npos);
  EXPECT_NO_THROW(sc::parse_config_string(Experiment::Exp3, "experiment = \"exp3\""));
}

TEST(ParseConfig, SyntaxError) { EXPECT_FALSE(error_of(Experiment::Exp2, "steps = = 3").empty()); }

TEST(ParseConfig, StrengthOutsideStudiedBandIsNoted) {
  const auto c = sc::parse_config_string(Experiment::Exp1, "strength = 0.3");
  ASSERT_EQ(c.notes.size(), 1U);
  EXPECT_NE(c.notes[0].find("group A"), std::string::npos);
  EXPECT_EQ(c.groups.group_a.strength, 0.3);
}

TEST(ParseConfig, GroupSplit) {
  const auto c = sc::parse_config_string(Experiment::Exp1, "num_individuals = 25");
  EXPECT_EQ(c.groups.group_a.size, 13);
  EXPECT_EQ(c.groups.group_b.size, 12);
}

TEST(ParseConfig, FlagsWin) {
  sc::Overrides o;
  o.seed = 9;
  o.steps = "short";
  const auto c = sc::parse_config_string(Experiment::Exp2, "seed = 3\nsteps = 100", o);
  EXPECT_EQ(c.seed, 9U);
  EXPECT_EQ(c.steps, 30);
}

TEST(ParseConfig, ProtocolDefaults) {
  const auto it3 = sc::parse_config_string(Experiment::It3, "");
  EXPECT_GT(it3.protocol.flip_period, it3.steps);
  const auto it4 = sc::parse_config_string(Experiment::It4, "");
  EXPECT_EQ(it4.protocol.group_sizes, std::vector<int>{5});
  EXPECT_EQ(it4.protocol.flip_period, 3);
  const auto it5 = sc::parse_config_string(Experiment::It5, "");
  EXPECT_EQ(it5.protocol.group_sizes, (std::vector<int>{3, 3}));
  EXPECT_EQ(it5.protocol.flip_period, 5);
}

TEST(ParseConfig, RemoteCommentaryNeedsEndpoint) {
  EXPECT_FALSE(error_of(Experiment::Exp4, "[commentary]\nmode = \"remote\"").empty());
  EXPECT_NO_THROW(sc::parse_config_string(Experiment::Exp4,
                                          "[commentary]\nmode = \"remote\"\nendpoint = \"http://127.0.0.1:9/x\""));
}

TEST(Format, Numbers) {
  EXPECT_EQ(sc::format_number(0.0), "0");
  EXPECT_EQ(sc::format_number(-0.0), "0");
  EXPECT_EQ(sc::format_number(0.1), "0.1");
  EXPECT_EQ(sc::format_number(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(std::stod(sc::format_number(0.7745966692414834)), 0.7745966692414834);
}

TEST(Manifest, DigestsMatchBytes) {
  auto c = sc::parse_config_string(Experiment::Exp4, "steps = 40");
  c.out_dir = fresh_dir("manifest");
  const auto report = sc::run_experiment(c);
  const auto manifest = nlohmann::json::parse(read_file(report.directory / "manifest.json"));
  EXPECT_EQ(manifest["experiment"], "exp4");
  EXPECT_EQ(manifest["seed"], 42);
  const auto& files = manifest["files"];
  ASSERT_EQ(files.size(), 4U);
  for (const auto& f : files) {
    const auto bytes = read_file(report.directory / f["path"].get<std::string>());
    EXPECT_EQ(f["bytes"].get<std::size_t>(), bytes.size());
    EXPECT_EQ(f["sha256"].get<std::string>(), sc::sha256_hex(bytes));
  }
  fs::remove_all(c.out_dir);
}

TEST(Manifest, Sha256Reference) {
  EXPECT_EQ(sc::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, CredentialValueNeverWritten) {
  ::setenv("QNORM_TEST_SECRET", "do-not-leak-7731", 1);
  auto c = sc::parse_config_string(
      Experiment::Exp4,
      "steps = 5\n[commentary]\nmode = \"remote\"\nendpoint = \"http://127.0.0.1:9/x\"\ncredential_env = "
      "\"QNORM_TEST_SECRET\"\ntimeout_seconds = 1");
  c.out_dir = fresh_dir("secret");
  const auto report = sc::run_experiment(c, [](const std::string&) {});
  const auto text = read_file(report.directory / "manifest.json");
  EXPECT_NE(text.find("QNORM_TEST_SECRET"), std::string::npos);
  EXPECT_EQ(text.find("do-not-leak-7731"), std::string::npos);
  ::unsetenv("QNORM_TEST_SECRET");
  fs::remove_all(c.out_dir);
}

TEST(RunExperiment, ReplayIsByteIdentical) {
  for (auto e : {Experiment::Exp1, Experiment::Exp2, Experiment::Exp4, Experiment::It5}) {
    auto c = sc::parse_config_string(e, "steps = 40\nruns = 3");
    c.out_dir = fresh_dir("replay");
    const auto a = sc::run_experiment(c);
    c.workers = 1;
    const auto b = sc::run_experiment(c);
    EXPECT_NE(a.directory, b.directory);
    EXPECT_EQ(read_file(a.directory / "manifest.json"), read_file(b.directory / "manifest.json"))
        << sc::to_string(e);
    fs::remove_all(c.out_dir);
  }
}

TEST(RunExperiment, ReplicaLayout) {
  auto c = sc::parse_config_string(Experiment::Exp2, "steps = 10\nruns = 2");
  const auto files = sc::produce_outputs(c);
  ASSERT_EQ(files.size(), 8U);
  EXPECT_EQ(files[0].path, "replica-000/trajectory.csv");
  EXPECT_EQ(files[4].path, "replica-001/trajectory.csv");
  EXPECT_NE(files[0].content, files[4].content);
}

TEST(RunExperiment, Exp2OutputShape) {
  const auto c = sc::parse_config_string(Experiment::Exp2, "steps = 10");
  const auto files = sc::produce_outputs(c);
  std::map<std::string, std::string> by_path;
  for (const auto& f : files) by_path[f.path] = f.content;
  const auto& entropy = by_path.at("entropy.csv");
  EXPECT_EQ(std::count(entropy.begin(), entropy.end(), '\n'), 12);
  const auto& traj = by_path.at("trajectory.csv");
  EXPECT_EQ(std::count(traj.begin(), traj.end(), '\n'), 1 + 11 * 25);
}

TEST(Cli, ExitCodes) {
  const auto out = fresh_dir("cli");
  EXPECT_EQ(run_cli("exp2 --steps 5 --out " + out.string()), 0);
  EXPECT_EQ(run_cli("exp2 --steps bogus --out " + out.string()), 1);
  EXPECT_EQ(run_cli("exp9"), 1);
  EXPECT_EQ(run_cli("exp2 --config /nonexistent/qnorm.toml"), 1);
  EXPECT_EQ(run_cli("exp2 --runs 0"), 1);
  fs::create_directories(out);
  const auto blocker = out / "file";
  std::ofstream(blocker) << "x";
  EXPECT_EQ(run_cli("exp2 --steps 5 --out " + blocker.string()), 3);
  fs::remove_all(out);
}

TEST(Cli, ValidationBeforeEffect) {
  const auto out = fresh_dir("nofx");
  const auto cfg = fs::temp_directory_path() / ("qnorm-bad-" + std::to_string(::getpid()) + ".toml");
  std::ofstream(cfg) << "strength = 1.2\n";
  EXPECT_EQ(run_cli("exp1 --config " + cfg.string() + " --out " + out.string()), 1);
  EXPECT_FALSE(fs::exists(out));
  fs::remove(cfg);
}

TEST(Cli, It4DecayMatchesLaw) {
  const auto out = fresh_dir("it4");
  const auto cfg = fs::temp_directory_path() / ("qnorm-it4-" + std::to_string(::getpid()) + ".toml");
  std::ofstream(cfg) << "steps = 4\nruns = 10000\nseed = 5\n[protocol]\nflip_period = 1\nrecord_events = false\n";
  ASSERT_EQ(run_cli("it4 --config " + cfg.string() + " --out " + out.string()), 0);
  fs::path dir;
  for (const auto& entry : fs::directory_iterator(out)) dir = entry.path();
  std::ifstream csv(dir / "correlations.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "step,qubit_i,qubit_j,mean_zz,std_error");
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto cells = split(line, ',');
    ASSERT_EQ(cells.size(), 5U);
    const int m = std::stoi(cells[0]);
    const double want = std::pow(1.0 - 4.0 / 5.0, m);
    const double sigma = std::sqrt((1.0 - want * want) / 10000.0);
    EXPECT_NEAR(std::stod(cells[3]), want, 3.0 * sigma + 1e-12) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 5 * 4);
  fs::remove_all(out);
  fs::remove(cfg);
}
