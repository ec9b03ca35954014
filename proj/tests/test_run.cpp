#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "coexist/config.hpp"
#include "coexist/run.hpp"

using namespace coexist;
namespace fs = std::filesystem;

namespace {

std::string read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_line(const fs::path& path) {
  const auto text = read(path);
  return text.substr(0, text.find('\n'));
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("coexist_test_run_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig load(const std::string& file) {
  return parse_config(read(fs::path(COEXIST_CONFIG_DIR) / file));
}

// Small two-species dumbbell at h = 0.05 for fast end-to-end runs.
RunConfig small_dumbbell(Mode mode) {
  auto cfg = load("dumbbell_check.toml");
  cfg.mode = mode;
  cfg.kappa_schedule = {10.0, 100.0};
  return cfg;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + COEXIST_CLI + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Naming, Tags) {
  EXPECT_EQ(number_tag(1000.0), "1000");
  EXPECT_EQ(number_tag(10000.0), "10000");
  EXPECT_EQ(number_tag(0.05), "0.05");
  EXPECT_EQ(fields_name(1e3), "fields_kappa_1000.csv");
  EXPECT_EQ(trace_name(10.0), "trace_kappa_10.csv");
  EXPECT_EQ(width_dir(0.2), "width_0.2");
}

TEST(Run, SquareSolveOracle) {
  auto cfg = load("square_solve.toml");
  cfg.output_dir = scratch("square").string();
  const auto out = run(cfg);
  EXPECT_EQ(out.exit_code, kExitOk) << out.message;
  EXPECT_NEAR(out.report["I_final"].get<double>(), -1.0 / 6.0, 1e-5);
  EXPECT_EQ(out.report["status"], "pass");
  EXPECT_TRUE(out.report["failure"].is_null());
  const fs::path dir = cfg.output_dir;
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_EQ(first_line(dir / "domain.csv"), "x,y,label");
  EXPECT_EQ(first_line(dir / "fields_kappa_1000.csv"), "x,y,label,u_1");
  EXPECT_EQ(first_line(dir / "trace_kappa_1000.csv"), "iter,I,residual,h1_core_distance");
}

TEST(Run, ReportSectionsAndSkips) {
  auto cfg = load("square_solve.toml");
  cfg.output_dir = scratch("sections").string();
  const auto out = run(cfg);
  const auto report = Json::parse(read(fs::path(cfg.output_dir) / "report.json"));
  for (const char* key : {"tool", "mode", "config", "assumptions", "domain", "stages", "continuation", "sweep",
                          "check", "hard_assertions", "status", "failure"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_EQ(report["continuation"]["status"], "skipped");
  EXPECT_EQ(report["sweep"]["status"], "skipped");
  EXPECT_EQ(report["check"]["status"], "skipped");
  EXPECT_EQ(report["mode"], "solve");
  EXPECT_FALSE(report["config"].contains("output_dir"));
  EXPECT_FALSE(report["config"].contains("workers"));
  ASSERT_EQ(report["stages"].size(), 1u);
  EXPECT_EQ(report["stages"][0]["fields_csv"], "fields_kappa_1000.csv");
  EXPECT_EQ(report, out.report);
}

TEST(Run, ContinuationArtifactsAndDeterminism) {
  auto a = small_dumbbell(Mode::Continuation);
  auto b = a;
  a.output_dir = scratch("cont_a").string();
  b.output_dir = scratch("cont_b").string();
  const auto ra = run(a);
  const auto rb = run(b);
  ASSERT_EQ(ra.exit_code, kExitOk) << ra.message;
  ASSERT_EQ(rb.exit_code, kExitOk) << rb.message;
  for (const char* f : {"report.json", "domain.csv", "fields_kappa_10.csv", "fields_kappa_100.csv",
                        "trace_kappa_10.csv", "trace_kappa_100.csv"}) {
    const auto pa = fs::path(a.output_dir) / f;
    ASSERT_TRUE(fs::exists(pa)) << f;
    EXPECT_EQ(read(pa), read(fs::path(b.output_dir) / f)) << f;
  }
  EXPECT_EQ(first_line(fs::path(a.output_dir) / "fields_kappa_10.csv"), "x,y,label,u_1,u_2");
  const auto& c = ra.report["continuation"];
  EXPECT_EQ(c["schedule"].size(), 2u);
  EXPECT_TRUE(c["energy_monotone"].get<bool>());
  EXPECT_TRUE(c["all_converged"].get<bool>());
}

TEST(Run, CheckMode) {
  auto cfg = load("dumbbell_check.toml");
  cfg.output_dir = scratch("check").string();
  const auto out = run(cfg);
  ASSERT_EQ(out.exit_code, kExitOk) << out.message;
  const auto& ck = out.report["check"];
  EXPECT_EQ(ck["gradient"]["states"], 20);
  EXPECT_TRUE(ck["gradient"]["ok"].get<bool>());
  EXPECT_EQ(ck["taylor"]["samples"], 50);
  EXPECT_EQ(ck["taylor"]["failures"], 0);
  EXPECT_TRUE(out.report["stages"].empty());
  EXPECT_FALSE(fs::exists(fs::path(cfg.output_dir) / "fields_kappa_10.csv"));
}

TEST(Run, SweepIndependentOfWorkers) {
  auto one = small_dumbbell(Mode::Sweep);
  one.sweep_widths = {0.2, 0.1};
  one.workers = 1;
  auto two = one;
  two.workers = 2;
  one.output_dir = scratch("sweep_1").string();
  two.output_dir = scratch("sweep_2").string();
  const auto r1 = run(one);
  const auto r2 = run(two);
  ASSERT_EQ(r1.exit_code, kExitOk) << r1.message;
  ASSERT_EQ(r2.exit_code, kExitOk) << r2.message;
  EXPECT_EQ(read(fs::path(one.output_dir) / "report.json"), read(fs::path(two.output_dir) / "report.json"));
  for (const char* w : {"width_0.2", "width_0.1"}) {
    const auto f = fs::path(w) / "fields_kappa_100.csv";
    ASSERT_TRUE(fs::exists(fs::path(one.output_dir) / f)) << f;
    EXPECT_EQ(read(fs::path(one.output_dir) / f), read(fs::path(two.output_dir) / f));
    EXPECT_TRUE(fs::exists(fs::path(one.output_dir) / w / "domain.csv"));
  }
  const auto& sw = r1.report["sweep"];
  EXPECT_EQ(sw["runs"].size(), 2u);
  EXPECT_EQ(sw["trend"]["width"], (std::vector<double>{0.2, 0.1}));
  EXPECT_TRUE(sw["strictly_decreasing"]["tau"].get<bool>());
}

TEST(Run, UnwritableOutputIsIoError) {
  const auto blocker = scratch("blocker");
  { std::ofstream(blocker) << "file"; }
  auto cfg = load("square_solve.toml");
  cfg.output_dir = (blocker / "sub").string();
  const auto out = run(cfg);
  EXPECT_EQ(out.exit_code, kExitIo);
  fs::remove(blocker);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("cli");
  const std::string cfg = std::string(COEXIST_CONFIG_DIR) + "/square_solve.toml";
  EXPECT_EQ(cli("solve --config \"" + cfg + "\" --output \"" + out.string() + "\""), 0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_EQ(cli("solve --config /nonexistent/coexist.toml"), 2);

  const auto bad = scratch("bad.toml");
  { std::ofstream(bad) << "kappa_schedule = [100.0, 10.0]\n"; }
  EXPECT_EQ(cli("solve --config \"" + bad.string() + "\""), 3);
  { std::ofstream(bad) << "mode = = 1\n"; }
  EXPECT_EQ(cli("solve --config \"" + bad.string() + "\""), 3);
  EXPECT_EQ(cli("solve"), 3);
  EXPECT_EQ(cli("sweep --config \"" + cfg + "\" --output \"" + out.string() + "\""), 3);
  fs::remove(bad);

  const auto blocker = scratch("cli_blocker");
  { std::ofstream(blocker) << "file"; }
  EXPECT_EQ(cli("solve --config \"" + cfg + "\" --output \"" + (blocker / "x").string() + "\""), 2);
  fs::remove(blocker);
}

TEST(Cli, SubcommandOverridesMode) {
  const auto out = scratch("cli_mode");
  const std::string cfg = std::string(COEXIST_CONFIG_DIR) + "/dumbbell_check.toml";
  ASSERT_EQ(cli("check --config \"" + cfg + "\" --output \"" + out.string() + "\""), 0);
  const auto report = Json::parse(read(out / "report.json"));
  EXPECT_EQ(report["mode"], "check");
  EXPECT_EQ(report["config"]["seed"], 2024);
}
