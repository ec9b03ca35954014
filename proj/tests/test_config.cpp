#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coexist/config.hpp"
#include "coexist/toml_lite.hpp"

using namespace coexist;

namespace {

const char* kMinimal = R"(
mode = "solve"
[domain]
[[domain.cores]]
x = 0.0
y = 0.0
width = 1.0
height = 1.0
[[species]]
lambda = 2.0
p = 2.0
)";

ConfigErrc code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ConfigErrc::Syntax;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Toml, ScalarsArraysTables) {
  const auto doc = toml::parse(R"(
a = 1
b = -2.5e3
c = "x\ty"
d = 'raw\n'
e = [1, 2.0,
     3]   # trailing comment
f = true
g = 1_000
h = { p = 1, q = "z" }
[t.u]
v = inf
[[arr]]
k = 1
[[arr]]
k = 2
)");
  const auto& r = doc.root;
  EXPECT_EQ(r["a"].get<long long>(), 1);
  EXPECT_DOUBLE_EQ(r["b"].get<double>(), -2500.0);
  EXPECT_EQ(r["c"].get<std::string>(), "x\ty");
  EXPECT_EQ(r["d"].get<std::string>(), "raw\\n");
  EXPECT_EQ(r["e"].size(), 3u);
  EXPECT_TRUE(r["f"].get<bool>());
  EXPECT_EQ(r["g"].get<long long>(), 1000);
  EXPECT_EQ(r["h"]["q"], "z");
  EXPECT_TRUE(std::isinf(r["t"]["u"]["v"].get<double>()));
  EXPECT_EQ(r["arr"].size(), 2u);
  EXPECT_EQ(r["arr"][1]["k"].get<long long>(), 2);
  EXPECT_EQ(doc.position_of("arr[1].k").line, 16);
  EXPECT_EQ(doc.position_of("b").line, 3);
}

TEST(Toml, SyntaxErrorsCarryPosition) {
  try {
    toml::parse("a = 1\nb = = 2\n");
    FAIL();
  } catch (const toml::SyntaxError& e) {
    EXPECT_EQ(e.position().line, 2);
    EXPECT_EQ(e.position().column, 5);
  }
  EXPECT_THROW(toml::parse("a = 1\na = 2\n"), toml::SyntaxError);
  EXPECT_THROW(toml::parse("[x]\n[x]\n"), toml::SyntaxError);
  EXPECT_THROW(toml::parse("a = \"open\n"), toml::SyntaxError);
  EXPECT_THROW(toml::parse("a = 1 2\n"), toml::SyntaxError);
  EXPECT_THROW(toml::parse("a = 1__0\n"), toml::SyntaxError);
  EXPECT_THROW(toml::parse("a = [1, 2\n"), toml::SyntaxError);
}

TEST(Config, MinimalDefaults) {
  const auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.mode, Mode::Solve);
  EXPECT_DOUBLE_EQ(cfg.domain.h, 0.025);
  EXPECT_DOUBLE_EQ(cfg.solver.tol, 1e-8);
  EXPECT_EQ(cfg.solver.max_iter, 200000);
  EXPECT_DOUBLE_EQ(cfg.solver.initial_step, 1e-2);
  EXPECT_DOUBLE_EQ(cfg.solver.armijo, 1e-4);
  EXPECT_DOUBLE_EQ(cfg.solver.backtrack, 0.5);
  EXPECT_TRUE(cfg.solver.clamp);
  ASSERT_EQ(cfg.kappa_schedule.size(), 1u);
  EXPECT_DOUBLE_EQ(cfg.kappa_schedule[0], 1e3);
  EXPECT_EQ(cfg.species.size(), 1u);
  EXPECT_EQ(cfg.workers, 1);
  EXPECT_TRUE(cfg.sweep_widths.empty());
}

TEST(Config, SpeciesCoreMismatch) {
  const std::string text = std::string(kMinimal) + "[[species]]\nlambda = 2.0\np = 2.0\n";
  EXPECT_EQ(code_of(text), ConfigErrc::Invariant);
  EXPECT_NE(message_of(text).find("species/core mismatch"), std::string::npos);
}

TEST(Config, ScheduleNotIncreasing) {
  const std::string text = "kappa_schedule = [100.0, 10.0]\n" + std::string(kMinimal);
  EXPECT_EQ(code_of(text), ConfigErrc::Invariant);
  EXPECT_NE(message_of(text).find("schedule not increasing"), std::string::npos);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_EQ(code_of("colour = 1\n" + std::string(kMinimal)), ConfigErrc::UnknownKey);
  EXPECT_EQ(code_of(std::string(kMinimal) + "[solver]\nstep_rule = \"bb\"\n"), ConfigErrc::UnknownKey);
  const auto msg = message_of(std::string(kMinimal) + "[solver]\nstep_rule = \"bb\"\n");
  EXPECT_NE(msg.find("solver.step_rule"), std::string::npos);
  EXPECT_NE(msg.find("line 13"), std::string::npos);
}

TEST(Config, DistinctErrorCodes) {
  EXPECT_EQ(code_of("mode = \n"), ConfigErrc::Syntax);
  EXPECT_EQ(code_of("[[species]]\nlambda = 2.0\np = 2.0\n"), ConfigErrc::MissingSection);
  EXPECT_EQ(code_of("kappa_schedule = \"fast\"\n" + std::string(kMinimal)), ConfigErrc::TypeMismatch);
  EXPECT_EQ(code_of("workers = 1.5\n" + std::string(kMinimal)), ConfigErrc::TypeMismatch);
  std::string dance = kMinimal;
  dance.replace(dance.find("\"solve\""), 7, "\"dance\"");
  EXPECT_EQ(code_of(dance), ConfigErrc::Invariant);
  EXPECT_EQ(code_of(std::string(kMinimal) + "[solver]\ntol = -1.0\n"), ConfigErrc::Invariant);
}

TEST(Config, SpeciesParameterRange) {
  std::string text = kMinimal;
  text.replace(text.find("lambda = 2.0"), 12, "lambda = 0.5");
  EXPECT_EQ(code_of(text), ConfigErrc::Invariant);
}

TEST(Config, InvalidDomainRejected) {
  const char* text = R"(
[domain]
cores = [{ x = 0.0, y = 0.0, width = 1.0, height = 1.0 }, { x = 2.0, y = 0.0, width = 1.0, height = 1.0 }]
[[species]]
lambda = 2.0
p = 2.0
[[species]]
lambda = 2.0
p = 2.0
)";
  EXPECT_EQ(code_of(text), ConfigErrc::Invariant);
  EXPECT_NE(message_of(text).find("not connected"), std::string::npos);
}

TEST(Config, SweepNeedsWidths) {
  std::string text = kMinimal;
  text.replace(text.find("\"solve\""), 7, "\"sweep\"");
  EXPECT_EQ(code_of(text), ConfigErrc::MissingSection);
}

TEST(Config, ShippedConfigsParse) {
  const std::string dir = COEXIST_CONFIG_DIR;
  const auto cont = parse_config(read(dir + "/dumbbell_continuation.toml"));
  EXPECT_EQ(cont.mode, Mode::Continuation);
  EXPECT_EQ(cont.kappa_schedule, (std::vector<double>{1, 10, 100, 1000, 10000}));
  EXPECT_EQ(cont.domain.cores.size(), 2u);
  EXPECT_EQ(cont.domain.channels.size(), 1u);
  const auto sq = parse_config(read(dir + "/square_solve.toml"));
  EXPECT_EQ(sq.mode, Mode::Solve);
  const auto sw = parse_config(read(dir + "/dumbbell_sweep.toml"));
  EXPECT_EQ(sw.sweep_widths, (std::vector<double>{0.2, 0.1, 0.05}));
  EXPECT_EQ(sw.workers, 3);
  const auto ck = parse_config(read(dir + "/dumbbell_check.toml"));
  EXPECT_EQ(ck.seed, 2024u);
}
