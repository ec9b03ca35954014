// coexist solve|continuation|sweep|check --config <path> [--output <dir>] [--workers N]
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "coexist/config.hpp"
#include "coexist/run.hpp"

namespace {

struct Args {
  std::string config;
  std::string output;
  int workers = 0;
};

int execute(coexist::Mode mode, const Args& args) {
  std::ifstream in(args.config, std::ios::binary);
  if (!in) {
    std::cerr << "coexist: cannot read config '" << args.config << "'\n";
    return coexist::kExitIo;
  }
  std::ostringstream text;
  text << in.rdbuf();

  coexist::RunConfig cfg;
  try {
    cfg = coexist::parse_config(text.str());
  } catch (const coexist::ConfigError& e) {
    std::cerr << "coexist: " << args.config << ": " << e.what() << '\n';
    return coexist::kExitConfig;
  }
  cfg.mode = mode;
  if (mode == coexist::Mode::Sweep && cfg.sweep_widths.empty()) {
    std::cerr << "coexist: " << args.config << ": sweep mode needs [sweep] widths\n";
    return coexist::kExitConfig;
  }
  if (!args.output.empty()) cfg.output_dir = args.output;
  if (args.workers > 0) cfg.workers = args.workers;

  const auto outcome = coexist::run(cfg);
  std::ostream& os = outcome.exit_code == coexist::kExitOk ? std::cout : std::cerr;
  os << "coexist " << coexist::to_string(mode) << ": " << outcome.message << " (" << cfg.output_dir << ")\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coexistence states of competing species on dumbbell domains"};
  app.set_version_flag("--version", std::string(coexist::kToolVersion));
  app.require_subcommand(1);

  Args args;
  const std::pair<const char*, coexist::Mode> modes[] = {
      {"solve", coexist::Mode::Solve},
      {"continuation", coexist::Mode::Continuation},
      {"sweep", coexist::Mode::Sweep},
      {"check", coexist::Mode::Check},
  };
  const char* help[] = {
      "Minimize at the last kappa of the schedule, starting from the channel ramp state",
      "Warm-started minimization along the kappa schedule",
      "Continuation for each channel width in [sweep] widths",
      "Assumption, gradient and Taylor audits without solving",
  };
  for (std::size_t i = 0; i < 4; ++i) {
    auto* sub = app.add_subcommand(modes[i].first, help[i]);
    sub->add_option("--config", args.config, "Run configuration (TOML)")->required();
    sub->add_option("--output", args.output, "Output directory (overrides output_dir)");
    sub->add_option("--workers", args.workers, "Concurrent sweep runs (overrides workers)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : coexist::kExitConfig;
  }
  for (const auto& [name, mode] : modes) {
    if (app.got_subcommand(name)) return execute(mode, args);
  }
  return coexist::kExitConfig;
}
