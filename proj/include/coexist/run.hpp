// Run orchestration: solve, continuation, sweep and check modes, artifact emission.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "coexist/analysis.hpp"
#include "coexist/config.hpp"
#include "coexist/field.hpp"
#include "coexist/geometry.hpp"
#include "coexist/log.hpp"
#include "coexist/reaction.hpp"
#include "coexist/report.hpp"
#include "coexist/solver.hpp"
#include "coexist/verify.hpp"

namespace coexist {

inline constexpr const char* kToolName = "coexist";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitIo = 2, kExitConfig = 3 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace fs = std::filesystem;

/// "%g" rendering used in artifact names: 1000 -> "1000", 0.05 -> "0.05".
inline std::string number_tag(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string fields_name(double kappa) { return "fields_kappa_" + number_tag(kappa) + ".csv"; }
inline std::string trace_name(double kappa) { return "trace_kappa_" + number_tag(kappa) + ".csv"; }
inline std::string width_dir(double width) { return "width_" + number_tag(width); }

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

inline void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  body(os);
  os.flush();
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

inline Json rect_json(const Rect& r) {
  return {{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}};
}

/// The configuration as run. output_dir and workers are left out: neither
/// changes the results, and the report stays identical across them.
inline Json config_echo(const RunConfig& cfg) {
  Json cores = Json::array();
  for (const auto& r : cfg.domain.cores) cores.push_back(rect_json(r));
  Json channels = Json::array();
  for (const auto& r : cfg.domain.channels) channels.push_back(rect_json(r));
  Json species = Json::array();
  for (const auto& s : cfg.species) species.push_back({{"lambda", s.lambda}, {"p", s.p}});
  return {{"mode", to_string(cfg.mode)},
          {"domain", {{"h", cfg.domain.h}, {"cores", cores}, {"channels", channels}}},
          {"species", species},
          {"solver",
           {{"tol", cfg.solver.tol},
            {"max_iter", cfg.solver.max_iter},
            {"initial_step", cfg.solver.initial_step},
            {"armijo", cfg.solver.armijo},
            {"backtrack", cfg.solver.backtrack},
            {"clamp", cfg.solver.clamp}}},
          {"kappa_schedule", cfg.kappa_schedule},
          {"sweep", {{"widths", cfg.sweep_widths}}},
          {"seed", cfg.seed}};
}

/// Hard assertions in evaluation order; the first failure decides the exit message.
class Assertions {
 public:
  void add(const std::string& name, bool pass, const std::string& detail = {}) {
    list_.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    if (!pass && first_failure_.empty()) first_failure_ = detail.empty() ? name : name + ": " + detail;
  }
  [[nodiscard]] bool ok() const noexcept { return first_failure_.empty(); }
  [[nodiscard]] const std::string& first_failure() const noexcept { return first_failure_; }
  [[nodiscard]] const Json& json() const noexcept { return list_; }

 private:
  Json list_ = Json::array();
  std::string first_failure_;
};

/// Accepted steps may raise the energy by at most the round-off slack.
inline bool trace_monotone(const SolveResult& r) {
  for (std::size_t t = 1; t < r.trace.size(); ++t) {
    if (r.trace[t].energy > r.trace[t - 1].energy + kEnergySlack) return false;
  }
  return true;
}

/// Diagnostics of one stage plus its solve summary.
inline Json stage_json(const SolveResult& r, const DomainGrid& grid, std::span<const ReactionModel> models,
                       double kappa) {
  Json j;
  try {
    j = to_json(diagnose(r, grid, models, kappa));
  } catch (const std::exception& e) {
    log::warn(std::string("diagnostics failed at kappa = ") + number_tag(kappa) + ": " + e.what());
    j = skipped_diagnostics(kappa);
  }
  j["solve"] = solve_summary(r);
  j["fields_csv"] = fields_name(kappa);
  j["trace_csv"] = trace_name(kappa);
  return j;
}

inline void write_stage(const fs::path& dir, const DomainGrid& grid, const SolveResult& r, double kappa) {
  write_file(dir / fields_name(kappa), [&](std::ostream& os) { write_fields_csv(os, grid, r.state); });
  write_file(dir / trace_name(kappa), [&](std::ostream& os) { write_trace_csv(os, r); });
}

/// Hard assertions on a finished stage: bounds, monotone trace, nontriviality.
inline void assert_stage(Assertions& a, const std::string& where, const SolveResult& r, const DomainGrid& grid,
                         std::span<const ReactionModel> models, bool clamp) {
  const auto b = bounds_check(grid, r.state, models, clamp ? 0.0 : 1e-6);
  a.add("bounds", b.violations == 0,
        b.violations == 0 ? std::string{} : where + ": " + std::to_string(b.violations) + " cells outside [0, A_i]");
  const bool mono = trace_monotone(r);
  a.add("monotone_energy", mono, mono ? std::string{} : where + ": energy increased on an accepted step");
  a.add("nontriviality", b.nontrivial, b.nontrivial ? std::string{} : where + ": a species has ∫u_i below the floor");
}

struct ContinuationRun {
  ContinuationResult result;
  Json stages = Json::array();
  Json summary;
};

inline Json continuation_summary(const ContinuationResult& c) {
  Json energies = Json::array();
  Json kappa_overlap = Json::array();
  Json distance_sq = Json::array();
  for (std::size_t j = 0; j < c.stages.size(); ++j) {
    energies.push_back(num(c.stages[j].energy));
    kappa_overlap.push_back(num(c.schedule[j] * c.overlap[j]));
    distance_sq.push_back(num(c.stages[j].h1_core_distance * c.stages[j].h1_core_distance));
  }
  Json overlap = Json::array();
  for (double v : c.overlap) overlap.push_back(num(v));
  return {{"schedule", c.schedule},
          {"energy", energies},
          {"overlap", overlap},
          {"kappa_overlap", kappa_overlap},
          {"distance_sq", distance_sq},
          {"all_converged", c.all_converged},
          {"energy_monotone", c.energy_monotone},
          {"warnings", c.warnings}};
}

/// Continuation on one domain; writes every stage's CSVs into `dir`.
inline ContinuationRun run_continuation(const fs::path& dir, const DomainGrid& grid,
                                        std::span<const ReactionModel> models, const RunConfig& cfg) {
  ContinuationRun out;
  out.result = kappa_continuation(grid, models, cfg.kappa_schedule, cfg.solver);
  for (std::size_t j = 0; j < out.result.stages.size(); ++j) {
    const double kappa = out.result.schedule[j];
    write_stage(dir, grid, out.result.stages[j], kappa);
    out.stages.push_back(stage_json(out.result.stages[j], grid, models, kappa));
  }
  out.summary = continuation_summary(out.result);
  return out;
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  Json report;
};

namespace detail {

inline void run_solve(const RunConfig& cfg, const fs::path& dir, const DomainGrid& grid,
                      std::span<const ReactionModel> models, Json& report, Assertions& a) {
  const double kappa = cfg.kappa_schedule.back();
  const auto r = minimize(grid, initial_state(grid, models), models, kappa, cfg.solver);
  write_stage(dir, grid, r, kappa);
  report["stages"] = Json::array({stage_json(r, grid, models, kappa)});
  report["I_final"] = num(r.energy);
  assert_stage(a, "kappa " + number_tag(kappa), r, grid, models, cfg.solver.clamp);
}

inline void run_continuation_mode(const RunConfig& cfg, const fs::path& dir, const DomainGrid& grid,
                                  std::span<const ReactionModel> models, Json& report, Assertions& a) {
  auto run = run_continuation(dir, grid, models, cfg);
  for (std::size_t j = 0; j < run.result.stages.size(); ++j) {
    assert_stage(a, "kappa " + number_tag(run.result.schedule[j]), run.result.stages[j], grid, models,
                 cfg.solver.clamp);
  }
  a.add("monotone_energy", run.result.energy_monotone,
        run.result.energy_monotone ? std::string{} : "stage energies decrease along the schedule");
  report["stages"] = std::move(run.stages);
  report["continuation"] = std::move(run.summary);
  report["I_final"] = num(run.result.stages.back().energy);
}

inline void run_sweep(const RunConfig& cfg, const fs::path& dir, std::span<const ReactionModel> models,
                      Json& report, Assertions& a) {
  const std::size_t count = cfg.sweep_widths.size();
  struct Slot {
    Json json;
    std::optional<ContinuationRun> run;
    std::optional<DomainGrid> grid;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t w = next++; w < count; w = next++) {
      try {
        const double width = cfg.sweep_widths[w];
        const fs::path sub = dir / width_dir(width);
        ensure_dir(sub);
        slots[w].grid.emplace(build_domain(with_channel_width(cfg.domain, width)));
        const auto& grid = *slots[w].grid;
        write_file(sub / "domain.csv", [&](std::ostream& os) { write_domain_csv(os, grid); });
        slots[w].run = run_continuation(sub, grid, models, cfg);
      } catch (...) {
        slots[w].error = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), count);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& s : slots) {
    if (s.error) std::rethrow_exception(s.error);
  }

  // Assembled in configuration order, independent of scheduling.
  Json runs = Json::array();
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t w = 0; w < count; ++w) {
    const double width = cfg.sweep_widths[w];
    auto& run = *slots[w].run;
    const auto& grid = *slots[w].grid;
    for (std::size_t j = 0; j < run.result.stages.size(); ++j) {
      assert_stage(a, "width " + number_tag(width) + ", kappa " + number_tag(run.result.schedule[j]),
                   run.result.stages[j], grid, models, cfg.solver.clamp);
    }
    a.add("monotone_energy", run.result.energy_monotone,
          run.result.energy_monotone ? std::string{} : "width " + number_tag(width) + ": stage energies decrease");
    const auto& last = run.result.stages.back();
    const auto sandwich = energy_sandwich(last, grid, models, run.result.schedule.back());
    runs.push_back({{"width", width},
                    {"directory", width_dir(width)},
                    {"domain", domain_summary(grid)},
                    {"tau", num(sandwich.tau)},
                    {"sigma", num(sandwich.sigma)},
                    {"distance_sq", num(sandwich.distance * sandwich.distance)},
                    {"energy", num(last.energy)},
                    {"mu", num(sandwich.mu)},
                    {"converged", run.result.all_converged},
                    {"continuation", run.summary},
                    {"stages", run.stages}});
    order.emplace_back(width, w);
  }
  // Trend columns ordered by decreasing width.
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<double> widths, tau, sigma, d2;
  for (const auto& [width, w] : order) {
    widths.push_back(width);
    tau.push_back(runs[w]["tau"].is_number() ? runs[w]["tau"].get<double>() : std::nan(""));
    sigma.push_back(runs[w]["sigma"].is_number() ? runs[w]["sigma"].get<double>() : std::nan(""));
    d2.push_back(runs[w]["distance_sq"].is_number() ? runs[w]["distance_sq"].get<double>() : std::nan(""));
  }
  Json cols = {{"width", widths}, {"tau", Json::array()}, {"sigma", Json::array()}, {"distance_sq", Json::array()}};
  for (std::size_t i = 0; i < widths.size(); ++i) {
    cols["tau"].push_back(num(tau[i]));
    cols["sigma"].push_back(num(sigma[i]));
    cols["distance_sq"].push_back(num(d2[i]));
  }
  report["sweep"] = {{"kappa", cfg.kappa_schedule.back()},
                     {"runs", runs},
                     {"trend", cols},
                     {"strictly_decreasing",
                      {{"tau", strictly_decreasing(tau)},
                       {"sigma", strictly_decreasing(sigma)},
                       {"distance_sq", strictly_decreasing(d2)}}}};
}

inline constexpr std::size_t kCheckGradientStates = 20;
inline constexpr std::size_t kCheckTaylorSamples = 50;

inline void run_check(const RunConfig& cfg, const DomainGrid& grid, std::span<const ReactionModel> models,
                      Json& report, Assertions& a) {
  const double kappa = cfg.kappa_schedule.back();
  const auto grad = gradient_audit(grid, models, kappa, kCheckGradientStates, cfg.seed);
  const auto taylor = taylor_audit(grid, models, kCheckTaylorSamples, cfg.seed + 1);
  const State w = build_state_W(grid, models);
  const auto i0 = dominant_species(models);
  const auto trivial = trivial_min_comparison(trivial_state(grid, models, i0), grid, models);
  const auto extremal_w = check_2kvar(w, grid, models, kExtremalityTol);
  const auto assumptions = check_assumptions(models);
  report["check"] = {
      {"kappa", kappa},
      {"gradient", {{"states", grad.states}, {"max_rel_error", num(grad.max_rel_error)}, {"tol", grad.tol}, {"ok", grad.ok()}}},
      {"taylor",
       {{"samples", taylor.samples},
        {"failures", taylor.failures},
        {"worst_margin", num(taylor.worst_margin)},
        {"max_distance", num(taylor.max_distance)},
        {"ok", taylor.ok()}}},
      {"trivial_tuple", to_json(trivial)},
      {"extremality_of_W", to_json(extremal_w)},
      {"energy_I_of_W", num(energy_I(grid, w, models, kappa).total)}};
  a.add("assumptions", assumptions.all_pass(), assumptions.all_pass() ? std::string{} : "growth-law assumptions not satisfied");
  a.add("gradient", grad.ok(),
        grad.ok() ? std::string{} : "finite-difference error " + std::to_string(grad.max_rel_error));
  a.add("taylor", taylor.ok(),
        taylor.ok() ? std::string{} : std::to_string(taylor.failures) + " perturbations exceed eta d^2");
}

}  // namespace detail

/// Executes cfg.mode, writes artifacts under cfg.output_dir and returns the
/// exit status: 0 when every hard assertion passes, 1 naming the first
/// failure, 2 for I/O failures.
inline RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  const fs::path dir(cfg.output_dir);
  const auto models = cfg.models();
  Json report;
  report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  report["mode"] = to_string(cfg.mode);
  report["config"] = config_echo(cfg);
  report["assumptions"] = to_json(check_assumptions(models));
  report["domain"] = skipped();
  report["stages"] = Json::array();
  report["continuation"] = skipped();
  report["sweep"] = skipped();
  report["check"] = skipped();
  Assertions a;
  try {
    ensure_dir(dir);
    const DomainGrid grid = build_domain(cfg.domain);
    report["domain"] = domain_summary(grid);
    write_file(dir / "domain.csv", [&](std::ostream& os) { write_domain_csv(os, grid); });
    switch (cfg.mode) {
      case Mode::Solve: detail::run_solve(cfg, dir, grid, models, report, a); break;
      case Mode::Continuation: detail::run_continuation_mode(cfg, dir, grid, models, report, a); break;
      case Mode::Sweep: detail::run_sweep(cfg, dir, models, report, a); break;
      case Mode::Check: detail::run_check(cfg, grid, models, report, a); break;
    }
  } catch (const IoError& e) {
    out.exit_code = kExitIo;
    out.message = e.what();
    out.report = std::move(report);
    return out;
  } catch (const SolverError& e) {
    a.add("solver", false, e.what());
  } catch (const InvalidDomain& e) {
    a.add("domain", false, e.what());
  }
  report["hard_assertions"] = a.json();
  report["status"] = a.ok() ? "pass" : "fail";
  report["failure"] = a.ok() ? Json(nullptr) : Json(a.first_failure());
  out.exit_code = a.ok() ? kExitOk : kExitAssertion;
  out.message = a.ok() ? "all hard assertions passed" : "hard assertion failed: " + a.first_failure();
  try {
    write_file(dir / "report.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
  } catch (const IoError& e) {
    out.exit_code = kExitIo;
    out.message = e.what();
  }
  out.report = std::move(report);
  return out;
}

}  // namespace coexist
