// Projected Barzilai–Borwein descent on the penalized energy and κ-continuation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coexist/field.hpp"
#include "coexist/geometry.hpp"
#include "coexist/log.hpp"
#include "coexist/reaction.hpp"

namespace coexist {

struct SolveOptions {
  double tol = 1e-8;             // relative projected-gradient tolerance
  long max_iter = 200000;
  double initial_step = 1e-2;    // first trial step, in units of h²
  double armijo = 1e-4;          // sufficient-decrease slope
  double backtrack = 0.5;        // step reduction factor
  bool clamp = true;             // project onto 0 ≤ u_i ≤ A_i
  bool record_trace = true;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("SolveOptions: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("SolveOptions: max_iter must be >= 1");
    if (!(initial_step > 0.0)) throw std::invalid_argument("SolveOptions: initial_step must be > 0");
    if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("SolveOptions: armijo must be in (0,1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("SolveOptions: backtrack must be in (0,1)");
  }
};

struct TraceRow {
  long iter;
  double energy;
  double residual;
  double h1_core_distance;
};

struct SolveResult {
  State state;
  std::vector<TraceRow> trace;
  double energy = 0.0;
  double residual = 0.0;
  double h1_core_distance = 0.0;
  long iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Absolute energy increase tolerated on an accepted step (round-off floor).
inline constexpr double kEnergySlack = 1e-13;

/// The competitor tuple Φ_ε: A_i on core i, a linear ramp into the channel
/// cells whose nearest core (by path length through the mask) is i, zero
/// elsewhere. Ties go to the lower species index.
inline State initial_state(const DomainGrid& grid, std::span<const ReactionModel> models) {
  State s = build_state_W(grid, models);
  const std::size_t k = models.size();
  const std::size_t n = grid.size();
  constexpr int kUnreached = std::numeric_limits<int>::max();
  std::vector<std::vector<int>> dist(k, std::vector<int>(n, kUnreached));
  for (std::size_t i = 0; i < k; ++i) {
    std::queue<std::uint32_t> todo;
    for (std::size_t c = 0; c < n; ++c) {
      if (grid.label(c) == Label::core(static_cast<int>(i))) {
        dist[i][c] = 0;
        todo.push(static_cast<std::uint32_t>(c));
      }
    }
    while (!todo.empty()) {
      const auto c = todo.front();
      todo.pop();
      for (auto nb : grid.neighbors(c)) {
        if (!grid.label(nb).is_channel() || dist[i][nb] != kUnreached) continue;
        dist[i][nb] = dist[i][c] + 1;
        todo.push(nb);
      }
    }
  }
  std::vector<int> owner(n, -1);
  int longest = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (!grid.label(c).is_channel()) continue;
    int best = kUnreached;
    for (std::size_t i = 0; i < k; ++i) {
      if (dist[i][c] < best) {
        best = dist[i][c];
        owner[c] = static_cast<int>(i);
      }
    }
    if (owner[c] >= 0) longest = std::max(longest, best);
  }
  const double h = grid.h();
  const double ramp = std::min(10.0 * h, std::max(longest, 1) * h);
  for (std::size_t c = 0; c < n; ++c) {
    if (owner[c] < 0) continue;
    const auto i = static_cast<std::size_t>(owner[c]);
    const double along = (dist[i][c] - 0.5) * h;
    s.u[i][c] = models[i].capacity() * std::max(0.0, 1.0 - along / ramp);
  }
  return s;
}

namespace detail {

inline void project(State& s, std::span<const ReactionModel> models) {
  for (std::size_t i = 0; i < s.species(); ++i) {
    const double a = models[i].capacity();
    for (double& v : s.u[i].values()) v = std::clamp(v, 0.0, a);
  }
}

// Discrete L² norm of the projected gradient.
inline double projected_residual(const DomainGrid& grid, const State& x, const State& g,
                                 std::span<const ReactionModel> models, bool clamp) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.species(); ++i) {
    const double a = models[i].capacity();
    for (std::size_t c = 0; c < grid.size(); ++c) {
      double v = g.u[i][c];
      if (clamp && ((x.u[i][c] <= 0.0 && v > 0.0) || (x.u[i][c] >= a && v < 0.0))) v = 0.0;
      acc += v * v;
    }
  }
  return std::sqrt(grid.cell_area() * acc);
}

}  // namespace detail

/// Minimizes energy_I from state0. Accepted steps satisfy an Armijo decrease;
/// with opts.clamp every iterate lies in 0 ≤ u_i ≤ A_i.
inline SolveResult minimize(const DomainGrid& grid, const State& state0, std::span<const ReactionModel> models,
                            double kappa, const SolveOptions& opts = {}) {
  opts.validate();
  check_state(grid, state0);
  const State anchor = build_state_W(grid, models);
  const double area = grid.cell_area();
  const std::size_t k = models.size();
  const std::size_t n = grid.size();

  auto energy = [&](const State& s) {
    const double e = energy_I(grid, s, models, kappa).total;
    if (!std::isfinite(e)) throw SolverError("energy is not finite (kappa = " + std::to_string(kappa) + ")");
    return e;
  };

  SolveResult res;
  State x = state0;
  if (opts.clamp) detail::project(x, models);
  double fx = energy(x);
  State g = grad_I(grid, x, models, kappa);
  double r = detail::projected_residual(grid, x, g, models, opts.clamp);
  if (opts.record_trace) res.trace.push_back({0, fx, r, h1_core_distance(grid, x, anchor)});

  constexpr double kStepMin = 1e-14;
  constexpr double kStepMax = 1e6;
  double step = opts.initial_step * area;
  State trial(k, n);
  long it = 0;
  res.stop_reason = "iteration cap";
  for (;;) {
    if (r <= opts.tol * std::max(1.0, l2_norm(grid, x))) {
      res.converged = true;
      res.stop_reason = "residual tolerance";
      break;
    }
    if (it >= opts.max_iter) break;

    bool accepted = false;
    double f_trial = fx;
    for (int bt = 0; bt < 80; ++bt) {
      double slope = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double a = models[i].capacity();
        for (std::size_t c = 0; c < n; ++c) {
          double v = x.u[i][c] - step * g.u[i][c];
          if (opts.clamp) v = std::clamp(v, 0.0, a);
          trial.u[i][c] = v;
          slope += g.u[i][c] * (v - x.u[i][c]);
        }
      }
      slope *= area;
      if (!(slope < 0.0)) break;
      f_trial = energy(trial);
      if (f_trial <= fx + opts.armijo * slope + kEnergySlack) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      res.stop_reason = "line search stalled";
      break;
    }

    State g_new = grad_I(grid, trial, models, kappa);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t c = 0; c < n; ++c) {
        const double s = trial.u[i][c] - x.u[i][c];
        ss += s * s;
        sy += s * (g_new.u[i][c] - g.u[i][c]);
      }
    }
    step = sy > 0.0 ? std::clamp(ss / sy, kStepMin, kStepMax) : kStepMax;

    std::swap(x, trial);
    g = std::move(g_new);
    fx = f_trial;
    ++it;
    r = detail::projected_residual(grid, x, g, models, opts.clamp);
    if (opts.record_trace) res.trace.push_back({it, fx, r, h1_core_distance(grid, x, anchor)});
  }

  res.h1_core_distance = h1_core_distance(grid, x, anchor);
  res.state = std::move(x);
  res.energy = fx;
  res.residual = r;
  res.iterations = it;
  if (!res.converged) {
    log::warn("minimize stopped without convergence (" + res.stop_reason + ", kappa = " + std::to_string(kappa) +
              ", residual = " + std::to_string(r) + ")");
  }
  return res;
}

struct ContinuationResult {
  std::vector<double> schedule;
  std::vector<SolveResult> stages;
  std::vector<double> overlap;  // Σ_{i≠j}∫u_i²u_j² per stage
  bool all_converged = true;
  bool energy_monotone = true;  // c_{j+1} ≥ c_j − 10·tol·|c_j|
  std::vector<std::string> warnings;

  [[nodiscard]] const State& final_state() const { return stages.back().state; }
};

inline void check_schedule(std::span<const double> schedule) {
  if (schedule.empty()) throw std::invalid_argument("kappa schedule is empty");
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    if (!(schedule[j] >= 0.0) || !std::isfinite(schedule[j])) throw std::invalid_argument("kappa must be finite and >= 0");
    if (j > 0 && !(schedule[j] > schedule[j - 1])) throw std::invalid_argument("schedule not increasing");
  }
}

/// Minimizes along an increasing κ schedule, each stage warm-started from the
/// previous one; the first stage starts from `start` (Φ_ε when omitted).
inline ContinuationResult kappa_continuation(const DomainGrid& grid, std::span<const ReactionModel> models,
                                             std::span<const double> schedule, const SolveOptions& opts = {},
                                             const State* start = nullptr) {
  check_schedule(schedule);
  ContinuationResult out;
  out.schedule.assign(schedule.begin(), schedule.end());
  const auto assumptions = check_assumptions(models);
  State current = start != nullptr ? *start : initial_state(grid, models);
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const double kappa = schedule[j];
    if (models.size() > 1 && kappa <= assumptions.kappa_threshold) {
      out.warnings.push_back("kappa = " + std::to_string(kappa) + " is not above the threshold " +
                             std::to_string(assumptions.kappa_threshold));
      log::info(out.warnings.back());
    }
    auto stage = minimize(grid, current, models, kappa, opts);
    log::info("stage kappa = " + std::to_string(kappa) + ": I = " + std::to_string(stage.energy) +
              ", iterations = " + std::to_string(stage.iterations));
    if (!stage.converged) {
      out.all_converged = false;
      out.warnings.push_back("stage kappa = " + std::to_string(kappa) + " did not converge");
    }
    if (j > 0) {
      const double prev = out.stages.back().energy;
      if (stage.energy < prev - 10.0 * opts.tol * std::abs(prev)) out.energy_monotone = false;
    }
    out.overlap.push_back(total_overlap(grid, stage.state));
    current = stage.state;
    out.stages.push_back(std::move(stage));
  }
  return out;
}

/// Energy trace as `iter,I,residual,h1_core_distance`.
inline void write_trace_csv(std::ostream& os, const SolveResult& result) {
  os << "iter,I,residual,h1_core_distance\n";
  char buf[128];
  for (const auto& row : result.trace) {
    std::snprintf(buf, sizeof buf, "%ld,%.9g,%.9g,%.9g\n", row.iter, row.energy, row.residual, row.h1_core_distance);
    os << buf;
  }
}

}  // namespace coexist
