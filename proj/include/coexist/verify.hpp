// Randomized self-checks: finite-difference gradient audit and
// core-supported perturbations of W for the Taylor remainder audit.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "coexist/analysis.hpp"
#include "coexist/field.hpp"
#include "coexist/geometry.hpp"
#include "coexist/reaction.hpp"

namespace coexist {

/// Every value drawn uniformly in [margin, A_i − margin], away from the truncation breakpoints.
inline State random_state(const DomainGrid& grid, std::span<const ReactionModel> models, std::mt19937_64& rng,
                          double margin = 1e-3) {
  State s(models.size(), grid.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    std::uniform_real_distribution<double> dist(margin, models[i].capacity() - margin);
    for (double& v : s.u[i].values()) v = dist(rng);
  }
  return s;
}

struct GradientAudit {
  std::size_t states = 0;
  double max_rel_error = 0.0;
  double tol = 1e-6;
  [[nodiscard]] bool ok() const noexcept { return max_rel_error <= tol; }
};

/// Relative error between the central difference of energy_I along `dir`
/// and h² Σ ⟨grad_I, dir⟩.
inline double directional_error(const DomainGrid& grid, const State& state, const State& dir,
                                std::span<const ReactionModel> models, double kappa, double step) {
  State plus = state;
  State minus = state;
  for (std::size_t i = 0; i < state.species(); ++i) {
    for (std::size_t c = 0; c < grid.size(); ++c) {
      plus.u[i][c] += step * dir.u[i][c];
      minus.u[i][c] -= step * dir.u[i][c];
    }
  }
  const double fd =
      (energy_I(grid, plus, models, kappa).total - energy_I(grid, minus, models, kappa).total) / (2.0 * step);
  const State g = grad_I(grid, state, models, kappa);
  double exact = 0.0;
  for (std::size_t i = 0; i < state.species(); ++i) {
    for (std::size_t c = 0; c < grid.size(); ++c) exact += g.u[i][c] * dir.u[i][c];
  }
  exact *= grid.cell_area();
  return std::abs(fd - exact) / std::max(std::abs(exact), 1e-12);
}

inline GradientAudit gradient_audit(const DomainGrid& grid, std::span<const ReactionModel> models, double kappa,
                                    std::size_t count, std::uint64_t seed, double step = 1e-5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  GradientAudit audit;
  for (std::size_t s = 0; s < count; ++s) {
    const State x = random_state(grid, models, rng);
    State dir(models.size(), grid.size());
    for (auto& f : dir.u) {
      for (double& v : f.values()) v = unit(rng);
    }
    audit.max_rel_error = std::max(audit.max_rel_error, directional_error(grid, x, dir, models, kappa, step));
    ++audit.states;
  }
  return audit;
}

/// W plus a smooth random perturbation supported on the cores, scaled so that
/// ‖U − W‖_{H¹(Ω_0)} = target. Own core: A_i − |p|; other cores: p.
inline State core_perturbation(const DomainGrid& grid, std::span<const ReactionModel> models, std::mt19937_64& rng,
                               double target) {
  const State w = build_state_W(grid, models);
  const std::size_t k = models.size();
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_int_distribution<int> freq(0, 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::acos(-1.0));
  State delta(k, grid.size());
  for (std::size_t i = 0; i < k; ++i) {
    // A few cosine modes per species, evaluated at absolute coordinates.
    struct Mode {
      double a, fx, fy, px, py;
    };
    std::vector<Mode> modes(3);
    for (auto& m : modes) {
      m = {amp(rng), static_cast<double>(freq(rng)), static_cast<double>(freq(rng)), phase(rng), phase(rng)};
    }
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const auto lab = grid.label(c);
      if (!lab.is_core()) continue;
      double p = 0.0;
      for (const auto& m : modes) {
        p += m.a * std::cos(m.fx * std::acos(-1.0) * grid.cell_x(c) + m.px) *
             std::cos(m.fy * std::acos(-1.0) * grid.cell_y(c) + m.py);
      }
      delta.u[i][c] = lab.core_index() == static_cast<int>(i) ? -std::abs(p) : p;
    }
  }
  const State zero(k, grid.size());
  const double norm = h1_core_distance(grid, delta, zero);
  State u = w;
  if (norm == 0.0) return u;
  double scale = target / norm;
  // Keep |u_i| ≤ A_i on the cores.
  for (std::size_t i = 0; i < k; ++i) {
    const double a = models[i].capacity();
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const double d = std::abs(delta.u[i][c]);
      if (d * scale > a) scale = a / d;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < grid.size(); ++c) u.u[i][c] += scale * delta.u[i][c];
  }
  return u;
}

struct TaylorAudit {
  std::size_t samples = 0;
  std::size_t failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double max_distance = 0.0;
  [[nodiscard]] bool ok() const noexcept { return samples > 0 && failures == 0; }
};

/// `count` perturbations with d drawn uniformly in (0, radius].
inline TaylorAudit taylor_audit(const DomainGrid& grid, std::span<const ReactionModel> models, std::size_t count,
                                std::uint64_t seed, double radius = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> target(0.0, radius);
  TaylorAudit audit;
  for (std::size_t s = 0; s < count; ++s) {
    const double d = radius - target(rng);  // (0, radius]
    const State u = core_perturbation(grid, models, rng, d);
    const auto rep = taylor_remainder_check(u, grid, models, radius);
    ++audit.samples;
    audit.worst_margin = std::min(audit.worst_margin, rep.margin());
    audit.max_distance = std::max(audit.max_distance, rep.distance);
    if (!rep.precondition_ok || !rep.holds()) ++audit.failures;
  }
  return audit;
}

}  // namespace coexist
