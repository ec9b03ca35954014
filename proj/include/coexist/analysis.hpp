// Diagnostics on computed states: segregation, a-priori bounds, the energy
// sandwich around W, comparison with the trivial global minimizer, the
// extremality inequalities and the second-order Taylor remainder.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coexist/field.hpp"
#include "coexist/geometry.hpp"
#include "coexist/reaction.hpp"
#include "coexist/solver.hpp"

namespace coexist {

/// ω_i = {u_i > kSupportThreshold · A_i}.
inline constexpr double kSupportThreshold = 1e-6;

struct SegregationMetrics {
  std::vector<std::vector<double>> overlap;  // ∫u_i²u_j², zero diagonal
  double total_overlap = 0.0;                // Σ over ordered pairs i ≠ j
  std::vector<double> support_measure;       // |ω_i|
  double product_max = 0.0;                  // max_c max_{i≠j} u_i u_j
  double support_threshold = kSupportThreshold;
};

inline SegregationMetrics segregation_metrics(const DomainGrid& grid, const State& state,
                                              std::span<const ReactionModel> models) {
  check_state(grid, state);
  const std::size_t k = state.species();
  SegregationMetrics m;
  m.overlap.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double o = pair_overlap(grid, state, i, j);
      m.overlap[i][j] = m.overlap[j][i] = o;
      m.total_overlap += 2.0 * o;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double thr = kSupportThreshold * models[i].capacity();
    std::size_t count = 0;
    for (double v : state.u[i].values()) count += v > thr ? 1 : 0;
    m.support_measure.push_back(grid.cell_area() * static_cast<double>(count));
  }
  for (std::size_t c = 0; c < grid.size(); ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) m.product_max = std::max(m.product_max, state.u[i][c] * state.u[j][c]);
    }
  }
  return m;
}

struct BoundsReport {
  long violations = 0;          // cells with u_i < −tol or u_i > A_i + tol
  double worst = 0.0;           // largest excursion outside [0, A_i]
  std::vector<double> mass;     // ∫u_i
  std::vector<double> core_mass_floor;  // 10⁻³ A_i |Ω^i|
  bool nontrivial = true;
  double tolerance = 0.0;
  [[nodiscard]] bool within_bounds() const noexcept { return violations == 0; }
};

inline BoundsReport bounds_check(const DomainGrid& grid, const State& state, std::span<const ReactionModel> models,
                                 double tol = 0.0) {
  check_state(grid, state);
  BoundsReport b;
  b.tolerance = tol;
  for (std::size_t i = 0; i < state.species(); ++i) {
    const double a = models[i].capacity();
    double mass = 0.0;
    for (double v : state.u[i].values()) {
      const double excess = std::max(-v, v - a);
      if (excess > tol) ++b.violations;
      b.worst = std::max(b.worst, excess);
      mass += v;
    }
    mass *= grid.cell_area();
    b.mass.push_back(mass);
    const double floor =
        static_cast<int>(i) < grid.num_cores() ? 1e-3 * a * measure(grid, Label::core(static_cast<int>(i))) : 0.0;
    b.core_mass_floor.push_back(floor);
    if (!(mass >= floor) || !(mass > 0.0)) b.nontrivial = false;
  }
  return b;
}

/// μ = −Σ μ_i |Ω^i| on the grid.
inline double core_energy(const DomainGrid& grid, std::span<const ReactionModel> models) {
  double mu = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    mu -= models[i].energy_density() * measure(grid, Label::core(static_cast<int>(i)));
  }
  return mu;
}

/// τ_ε = I(Φ_ε) − μ, with Φ_ε from initial_state and the same quadrature.
inline double channel_excess(const DomainGrid& grid, std::span<const ReactionModel> models) {
  const State phi = initial_state(grid, models);
  return energy_I(grid, phi, models, 0.0).total - core_energy(grid, models);
}

struct SandwichReport {
  double mu = 0.0;
  double tau = 0.0;
  double eta = 0.0;
  double sigma = 0.0;             // (τ_ε + |R_ε|Σμ_i)/η
  double channel_measure = 0.0;   // |R_ε|
  double sum_mu = 0.0;            // Σ μ_i
  double distance = 0.0;          // d = ‖U − W‖_{H¹(Ω_0)}
  double energy = 0.0;            // I at the solution
  double lower = 0.0;             // μ + η d² − |R_ε|Σμ_i
  double upper = 0.0;             // μ + τ_ε
  double slack = 0.0;
  double kappa = 0.0;
  double kappa_threshold = 0.0;
  bool converged = false;
  bool lower_applicable = false;  // κ above the threshold
  bool upper_ok = false;
  bool lower_ok = false;
  bool sigma_ok = false;          // d² ≤ σ_ε
  [[nodiscard]] double upper_margin() const noexcept { return upper + slack - energy; }
  [[nodiscard]] double lower_margin() const noexcept { return energy - (lower - slack); }
};

inline SandwichReport energy_sandwich(const SolveResult& result, const DomainGrid& grid,
                                      std::span<const ReactionModel> models, double kappa) {
  const auto assumptions = check_assumptions(models);
  SandwichReport s;
  s.kappa = kappa;
  s.kappa_threshold = assumptions.kappa_threshold;
  s.converged = result.converged;
  s.mu = core_energy(grid, models);
  s.tau = channel_excess(grid, models);
  s.eta = assumptions.eta;
  s.channel_measure = measure(grid, Label::channel());
  for (const auto& m : models) s.sum_mu += m.energy_density();
  s.sigma = (s.tau + s.channel_measure * s.sum_mu) / s.eta;
  s.distance = h1_core_distance(grid, result.state, build_state_W(grid, models));
  s.energy = energy_I(grid, result.state, models, kappa).total;
  s.slack = 1e-6 * (1.0 + std::abs(s.mu));
  s.upper = s.mu + s.tau;
  s.lower = s.mu + s.eta * s.distance * s.distance - s.channel_measure * s.sum_mu;
  s.lower_applicable = kappa > s.kappa_threshold;
  s.upper_ok = s.energy <= s.upper + s.slack;
  s.lower_ok = s.energy >= s.lower - s.slack;
  s.sigma_ok = s.distance * s.distance <= s.sigma + s.slack;
  return s;
}

struct TrivialMinReport {
  std::size_t dominant = 0;     // i₀, lowest index among max μ_i
  double lambda = 0.0;          // −μ_{i₀}|Ω_ε|
  double trivial_energy = 0.0;  // J of (A_{i₀} everywhere, others 0) by quadrature
  double energy = 0.0;          // J(state)
  double margin = 0.0;          // J(state) − λ
  std::size_t nontrivial_components = 0;
  bool strict = false;          // margin > 0 (only meaningful with ≥ 2 components)
};

inline std::size_t dominant_species(std::span<const ReactionModel> models) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < models.size(); ++i) {
    if (models[i].energy_density() > models[best].energy_density()) best = i;
  }
  return best;
}

inline State trivial_state(const DomainGrid& grid, std::span<const ReactionModel> models, std::size_t species) {
  State s(models.size(), grid.size());
  for (double& v : s.u[species].values()) v = models[species].capacity();
  return s;
}

inline TrivialMinReport trivial_min_comparison(const State& state, const DomainGrid& grid,
                                               std::span<const ReactionModel> models) {
  TrivialMinReport r;
  r.dominant = dominant_species(models);
  r.lambda = -models[r.dominant].energy_density() * measure_domain(grid);
  r.trivial_energy = energy_J(grid, trivial_state(grid, models, r.dominant), models);
  r.energy = energy_J(grid, state, models);
  r.margin = r.energy - r.lambda;
  for (std::size_t i = 0; i < state.species(); ++i) {
    const double thr = kSupportThreshold * models[i].capacity();
    if (std::any_of(state.u[i].values().begin(), state.u[i].values().end(), [&](double v) { return v > thr; })) {
      ++r.nontrivial_components;
    }
  }
  r.strict = r.margin > 0.0;
  return r;
}

struct SpeciesExtremality {
  double worst_minus = -std::numeric_limits<double>::infinity();  // max_c r⁻_i(φ_c)/‖φ_c‖
  double worst_plus = std::numeric_limits<double>::infinity();    // min_c r⁺_i(φ_c)/‖φ_c‖
  double worst_minus_x = 0.0, worst_minus_y = 0.0;
  double worst_plus_x = 0.0, worst_plus_y = 0.0;
  double diffineq_worst = -std::numeric_limits<double>::infinity();  // max_c (−Δu_i − f_i(u_i))
  double interior_residual = 0.0;  // max |−Δu_i + u_i − f_i(u_i)| on the interior of ω_i
  std::size_t interior_cells = 0;
};

struct ExtremalityReport {
  std::vector<SpeciesExtremality> species;
  double tol = 0.0;
  double product_max = 0.0;
  bool applicable = true;        // input segregated within the product tolerance
  double worst_violation = 0.0;  // max over i of max(worst_minus, −worst_plus, 0)
  [[nodiscard]] bool holds() const noexcept { return worst_violation <= tol; }
  [[nodiscard]] double worst_interior_residual() const noexcept {
    double w = 0.0;
    for (const auto& s : species) w = std::max(w, s.interior_residual);
    return w;
  }
};

/// Tests the weak inequalities against every cell basis function φ_c ≥ 0:
///   r⁻_i(φ) = a(u_i, φ) − ⟨f_i(u_i), φ⟩ ≤ tol‖φ‖_{H¹}
///   r⁺_i(φ) = a(û_i, φ) − ⟨f̂(û_i), φ⟩ ≥ −tol‖φ‖_{H¹}
/// with û_i = u_i − Σ_{h≠i}u_h and f̂ = f_i(u_i) − Σ_{j≠i} f_j(u_j). The basis
/// functions generate the cone of nonnegative grid functions, so the check
/// is complete for the discrete forms.
inline ExtremalityReport check_2kvar(const State& state, const DomainGrid& grid,
                                     std::span<const ReactionModel> models, double tol,
                                     double product_tol = std::numeric_limits<double>::infinity()) {
  check_state(grid, state);
  const std::size_t k = state.species();
  const std::size_t n = grid.size();
  const double area = grid.cell_area();
  const double inv_h2 = 1.0 / area;
  ExtremalityReport rep;
  rep.tol = tol;
  rep.species.resize(k);

  // Strong residual ρ_i = −Δu_i + u_i − f_i(u_i); r⁻_i(φ_c) = h² ρ_i(c).
  std::vector<std::vector<double>> rho(k, std::vector<double>(n));
  std::vector<std::vector<double>> lap_neg(k, std::vector<double>(n));
  for (std::size_t i = 0; i < k; ++i) {
    const auto& u = state.u[i];
    for (std::size_t c = 0; c < n; ++c) {
      double lap = 0.0;
      for (auto nb : grid.neighbors(c)) lap += u[c] - u[nb];
      lap_neg[i][c] = lap * inv_h2;
      rho[i][c] = lap_neg[i][c] + u[c] - models[i].f(u[c]);
    }
  }

  std::vector<std::vector<std::uint8_t>> in_support(k, std::vector<std::uint8_t>(n));
  for (std::size_t i = 0; i < k; ++i) {
    const double thr = kSupportThreshold * models[i].capacity();
    for (std::size_t c = 0; c < n; ++c) in_support[i][c] = state.u[i][c] > thr ? 1 : 0;
  }

  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) rep.product_max = std::max(rep.product_max, state.u[i][c] * state.u[j][c]);
    }
  }
  rep.applicable = rep.product_max <= product_tol;

  for (std::size_t c = 0; c < n; ++c) {
    const double phi_norm = std::sqrt(area + static_cast<double>(grid.neighbors(c).size()));
    double rho_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) rho_sum += rho[i][c];
    for (std::size_t i = 0; i < k; ++i) {
      auto& s = rep.species[i];
      const double minus = area * rho[i][c] / phi_norm;
      // û_i and f̂ are linear combinations, so r⁺_i = r⁻_i − Σ_{h≠i} r⁻_h.
      const double plus = area * (2.0 * rho[i][c] - rho_sum) / phi_norm;
      if (minus > s.worst_minus) {
        s.worst_minus = minus;
        s.worst_minus_x = grid.cell_x(c);
        s.worst_minus_y = grid.cell_y(c);
      }
      if (plus < s.worst_plus) {
        s.worst_plus = plus;
        s.worst_plus_x = grid.cell_x(c);
        s.worst_plus_y = grid.cell_y(c);
      }
      s.diffineq_worst = std::max(s.diffineq_worst, lap_neg[i][c] - models[i].f(state.u[i][c]));

      // Interior of ω_i: the cell and its neighbours lie in ω_i and in no other support.
      bool interior = in_support[i][c] != 0;
      for (std::size_t j = 0; j < k && interior; ++j) {
        if (j != i && in_support[j][c]) interior = false;
      }
      for (auto nb : grid.neighbors(c)) {
        if (!interior) break;
        if (!in_support[i][nb]) interior = false;
        for (std::size_t j = 0; j < k && interior; ++j) {
          if (j != i && in_support[j][nb]) interior = false;
        }
      }
      if (interior) {
        ++s.interior_cells;
        s.interior_residual = std::max(s.interior_residual, std::abs(rho[i][c]));
      }
    }
  }
  for (const auto& s : rep.species) {
    rep.worst_violation = std::max({rep.worst_violation, s.worst_minus, -s.worst_plus});
  }
  return rep;
}

struct TaylorReport {
  double remainder = 0.0;  // L
  double distance = 0.0;   // d = ‖U − W‖_{H¹(Ω_0)}
  double bound = 0.0;      // R = η d²
  double eta = 0.0;
  bool precondition_ok = true;  // |u_i| ≤ A_i on core cells
  double radius = 0.0;          // reporting radius for the inequality
  [[nodiscard]] double margin() const noexcept { return bound - remainder; }
  /// The inequality is only claimed inside the radius.
  [[nodiscard]] bool asserted() const noexcept { return precondition_ok && distance <= radius; }
  [[nodiscard]] bool holds() const noexcept { return margin() >= 0.0; }
};

/// L = Σ_i ∫_{Ω_0} [F_i(u_i) − F_i(w_i) − f_i(w_i)(u_i − w_i) − ½ f'_i(w_i)(u_i − w_i)²]
/// against R = η‖U − W‖²_{H¹(Ω_0)}.
inline TaylorReport taylor_remainder_check(const State& state, const DomainGrid& grid,
                                           std::span<const ReactionModel> models, double radius = 0.05) {
  check_state(grid, state);
  const auto assumptions = check_assumptions(models);
  const State w = build_state_W(grid, models);
  TaylorReport t;
  t.eta = assumptions.eta;
  t.radius = radius;
  double acc = 0.0;
  for (std::size_t i = 0; i < state.species(); ++i) {
    const auto& m = models[i];
    const double a = m.capacity();
    for (std::size_t c = 0; c < grid.size(); ++c) {
      if (!grid.label(c).is_core()) continue;
      const double u = state.u[i][c];
      const double wc = w.u[i][c];
      if (std::abs(u) > a * (1.0 + 1e-12)) t.precondition_ok = false;
      const double d = u - wc;
      acc += m.F(u) - m.F(wc) - m.f(wc) * d - 0.5 * m.df(wc) * d * d;
    }
  }
  t.remainder = grid.cell_area() * acc;
  t.distance = h1_core_distance(grid, state, w);
  t.bound = t.eta * t.distance * t.distance;
  return t;
}

/// Everything measured at one stage. Sections left empty are reported as skipped.
struct DiagnosticsReport {
  double kappa = 0.0;
  std::optional<SegregationMetrics> overlap;
  std::optional<BoundsReport> bounds;
  std::optional<SandwichReport> sandwich;
  std::optional<ExtremalityReport> extremality;
  std::optional<TaylorReport> taylor;
  std::optional<TrivialMinReport> trivial_min;
  double energy_I = 0.0;
  double energy_J = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double kExtremalityTol = 1e-8;

/// Runs every diagnostic on a converged stage.
inline DiagnosticsReport diagnose(const SolveResult& result, const DomainGrid& grid,
                                  std::span<const ReactionModel> models, double kappa) {
  DiagnosticsReport d;
  d.kappa = kappa;
  d.energy_I = energy_I(grid, result.state, models, kappa).total;
  d.overlap = segregation_metrics(grid, result.state, models);
  d.bounds = bounds_check(grid, result.state, models, 0.0);
  if (d.bounds->violations == 0) {
    d.energy_J = energy_J(grid, result.state, models);
    d.trivial_min = trivial_min_comparison(result.state, grid, models);
  }
  d.sandwich = energy_sandwich(result, grid, models, kappa);
  d.extremality = check_2kvar(result.state, grid, models, kExtremalityTol);
  d.taylor = taylor_remainder_check(result.state, grid, models);
  return d;
}

}  // namespace coexist
