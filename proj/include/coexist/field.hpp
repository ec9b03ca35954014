// Fields on a DomainGrid, the Neumann Laplacian and the discrete energies.
//
// The gradient part of every energy uses one difference per interior face,
// so the exact gradient of the discrete energy is the 5-point Neumann
// residual. Quadrature is the cell midpoint rule.
#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coexist/geometry.hpp"
#include "coexist/reaction.hpp"

namespace coexist {

/// Per-cell values on the active cells of a grid.
class Field {
 public:
  Field() = default;
  explicit Field(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit Field(std::vector<double> values) : values_(std::move(values)) {}

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::vector<double> values_;
};

/// k densities on one grid.
struct State {
  std::vector<Field> u;

  State() = default;
  State(std::size_t species, std::size_t cells) : u(species, Field(cells)) {}

  [[nodiscard]] std::size_t species() const noexcept { return u.size(); }
  [[nodiscard]] std::size_t cells() const noexcept { return u.empty() ? 0 : u.front().size(); }

  friend bool operator==(const State&, const State&) = default;
};

inline void check_state(const DomainGrid& grid, const State& s) {
  for (const auto& f : s.u) {
    if (f.size() != grid.size()) throw std::invalid_argument("state does not match grid");
  }
}

/// w_i = A_i on core i, 0 elsewhere.
inline State build_state_W(const DomainGrid& grid, std::span<const ReactionModel> models) {
  if (static_cast<int>(models.size()) != grid.num_cores()) {
    throw std::invalid_argument("model/core count mismatch: " + std::to_string(models.size()) + " models, " +
                                std::to_string(grid.num_cores()) + " cores");
  }
  State s(models.size(), grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto lab = grid.label(c);
    if (lab.is_core()) {
      const auto i = static_cast<std::size_t>(lab.core_index());
      s.u[i][c] = models[i].capacity();
    }
  }
  return s;
}

/// (Δu)_c = Σ_{active neighbours n} (u_n − u_c)/h²; missing neighbours carry no flux.
inline Field neumann_laplacian(const DomainGrid& grid, const Field& u) {
  Field out(grid.size());
  const double inv_h2 = 1.0 / grid.cell_area();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    double acc = 0.0;
    for (auto nb : grid.neighbors(c)) acc += u[nb] - u[c];
    out[c] = acc * inv_h2;
  }
  return out;
}

/// ∫|∇u|² with one difference per face: Σ_faces (u_a − u_b)².
inline double dirichlet_sum(const DomainGrid& grid, const Field& u) {
  double acc = 0.0;
  for (const auto& f : grid.faces()) {
    const double d = u[f.a] - u[f.b];
    acc += d * d;
  }
  return acc;
}

struct EnergyBreakdown {
  std::vector<double> internal;  // ½‖u_i‖²_{H¹} − ∫F̃_i(u_i)
  double coupling = 0.0;         // κ Σ_{i≠j} ∫G_i(u_i)G_j(u_j), ordered pairs
  double total = 0.0;            // I
};

inline EnergyBreakdown energy_I(const DomainGrid& grid, const State& state, std::span<const ReactionModel> models,
                                double kappa) {
  check_state(grid, state);
  if (state.species() != models.size()) throw std::invalid_argument("energy_I: species/model mismatch");
  if (kappa < 0.0) throw std::invalid_argument("energy_I: kappa must be >= 0");
  const double area = grid.cell_area();
  const std::size_t k = state.species();
  EnergyBreakdown e;
  e.internal.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& u = state.u[i];
    const auto& m = models[i];
    double cells = 0.0;
    for (std::size_t c = 0; c < grid.size(); ++c) cells += 0.5 * u[c] * u[c] - m.F_tilde(u[c]);
    e.internal[i] = 0.5 * dirichlet_sum(grid, u) + area * cells;
  }
  if (k > 1 && kappa > 0.0) {
    double acc = 0.0;
    for (std::size_t c = 0; c < grid.size(); ++c) {
      double sum = 0.0;
      double sq = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double gi = models[i].G(state.u[i][c]);
        sum += gi;
        sq += gi * gi;
      }
      acc += sum * sum - sq;
    }
    e.coupling = kappa * area * acc;
  }
  e.total = e.coupling;
  for (double v : e.internal) e.total += v;
  return e;
}

/// Slack allowed on 0 ≤ u_i ≤ A_i before J is considered undefined.
inline constexpr double kRangeSlack = 1e-9;

class RangeError : public std::domain_error {
 public:
  RangeError(const std::string& what, std::size_t species, std::size_t cell, double value)
      : std::domain_error(what), species_(species), cell_(cell), value_(value) {}
  [[nodiscard]] std::size_t species() const noexcept { return species_; }
  [[nodiscard]] std::size_t cell() const noexcept { return cell_; }
  [[nodiscard]] double value() const noexcept { return value_; }

 private:
  std::size_t species_;
  std::size_t cell_;
  double value_;
};

/// Free energy with the untruncated potentials; requires 0 ≤ u_i ≤ A_i.
inline double energy_J(const DomainGrid& grid, const State& state, std::span<const ReactionModel> models) {
  check_state(grid, state);
  if (state.species() != models.size()) throw std::invalid_argument("energy_J: species/model mismatch");
  double worst = 0.0;
  std::size_t wi = 0;
  std::size_t wc = 0;
  for (std::size_t i = 0; i < state.species(); ++i) {
    const double a = models[i].capacity();
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const double v = state.u[i][c];
      const double excess = std::max(-v, v - a);
      if (excess > worst) {
        worst = excess;
        wi = i;
        wc = c;
      }
    }
  }
  if (worst > kRangeSlack) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "energy_J: u_%zu = %.9g at (%.6g, %.6g) outside [0, A]", wi + 1,
                  state.u[wi][wc], grid.cell_x(wc), grid.cell_y(wc));
    throw RangeError(buf, wi, wc, state.u[wi][wc]);
  }
  const double area = grid.cell_area();
  double total = 0.0;
  for (std::size_t i = 0; i < state.species(); ++i) {
    const auto& u = state.u[i];
    double cells = 0.0;
    for (std::size_t c = 0; c < grid.size(); ++c) cells += 0.5 * u[c] * u[c] - models[i].F(u[c]);
    total += 0.5 * dirichlet_sum(grid, u) + area * cells;
  }
  return total;
}

/// Pointwise gradient of energy_I: the directional derivative along d is
/// h² Σ_c ⟨grad_c, d_c⟩. Component i is
///   −Δu_i + u_i − f̃_i(u_i) + 2κ g_i(u_i) Σ_{j≠i} G_j(u_j),
/// the factor 2 coming from the ordered-pair coupling sum.
inline State grad_I(const DomainGrid& grid, const State& state, std::span<const ReactionModel> models,
                    double kappa) {
  check_state(grid, state);
  if (state.species() != models.size()) throw std::invalid_argument("grad_I: species/model mismatch");
  const std::size_t k = state.species();
  const std::size_t n = grid.size();
  const double inv_h2 = 1.0 / grid.cell_area();
  State out(k, n);
  std::vector<double> gsum(n, 0.0);
  if (k > 1 && kappa > 0.0) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t c = 0; c < n; ++c) gsum[c] += models[i].G(state.u[i][c]);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto& u = state.u[i];
    const auto& m = models[i];
    auto& g = out.u[i];
    for (std::size_t c = 0; c < n; ++c) {
      double lap = 0.0;
      for (auto nb : grid.neighbors(c)) lap += u[c] - u[nb];
      double v = lap * inv_h2 + u[c] - m.f_tilde(u[c]);
      if (k > 1 && kappa > 0.0) v += 2.0 * kappa * m.g(u[c]) * (gsum[c] - m.G(u[c]));
      g[c] = v;
    }
  }
  return out;
}

/// ‖U − R‖_{(H¹(Ω_0))^k}: core cells only, faces joining two cells of the same core.
inline double h1_core_distance(const DomainGrid& grid, const State& state, const State& ref) {
  check_state(grid, state);
  check_state(grid, ref);
  if (state.species() != ref.species()) throw std::invalid_argument("h1_core_distance: species mismatch");
  const double area = grid.cell_area();
  double acc = 0.0;
  for (std::size_t i = 0; i < state.species(); ++i) {
    const auto& u = state.u[i];
    const auto& r = ref.u[i];
    for (const auto& f : grid.faces()) {
      const auto la = grid.label(f.a);
      if (!la.is_core() || la != grid.label(f.b)) continue;
      const double d = (u[f.a] - r[f.a]) - (u[f.b] - r[f.b]);
      acc += d * d;
    }
    for (std::size_t c = 0; c < grid.size(); ++c) {
      if (!grid.label(c).is_core()) continue;
      const double d = u[c] - r[c];
      acc += area * d * d;
    }
  }
  return std::sqrt(acc);
}

/// Discrete L² norm (Σ h² u²)^{1/2} over all species.
inline double l2_norm(const DomainGrid& grid, const State& s) {
  double acc = 0.0;
  for (const auto& f : s.u) {
    for (double v : f.values()) acc += v * v;
  }
  return std::sqrt(grid.cell_area() * acc);
}

/// Σ_c h² u_i² u_j² for one pair of species.
inline double pair_overlap(const DomainGrid& grid, const State& s, std::size_t i, std::size_t j) {
  double acc = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const double p = s.u[i][c] * s.u[j][c];
    acc += p * p;
  }
  return grid.cell_area() * acc;
}

/// Σ_{i≠j} ∫u_i²u_j² over ordered pairs.
inline double total_overlap(const DomainGrid& grid, const State& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.species(); ++i) {
    for (std::size_t j = i + 1; j < s.species(); ++j) acc += 2.0 * pair_overlap(grid, s, i, j);
  }
  return acc;
}

/// Fields as `x,y,label,u_1,...,u_k`, one row per active cell, 9 significant digits.
inline void write_fields_csv(std::ostream& os, const DomainGrid& grid, const State& state) {
  os << "x,y,label";
  for (std::size_t i = 0; i < state.species(); ++i) os << ",u_" << (i + 1);
  os << '\n';
  char buf[64];
  for (std::size_t c = 0; c < grid.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,", grid.cell_x(c), grid.cell_y(c));
    os << buf << grid.label(c).name();
    for (std::size_t i = 0; i < state.species(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.9g", state.u[i][c]);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace coexist
