// JSON serialization of reports (report.json).
#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "json.hpp"

#include "coexist/analysis.hpp"
#include "coexist/geometry.hpp"
#include "coexist/reaction.hpp"
#include "coexist/solver.hpp"

namespace coexist {

using Json = nlohmann::json;

inline Json skipped() { return Json{{"status", "skipped"}}; }

// NaN/inf are not JSON numbers.
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const AssumptionReport& a) {
  Json species = Json::array();
  for (const auto& s : a.species) {
    species.push_back({{"zero_at_origin", s.zero_at_origin},
                       {"capacity_is_max", s.capacity_is_max},
                       {"stable_capacity", s.stable_capacity},
                       {"rate_at_capacity", num(s.rate_at_capacity)},
                       {"sampled_max", num(s.sampled_max)}});
  }
  return {{"species", species},
          {"nu", num(a.nu)},
          {"eta", num(a.eta)},
          {"kappa_threshold", num(a.kappa_threshold)},
          {"all_pass", a.all_pass()}};
}

inline Json to_json(const SegregationMetrics& m) {
  return {{"pairs", m.overlap},
          {"total", num(m.total_overlap)},
          {"support_measure", m.support_measure},
          {"product_max", num(m.product_max)},
          {"support_threshold", m.support_threshold}};
}

inline Json to_json(const BoundsReport& b) {
  return {{"violations", b.violations},
          {"worst", num(b.worst)},
          {"tolerance", b.tolerance},
          {"mass", b.mass},
          {"mass_floor", b.core_mass_floor},
          {"nontrivial", b.nontrivial}};
}

inline Json to_json(const SandwichReport& s) {
  return {{"mu", num(s.mu)},
          {"tau", num(s.tau)},
          {"eta", num(s.eta)},
          {"sigma", num(s.sigma)},
          {"channel_measure", num(s.channel_measure)},
          {"sum_mu", num(s.sum_mu)},
          {"distance", num(s.distance)},
          {"distance_sq", num(s.distance * s.distance)},
          {"energy", num(s.energy)},
          {"lower", num(s.lower)},
          {"upper", num(s.upper)},
          {"slack", num(s.slack)},
          {"kappa_threshold", num(s.kappa_threshold)},
          {"lower_applicable", s.lower_applicable},
          {"upper_ok", s.upper_ok},
          {"lower_ok", s.lower_ok},
          {"sigma_ok", s.sigma_ok}};
}

inline Json to_json(const ExtremalityReport& e) {
  Json species = Json::array();
  for (const auto& s : e.species) {
    species.push_back({{"worst_minus", num(s.worst_minus)},
                       {"worst_minus_at", {num(s.worst_minus_x), num(s.worst_minus_y)}},
                       {"worst_plus", num(s.worst_plus)},
                       {"worst_plus_at", {num(s.worst_plus_x), num(s.worst_plus_y)}},
                       {"diffineq_worst", num(s.diffineq_worst)},
                       {"interior_residual", num(s.interior_residual)},
                       {"interior_cells", s.interior_cells}});
  }
  return {{"species", species},
          {"tol", e.tol},
          {"product_max", num(e.product_max)},
          {"applicable", e.applicable},
          {"worst_violation", num(e.worst_violation)},
          {"holds", e.holds()}};
}

inline Json to_json(const TaylorReport& t) {
  return {{"remainder", num(t.remainder)},
          {"distance", num(t.distance)},
          {"bound", num(t.bound)},
          {"eta", num(t.eta)},
          {"margin", num(t.margin())},
          {"radius", t.radius},
          {"precondition_ok", t.precondition_ok},
          {"asserted", t.asserted()},
          {"holds", t.holds()}};
}

inline Json to_json(const TrivialMinReport& r) {
  return {{"dominant_species", r.dominant + 1},
          {"lambda", num(r.lambda)},
          {"trivial_energy", num(r.trivial_energy)},
          {"energy_J", num(r.energy)},
          {"margin", num(r.margin)},
          {"nontrivial_components", r.nontrivial_components},
          {"strict", r.strict}};
}

template <class T>
Json section(const std::optional<T>& v) {
  return v ? to_json(*v) : skipped();
}

inline Json to_json(const DiagnosticsReport& d) {
  return {{"kappa", num(d.kappa)},
          {"energy_I", num(d.energy_I)},
          {"energy_J", num(d.energy_J)},
          {"overlap", section(d.overlap)},
          {"bounds", section(d.bounds)},
          {"sandwich", section(d.sandwich)},
          {"extremality", section(d.extremality)},
          {"taylor", section(d.taylor)},
          {"trivial_min", section(d.trivial_min)}};
}

/// A diagnostics block with every section skipped (used when a stage fails).
inline Json skipped_diagnostics(double kappa) {
  return {{"kappa", num(kappa)},         {"overlap", skipped()}, {"bounds", skipped()},
          {"sandwich", skipped()},       {"extremality", skipped()}, {"taylor", skipped()},
          {"trivial_min", skipped()}};
}

inline Json solve_summary(const SolveResult& r) {
  return {{"energy", num(r.energy)},
          {"residual", num(r.residual)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"stop_reason", r.stop_reason},
          {"h1_core_distance", num(r.h1_core_distance)}};
}

inline Json domain_summary(const DomainGrid& grid) {
  Json cores = Json::array();
  for (int i = 0; i < grid.num_cores(); ++i) cores.push_back(measure(grid, Label::core(i)));
  return {{"nx", grid.nx()},
          {"ny", grid.ny()},
          {"h", grid.h()},
          {"cells", grid.size()},
          {"core_measure", cores},
          {"channel_measure", measure(grid, Label::channel())},
          {"domain_measure", measure_domain(grid)}};
}

}  // namespace coexist
