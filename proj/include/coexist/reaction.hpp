// Species growth laws and the truncated potentials used by the penalized energy.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coexist {

inline constexpr double kCapacityLower = 1e-9;
inline constexpr double kCapacityTolerance = 1e-12;

/// A growth law f = F' with potential F. Implementations must be pure.
class GrowthLaw {
 public:
  virtual ~GrowthLaw() = default;
  [[nodiscard]] virtual std::string family() const = 0;
  [[nodiscard]] virtual double potential(double t) const = 0;   // F(t)
  [[nodiscard]] virtual double growth(double t) const = 0;      // f(t)
  [[nodiscard]] virtual double growth_rate(double t) const = 0; // f'(t)
  /// Bracket (lo, hi) in which f(t) - t changes sign once, positive at lo.
  [[nodiscard]] virtual double root_bracket_lower() const { return kCapacityLower; }
  [[nodiscard]] virtual double root_bracket_upper() const = 0;
};

namespace detail {

// |t|^q with a fast path for the small integer exponents used in practice.
inline double abs_pow(double t, double q) noexcept {
  const double a = std::abs(t);
  if (q == 1.0) return a;
  if (q == 2.0) return a * a;
  if (q == 3.0) return a * a * a;
  if (q == 4.0) return (a * a) * (a * a);
  return std::pow(a, q);
}

}  // namespace detail

/// f(u) = λu − |u|^{p−1}u, F(t) = λt²/2 − |t|^{p+1}/(p+1).
class LogisticLaw final : public GrowthLaw {
 public:
  LogisticLaw(double lambda, double p) : lambda_(lambda), p_(p) {}

  [[nodiscard]] std::string family() const override { return "logistic"; }
  [[nodiscard]] double potential(double t) const override {
    return 0.5 * lambda_ * t * t - detail::abs_pow(t, p_ + 1.0) / (p_ + 1.0);
  }
  [[nodiscard]] double growth(double t) const override {
    return lambda_ * t - detail::abs_pow(t, p_ - 1.0) * t;
  }
  [[nodiscard]] double growth_rate(double t) const override {
    return lambda_ - p_ * detail::abs_pow(t, p_ - 1.0);
  }
  // The root is (λ−1)^{1/(p−1)}; bracketing it by a factor of two keeps
  // bisection accurate when it is tiny or huge.
  [[nodiscard]] double root_bracket_lower() const override { return 0.5 * scale(); }
  [[nodiscard]] double root_bracket_upper() const override { return 2.0 * scale(); }

  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  [[nodiscard]] double exponent() const noexcept { return p_; }

 private:
  [[nodiscard]] double scale() const { return std::pow(lambda_ - 1.0, 1.0 / (p_ - 1.0)); }

  double lambda_;
  double p_;
};

/// Values of the truncated potentials at one density.
struct Truncated {
  double F_tilde;  // F̃(t)
  double f_tilde;  // f̃(t) = F̃'(t)
  double G;        // G(t)
  double g;        // g(t) = G'(t)
};

/// A growth law together with its derived constants.
class ReactionModel {
 public:
  ReactionModel(std::shared_ptr<const GrowthLaw> law, double capacity)
      : law_(std::move(law)),
        capacity_(capacity),
        potential_at_capacity_(law_->potential(capacity)),
        energy_density_(potential_at_capacity_ - 0.5 * capacity * capacity),
        rate_at_zero_(law_->growth_rate(0.0)),
        rate_at_capacity_(law_->growth_rate(capacity)) {}

  [[nodiscard]] const GrowthLaw& law() const noexcept { return *law_; }
  [[nodiscard]] std::string family() const { return law_->family(); }

  [[nodiscard]] double F(double t) const { return law_->potential(t); }
  [[nodiscard]] double f(double t) const { return law_->growth(t); }
  [[nodiscard]] double df(double t) const { return law_->growth_rate(t); }

  /// A: the positive root of f(t) = t.
  [[nodiscard]] double capacity() const noexcept { return capacity_; }
  /// μ = F(A) − A²/2.
  [[nodiscard]] double energy_density() const noexcept { return energy_density_; }
  [[nodiscard]] double rate_at_zero() const noexcept { return rate_at_zero_; }
  [[nodiscard]] double rate_at_capacity() const noexcept { return rate_at_capacity_; }

  [[nodiscard]] double F_tilde(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= capacity_) return F(t);
    return capacity_ * t + potential_at_capacity_ - capacity_ * capacity_;
  }
  [[nodiscard]] double f_tilde(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= capacity_) return f(t);
    return capacity_;
  }
  [[nodiscard]] double G(double t) const noexcept {
    const double a = std::abs(t);
    return a <= capacity_ ? t * t : 2.0 * capacity_ * a - capacity_ * capacity_;
  }
  [[nodiscard]] double g(double t) const noexcept {
    if (std::abs(t) <= capacity_) return 2.0 * t;
    return t > 0.0 ? 2.0 * capacity_ : -2.0 * capacity_;
  }

  [[nodiscard]] Truncated truncated(double t) const { return {F_tilde(t), f_tilde(t), G(t), g(t)}; }

 private:
  std::shared_ptr<const GrowthLaw> law_;
  double capacity_;
  double potential_at_capacity_;
  double energy_density_;
  double rate_at_zero_;
  double rate_at_capacity_;
};

/// Bisection for f(t) = t on the law's bracket, to relative width kCapacityTolerance.
inline double find_capacity(const GrowthLaw& law) {
  double lo = law.root_bracket_lower();
  double hi = law.root_bracket_upper();
  auto excess = [&](double t) { return law.growth(t) - t; };
  double flo = excess(lo);
  const double fhi = excess(hi);
  if (!(flo > 0.0) || !(fhi < 0.0)) {
    throw std::domain_error("growth law has no sign change of f(t) - t on the bracket");
  }
  while (hi - lo > kCapacityTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    const double fm = excess(mid);
    if (fm > 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline ReactionModel make_model(std::shared_ptr<const GrowthLaw> law) {
  const double a = find_capacity(*law);
  return ReactionModel(std::move(law), a);
}

inline ReactionModel make_logistic(double lambda, double p) {
  if (!(lambda > 1.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("logistic growth needs lambda > 1, got " + std::to_string(lambda));
  }
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("logistic growth needs p > 1, got " + std::to_string(p));
  }
  return make_model(std::make_shared<LogisticLaw>(lambda, p));
}

struct SpeciesAssumptions {
  bool zero_at_origin = false;    // F(0) = 0, f(0) = 0
  bool capacity_is_max = false;   // f(A) = A and μ = max_{t≥0}(F(t) − t²/2)
  bool stable_capacity = false;   // f'(A) < 1 by at least kStabilityMargin
  double rate_at_capacity = 0.0;
  double sampled_max = 0.0;       // max of F(t) − t²/2 over the samples
  [[nodiscard]] bool all() const noexcept { return zero_at_origin && capacity_is_max && stable_capacity; }
};

struct AssumptionReport {
  std::vector<SpeciesAssumptions> species;
  double nu = 0.0;               // min_i {1, 1 − f'_i(A_i)}
  double eta = 0.0;              // min {ν/4, 1/8}
  double kappa_threshold = 0.0;  // max 2 f'_i(0) / A_j²
  [[nodiscard]] bool all_pass() const noexcept {
    return std::all_of(species.begin(), species.end(), [](const auto& s) { return s.all(); });
  }
};

inline constexpr int kMaxSamples = 10000;
// f'(A) within this of 1 leaves ν, and with it η, numerically zero.
inline constexpr double kStabilityMargin = 1e-8;

inline AssumptionReport check_assumptions(std::span<const ReactionModel> models) {
  if (models.empty()) throw std::invalid_argument("check_assumptions: no species");
  AssumptionReport rep;
  rep.nu = 1.0;
  for (const auto& m : models) {
    SpeciesAssumptions s;
    const double a = m.capacity();
    s.zero_at_origin = std::abs(m.F(0.0)) <= 1e-14 && std::abs(m.f(0.0)) <= 1e-14;
    double best = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < kMaxSamples; ++n) {
      const double t = 3.0 * a * n / (kMaxSamples - 1);
      best = std::max(best, m.F(t) - 0.5 * t * t);
    }
    s.sampled_max = best;
    const double mu = m.energy_density();
    s.capacity_is_max = std::abs(m.f(a) - a) <= 1e-9 * std::max(1.0, a) && best <= mu + 1e-9 * (1.0 + std::abs(mu));
    s.rate_at_capacity = m.rate_at_capacity();
    s.stable_capacity = s.rate_at_capacity < 1.0 - kStabilityMargin;
    rep.nu = std::min(rep.nu, 1.0 - s.rate_at_capacity);
    rep.species.push_back(s);
  }
  rep.eta = std::min(rep.nu / 4.0, 1.0 / 8.0);
  // Pairs i ≠ j; a lone species is compared with itself.
  double thr = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = 0; j < models.size(); ++j) {
      if (i == j && models.size() > 1) continue;
      const double aj = models[j].capacity();
      thr = std::max(thr, 2.0 * models[i].rate_at_zero() / (aj * aj));
    }
  }
  rep.kappa_threshold = thr;
  return rep;
}

inline Truncated eval_truncated(const ReactionModel& model, double t) { return model.truncated(t); }

}  // namespace coexist
