#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "coexist/reaction.hpp"

using namespace coexist;

namespace {

// Closed-form capacity: λA − A^p = A gives A = (λ−1)^{1/(p−1)}.
double capacity_oracle(double lambda, double p) { return std::pow(lambda - 1.0, 1.0 / (p - 1.0)); }

double F_oracle(double lambda, double p, double t) {
  return lambda * t * t / 2.0 - std::pow(std::abs(t), p + 1.0) / (p + 1.0);
}

}  // namespace

TEST(Logistic, CapacityAndEnergyDensity22) {
  const auto m = make_logistic(2.0, 2.0);
  EXPECT_NEAR(m.capacity(), 1.0, 1e-11);
  EXPECT_NEAR(m.energy_density(), 1.0 / 6.0, 1e-11);
  EXPECT_NEAR(m.F(1.0), 2.0 / 3.0, 1e-15);
}

TEST(Logistic, CapacityAndEnergyDensity33) {
  const auto m = make_logistic(3.0, 3.0);
  EXPECT_NEAR(m.capacity(), std::sqrt(2.0), 1e-11);
  EXPECT_NEAR(m.energy_density(), 1.0, 1e-10);
}

TEST(Logistic, CapacityAndEnergyDensity152) {
  const auto m = make_logistic(1.5, 2.0);
  EXPECT_NEAR(m.capacity(), 0.5, 1e-11);
  EXPECT_NEAR(m.energy_density(), 0.0208333, 1e-7);
}

TEST(Logistic, ParameterRange) {
  EXPECT_THROW(make_logistic(1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(make_logistic(2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_logistic(0.5, 0.5), std::invalid_argument);
  EXPECT_NO_THROW(make_logistic(1.01, 1.01));
}

TEST(Logistic, MatchesClosedFormOverSweep) {
  for (double lambda : {1.1, 1.5, 2.0, 3.0, 5.0, 10.0}) {
    for (double p : {1.2, 1.5, 2.0, 2.5, 3.0, 5.0, 10.0}) {
      const auto m = make_logistic(lambda, p);
      const double a = capacity_oracle(lambda, p);
      EXPECT_NEAR(m.capacity(), a, 1e-10 * std::max(1.0, a)) << lambda << " " << p;
      EXPECT_NEAR(m.energy_density(), F_oracle(lambda, p, a) - a * a / 2, 1e-12 * std::max(1.0, m.energy_density())) << lambda << " " << p;
      EXPECT_NEAR(m.f(m.capacity()), m.capacity(), 1e-9 * std::max(1.0, a));
    }
  }
}

TEST(Assumptions, SingleLogistic22) {
  const std::vector<ReactionModel> ms{make_logistic(2, 2)};
  const auto r = check_assumptions(ms);
  EXPECT_TRUE(r.all_pass());
  EXPECT_NEAR(r.species[0].rate_at_capacity, 0.0, 1e-10);
  EXPECT_NEAR(r.nu, 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(r.eta, 0.125);
  EXPECT_NEAR(r.kappa_threshold, 4.0, 1e-10);
}

TEST(Assumptions, MixedPair) {
  const std::vector<ReactionModel> ms{make_logistic(2, 2), make_logistic(3, 3)};
  const auto r = check_assumptions(ms);
  EXPECT_TRUE(r.all_pass());
  EXPECT_NEAR(r.nu, 1.0, 1e-10);
  EXPECT_NEAR(r.kappa_threshold, 6.0, 1e-9);
}

TEST(Assumptions, Logistic152) {
  const std::vector<ReactionModel> ms{make_logistic(1.5, 2)};
  const auto r = check_assumptions(ms);
  EXPECT_TRUE(r.all_pass());
  EXPECT_NEAR(r.species[0].rate_at_capacity, 0.5, 1e-10);
  EXPECT_NEAR(r.nu, 0.5, 1e-10);
  EXPECT_NEAR(r.eta, 0.125, 1e-10);
}

TEST(Assumptions, EmptyListRejected) {
  EXPECT_THROW(check_assumptions(std::span<const ReactionModel>{}), std::invalid_argument);
}

TEST(Assumptions, StableCapacityOverSweep) {
  for (double lambda = 1.25; lambda <= 10.0; lambda += 0.75) {
    for (double p = 1.25; p <= 10.0; p += 0.75) {
      const std::vector<ReactionModel> ms{make_logistic(lambda, p)};
      const auto r = check_assumptions(ms);
      EXPECT_TRUE(r.all_pass()) << lambda << " " << p;
      EXPECT_LT(r.species[0].rate_at_capacity, 1.0);
      EXPECT_GT(r.nu, 0.0);
      EXPECT_LE(r.eta, 0.125);
    }
  }
}

// A growth law with f'(A) = 1 exactly must be flagged as unstable.
namespace {
class DegenerateLaw final : public GrowthLaw {
 public:
  // f(t) = t − t(t−1)³, so f(1) = 1 and f'(1) = 1.
  std::string family() const override { return "degenerate"; }
  double potential(double t) const override {
    const double v = t - 1.0;
    return t * t / 2 - (std::pow(v, 5) / 5 + std::pow(v, 4) / 4 - 1.0 / 20);
  }
  double growth(double t) const override { return t - t * std::pow(t - 1.0, 3); }
  double growth_rate(double t) const override {
    return 1 - std::pow(t - 1.0, 3) - 3 * t * std::pow(t - 1.0, 2);
  }
  double root_bracket_upper() const override { return 3.0; }
};
}  // namespace

TEST(Assumptions, UnstableCapacityFlagged) {
  const std::vector<ReactionModel> ms{make_model(std::make_shared<DegenerateLaw>())};
  // Triple root: in double precision f(t) − t changes sign within about ε^{1/3} of it.
  EXPECT_NEAR(ms[0].capacity(), 1.0, 1e-5);
  const auto r = check_assumptions(ms);
  EXPECT_TRUE(r.species[0].zero_at_origin);
  EXPECT_TRUE(r.species[0].capacity_is_max);
  EXPECT_FALSE(r.species[0].stable_capacity);
  EXPECT_FALSE(r.all_pass());
}

TEST(Truncation, NegativeArgument) {
  const auto t = eval_truncated(make_logistic(2, 2), -0.5);
  EXPECT_EQ(t.F_tilde, 0.0);
  EXPECT_EQ(t.f_tilde, 0.0);
  EXPECT_DOUBLE_EQ(t.G, 0.25);
  EXPECT_DOUBLE_EQ(t.g, -1.0);
}

TEST(Truncation, AboveCapacity) {
  const auto t = eval_truncated(make_logistic(2, 2), 2.0);
  EXPECT_NEAR(t.F_tilde, 5.0 / 3.0, 1e-10);
  EXPECT_NEAR(t.f_tilde, 1.0, 1e-10);
  EXPECT_NEAR(t.G, 3.0, 1e-10);
  EXPECT_NEAR(t.g, 2.0, 1e-10);
}

TEST(Truncation, MiddleBranch) {
  const auto t = eval_truncated(make_logistic(2, 2), 0.5);
  EXPECT_NEAR(t.F_tilde, 0.2083333333, 1e-9);
  EXPECT_NEAR(t.f_tilde, 0.75, 1e-12);
  EXPECT_DOUBLE_EQ(t.G, 0.25);
  EXPECT_DOUBLE_EQ(t.g, 1.0);
}

TEST(Property, ContinuityAtBreakpoints) {
  for (auto [lambda, p] : {std::pair{2.0, 2.0}, {3.0, 3.0}, {1.5, 2.0}, {4.0, 1.5}}) {
    const auto m = make_logistic(lambda, p);
    const double a = m.capacity();
    const double e = 1e-8;
    EXPECT_LE(std::abs(m.F_tilde(a + e) - m.F_tilde(a)), 1e-6 * a);
    EXPECT_LE(std::abs(m.F_tilde(a - e) - m.F_tilde(a)), 1e-6 * a);
    EXPECT_LE(std::abs(m.G(a + e) - m.G(a)), 1e-6 * a);
    EXPECT_LE(std::abs(m.G(-a - e) - m.G(-a)), 1e-6 * a);
    EXPECT_LE(std::abs(m.f_tilde(e) - m.f_tilde(-e)), 1e-6 * a);
    EXPECT_LE(std::abs(m.f_tilde(a + e) - m.f_tilde(a - e)), 1e-6 * a);
    EXPECT_LE(std::abs(m.g(a + e) - m.g(a - e)), 1e-6 * a);
    EXPECT_LE(std::abs(m.g(-a + e) - m.g(-a - e)), 1e-6 * a);
  }
}

TEST(Property, DerivativeConsistency) {
  std::mt19937_64 rng(7);
  for (auto [lambda, p] : {std::pair{2.0, 2.0}, {3.0, 3.0}, {1.5, 2.0}, {4.0, 1.5}}) {
    const auto m = make_logistic(lambda, p);
    const double a = m.capacity();
    std::uniform_real_distribution<double> t_dist(-3 * a, 3 * a);
    for (int n = 0; n < 200; ++n) {
      const double t = t_dist(rng);
      if (std::abs(t) < 1e-3 || std::abs(std::abs(t) - a) < 1e-3) continue;
      const double s = 1e-6;
      const double dF = (m.F_tilde(t + s) - m.F_tilde(t - s)) / (2 * s);
      const double dG = (m.G(t + s) - m.G(t - s)) / (2 * s);
      EXPECT_LE(std::abs(dF - m.f_tilde(t)), 1e-5 * std::max(1.0, std::abs(m.f_tilde(t)))) << t;
      EXPECT_LE(std::abs(dG - m.g(t)), 1e-5 * std::max(1.0, std::abs(m.g(t)))) << t;
    }
  }
}

TEST(Property, CoercivityBound) {
  for (auto [lambda, p] : {std::pair{2.0, 2.0}, {3.0, 3.0}, {1.5, 2.0}, {6.0, 4.0}}) {
    const auto m = make_logistic(lambda, p);
    const double a = m.capacity();
    const double floor = 0.5 * a * a - m.F(a);
    for (int n = -2000; n <= 2000; ++n) {
      const double t = 5.0 * a * n / 2000.0;
      EXPECT_GE(0.5 * t * t - m.F_tilde(t), floor - 1e-12) << t;
    }
  }
}

TEST(Property, TruncationMonotone) {
  const auto m = make_logistic(2.5, 3.0);
  double prevF = -1e300;
  double prevG = -1e300;
  for (int n = 0; n <= 1000; ++n) {
    const double t = 3.0 * n / 1000.0;
    EXPECT_GE(m.F_tilde(t) - prevF, -1e-15 * (1.0 + std::abs(prevF)));
    EXPECT_GE(m.G(t), prevG);
    EXPECT_EQ(m.G(t), m.G(-t));
    prevF = m.F_tilde(t);
    prevG = m.G(t);
  }
}
