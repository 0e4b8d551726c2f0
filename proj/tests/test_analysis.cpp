#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pdenet/analysis.hpp"
#include "pdenet/random.hpp"

using namespace pdenet;

namespace {

// Closed-form integrals of t^k e^{2at} on [0, 1], for an oracle independent
// of both the quadrature and the bound's own expression.
struct Moments {
  double m0, m1, m2;
};

Moments exp_moments(double a) {
  const double b = 2 * a, e = std::exp(b);
  return {(e - 1) / b, e / b - (e - 1) / (b * b), e / b - 2 * e / (b * b) + 2 * (e - 1) / (b * b * b)};
}

double crlb_oracle(double a, double c, double sigma, double j) {
  const Moments m = exp_moments(a);
  const double faa = c * c * m.m2, fac = c * m.m1, fcc = m.m0;
  return sigma * sigma * fcc / (faa * fcc - fac * fac) / j;
}

}  // namespace

TEST(RecoveryError, Examples) {
  const Vector s{{1.0, 1.0}};
  EXPECT_EQ(recovery_error(s, s), 0.0);
  EXPECT_EQ(recovery_error(Vector{{1.0, -1.0}}, s), 1.0);
  EXPECT_EQ(recovery_error(Vector{{0.3, 0.3}}, s), 0.0);
  EXPECT_NEAR(recovery_error(Vector{{1.0, 0.0}}, s), std::sqrt(1 - 1 / std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(recovery_error(Vector{{1.0, 0.0}}, s), 0.54120, 1e-5);
  EXPECT_THROW(recovery_error(Vector::Zero(2), s), std::invalid_argument);
  EXPECT_THROW(recovery_error(Vector::Ones(3), s), std::invalid_argument);
}

TEST(RecoveryError, RandomizedProperties) {
  Rng rng(17);
  for (int rep = 0; rep < 20000; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rep % 7);
    Vector a(n), b(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = rng.normal(), b(i) = rng.normal();
    if (rep % 2) b = -2.5 * a + 1e-6 * b;  // exercise the near-collinear branch
    const double e = recovery_error(a, b);
    ASSERT_GE(e, 0.0);
    ASSERT_LE(e, 1.0);
    ASSERT_EQ(e, recovery_error(b, a));
    ASSERT_EQ(e, recovery_error(-a, b));
    ASSERT_EQ(e, recovery_error(4.0 * a, 0.25 * b));
    ASSERT_LT(recovery_error(a, -3.0 * a), 1e-12);
  }
}

TEST(Crlb, Examples) {
  EXPECT_NEAR(crlb_bound({1.0, 1.0, 1.0, 1000}), 4.5378e-3, 1e-7);
  EXPECT_NEAR(crlb_bound({0.0, 1.0, 1.0, 1000}), 0.012, 1e-15);
  const double base = crlb_bound({0.7, 1.3, 0.5, 400});
  EXPECT_NEAR(crlb_bound({0.7, 1.3, 1.0, 400}), 4 * base, 1e-15);
  EXPECT_NEAR(crlb_bound({0.7, 1.3, 0.5, 800}), 0.5 * base, 1e-15);
  EXPECT_THROW(crlb_bound({1.0, 1.0, 0.0, 10}), std::invalid_argument);
  EXPECT_THROW(crlb_bound({1.0, 0.0, 1.0, 10}), std::invalid_argument);
  EXPECT_THROW(crlb_bound({1.0, 1.0, 1.0, 0}), std::invalid_argument);
}

TEST(Crlb, MatchesIndependentOracle) {
  for (double a : {-2.0, -1.0, -0.5, -0.01, 0.01, 0.5, 1.0, 2.0, 3.0})
    EXPECT_NEAR(crlb_bound({a, 1.5, 0.3, 700}) / crlb_oracle(a, 1.5, 0.3, 700), 1.0, 1e-9) << a;
}

TEST(Crlb, ContinuousAcrossSeriesBranch) {
  for (double a : {1e-3, -1e-3}) {
    const double below = crlb_bound({std::nextafter(a, 0.0), 1.0, 1.0, 1});
    const double above = crlb_bound({a, 1.0, 1.0, 1});
    EXPECT_NEAR(below / above, 1.0, 1e-9) << a;
  }
}

TEST(Quadrature, GaussLegendreIsExactForPolynomials) {
  const QuadratureRule r = gauss_legendre(64, 0.0, 1.0);
  double w = 0, t5 = 0, t127 = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    w += r.weights[i];
    t5 += r.weights[i] * std::pow(r.nodes[i], 5);
    t127 += r.weights[i] * std::pow(r.nodes[i], 127);
  }
  EXPECT_NEAR(w, 1.0, 1e-14);
  EXPECT_NEAR(t5, 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(t127, 1.0 / 128.0, 1e-14);
  const QuadratureRule three = gauss_legendre(3);
  EXPECT_NEAR(three.nodes[2], std::sqrt(0.6), 1e-15);
  EXPECT_NEAR(three.weights[1], 8.0 / 9.0, 1e-15);
}

TEST(Fisher, EntriesAtZeroGrowth) {
  const FisherMatrix f = fisher_numeric(0.0, 2.0, 0.5);
  EXPECT_NEAR(f.CC, 4.0, 1e-13);
  EXPECT_NEAR(f.aC, 2.0 / (2 * 0.25), 1e-13);
  EXPECT_NEAR(f.aa, 4.0 / (3 * 0.25), 1e-13);
}

TEST(Fisher, SigmaScalingAndPsd) {
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const double a = rng.uniform(-3, 3), c = rng.uniform(0.1, 3);
    const FisherMatrix f1 = fisher_numeric(a, c, 1.0), f2 = fisher_numeric(a, c, 2.0);
    EXPECT_EQ(f2.aa, f1.aa / 4);
    EXPECT_EQ(f2.CC, f1.CC / 4);
    EXPECT_GE(f1.aa, 0.0);
    EXPECT_GE(f1.CC, 0.0);
    EXPECT_GE(f1.aa * f1.CC - f1.aC * f1.aC, -1e-12);
  }
}

TEST(Fisher, InverseReproducesBound) {
  for (double a : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
    const FisherMatrix f = fisher_numeric(a, 1.0, 1.0);
    EXPECT_NEAR(f.inverse_aa() / 1000.0 / crlb_bound({a, 1.0, 1.0, 1000}), 1.0, 1e-10) << a;
  }
  const FisherMatrix f = fisher_numeric(1.0, 1.0, 1.0);
  EXPECT_NEAR(f.inverse_aa() / 1000.0, crlb_oracle(1.0, 1.0, 1.0, 1000), 1e-15);
}

TEST(GrowthRate, RatioAndDegenerate) {
  EXPECT_DOUBLE_EQ(*growth_rate_from_phi(Vector{{1.0, -1.0}} / std::sqrt(2.0)), 1.0);
  EXPECT_DOUBLE_EQ(*growth_rate_from_phi(Vector{{-0.5, 1.0}}), 2.0);
  EXPECT_FALSE(growth_rate_from_phi(Vector{{1e-12, 1.0}}).has_value());
  EXPECT_THROW(growth_rate_from_phi(Vector::Ones(3)), std::invalid_argument);
}

TEST(TrialSeed, StableAndDistinct) {
  EXPECT_EQ(trial_seed(0, "wave", 0.01, 0), trial_seed(0, "wave", 0.01, 0));
  EXPECT_NE(trial_seed(0, "wave", 0.01, 0), trial_seed(0, "wave", 0.01, 1));
  EXPECT_NE(trial_seed(0, "wave", 0.01, 0), trial_seed(0, "wave", 0.1, 0));
  EXPECT_NE(trial_seed(0, "wave", 0.01, 0), trial_seed(0, "kdv", 0.01, 0));
  EXPECT_EQ(trial_seed(5, "wave", 0.0, 2), trial_seed(0, "wave", 0.0, 2) + 5);
}

TEST(OdeExperiment, DeterministicSmallRun) {
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.hidden = {8, 8};
  const OdeExperiment a = ode_experiment({0.1}, 1, 100, 4, cfg, LossWeights{});
  const OdeExperiment b = ode_experiment({0.1}, 1, 100, 4, cfg, LossWeights{});
  ASSERT_EQ(a.trials.size(), 1u);
  ASSERT_EQ(a.levels.size(), 1u);
  EXPECT_EQ(a.trials[0].a_hat, b.trials[0].a_hat);
  EXPECT_EQ(a.levels[0].mse, b.levels[0].mse);
  EXPECT_EQ(a.levels[0].crlb, crlb_bound({1.0, 1.0, 0.1, 100}));
  EXPECT_EQ(a.trials[0].seed, trial_seed(4, "ode_exp", 0.1, 0));
}
