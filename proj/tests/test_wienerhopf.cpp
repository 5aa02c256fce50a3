#include <gtest/gtest.h>

#include "levy_expfun/levy_expfun.hpp"
#include "oracles.hpp"

using namespace levy_expfun;

namespace {
const char* kCatalog[] = {"killed_drift", "killed_drift_q2", "bm_drift", "drift_sub",
                          "neg_sub_jumps", "spec_neg",        "kou",      "kou_killed"};
}

TEST(WienerHopf, ResidualOnCatalog) {
  for (const char* name : kCatalog) {
    LevyModel m = load_model(oracle::model_path(name));
    LadderFactors f = factorize(m);
    EXPECT_LT(factorization_residual(m, f, 50), 1e-10) << name;
    // q = kappa(q,0) kappa_hat(q,0)
    EXPECT_NEAR(f.kill_up * f.kill_down, m.q, 1e-12) << name;
  }
}

TEST(WienerHopf, RootsMatchOracle) {
  LadderFactors kou = factorize(load_model(oracle::model_path("kou")));
  ASSERT_EQ(kou.kappa.roots.size(), 2u);
  EXPECT_NEAR(kou.kappa.roots[0], oracle::kKouRootsUp[0], 1e-12);
  EXPECT_NEAR(kou.kappa.roots[1], oracle::kKouRootsUp[1], 1e-12);
  ASSERT_EQ(kou.kappa_hat.roots.size(), 2u);
  EXPECT_NEAR(kou.kappa_hat.roots[0], -oracle::kKouRootDown, 1e-12);
  EXPECT_EQ(kou.kappa_hat.roots[1], 0.0);
  EXPECT_DOUBLE_EQ(kou.kappa_hat.scale, 0.5);

  LadderFactors kk = factorize(load_model(oracle::model_path("kou_killed")));
  EXPECT_NEAR(kk.kappa.roots[0], oracle::kKouKilledRoots[0], 1e-12);
  EXPECT_NEAR(kk.kappa.roots[1], oracle::kKouKilledRoots[1], 1e-12);
  EXPECT_NEAR(kk.kappa_hat.roots[0], -oracle::kKouKilledRoots[2], 1e-12);
  EXPECT_NEAR(kk.kappa_hat.roots[1], -oracle::kKouKilledRoots[3], 1e-12);

  LadderFactors sn = factorize(load_model(oracle::model_path("spec_neg")));
  // spectrally negative: H is a pure drift killed at the positive root
  EXPECT_TRUE(sn.kappa.poles.empty());
  EXPECT_NEAR(sn.kill_up, oracle::kSpecNegRoot, 1e-12);
  EXPECT_NEAR(sn.kappa_hat.roots[0], -oracle::kSpecNegRootDown, 1e-12);

  // NegSubordinator: phi(l) = 1 + l + l/(l + 2), roots -2 +- sqrt 2
  LadderFactors ns = factorize(load_model(oracle::model_path("neg_sub_jumps")));
  EXPECT_NEAR(ns.kappa_hat.roots[0], 2 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(ns.kappa_hat.roots[1], 2 - std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(ns.kill_up, 1.0);
}

TEST(WienerHopf, PotentialLaplaceIsInverseExponent) {
  for (const char* name : kCatalog) {
    LevyModel m = load_model(oracle::model_path(name));
    LadderFactors f = factorize(m);
    TwoSidedPotential U = potential_U(f);
    double hi = f.kappa.roots.empty() ? 1.5 : f.kappa.roots.front();
    double lo = f.kappa_hat.roots.empty() ? -1.5 : -*std::min_element(f.kappa_hat.roots.begin(), f.kappa_hat.roots.end());
    if (m.has_up_jumps()) hi = std::min(hi, m.jumps.eta_plus);
    for (int i = 1; i < 10; ++i) {
      double b = lo + (hi - lo) * i / 10.0;
      if (std::abs(b) < 1e-9) continue;
      double want = 1.0 / laplace_exponent(m, b);
      EXPECT_NEAR(U.laplace(b) / want, 1.0, 1e-9) << name << " b=" << b;
    }
    EXPECT_NEAR(f.V_H().laplace(0.7) * f.kappa(0.7), 1.0, 1e-12) << name;
    EXPECT_NEAR(f.V_Hhat().laplace(0.7) * f.kappa_hat(0.7), 1.0, 1e-12) << name;
  }
}

TEST(WienerHopf, DufresneSupremumIsExponential) {
  // sup of 2B - 2t is Exp(1)
  LadderFactors f = factorize(LevyModel::brownian_drift(0, 2, 2));
  PotentialMeasure sup = supremum_law(f);
  EXPECT_NEAR(sup.mass(), 1.0, 1e-14);
  EXPECT_NEAR(sup.atom0, 0.0, 1e-14);
  for (double x : {0.1, 1.0, 3.0}) EXPECT_NEAR(sup.tail(x), std::exp(-x), 1e-13);
}

TEST(WienerHopf, SpectrallyNegativeSupremum) {
  // P(sup xi > x) = e^{-theta x} when there are no positive jumps
  LadderFactors f = factorize(load_model(oracle::model_path("spec_neg")));
  PotentialMeasure sup = supremum_law(f);
  for (double x : {0.2, 1.0}) EXPECT_NEAR(sup.tail(x), std::exp(-oracle::kSpecNegRoot * x), 1e-12);
}

TEST(WienerHopf, VigonTailMatchesLadderJumps) {
  for (const char* name : {"kou", "kou_killed"}) {
    LevyModel m = load_model(oracle::model_path(name));
    LadderFactors f = factorize(m);
    SubordinatorModel H = f.H();
    ASSERT_TRUE(H.jumps.has_value());
    for (double x : {0.0, 0.5, 2.0})
      EXPECT_NEAR(vigon_tail(m, f, x), H.jumps->intensity * std::exp(-H.jumps->rate * x), 1e-12) << name;
  }
  EXPECT_THROW(vigon_tail(load_model(oracle::model_path("spec_neg")), factorize(load_model(oracle::model_path("spec_neg"))), 1.0),
               UnsupportedModel);
}

TEST(WienerHopf, LadderSubordinatorsReproduceFactors) {
  for (const char* name : kCatalog) {
    LadderFactors f = factorize(load_model(oracle::model_path(name)));
    SubordinatorModel H = f.H(), Hh = f.Hhat();
    for (double l : {0.25, 1.0, 4.0}) {
      EXPECT_NEAR(H.phi(l), f.kappa(l), 1e-12 * (1 + f.kappa(l))) << name;
      EXPECT_NEAR(Hh.phi(l), f.kappa_hat(l), 1e-12 * (1 + f.kappa_hat(l))) << name;
    }
  }
}

TEST(Potential, RepeatedRootsRejected) {
  RationalExponent r{1.0, {1.0, 1.0}, {}};
  EXPECT_THROW(r.reciprocal_measure(), RootFindingFailure);
}

TEST(Potential, PolynomialRoots) {
  // (x - 1)(x + 2)(x - 3) = x^3 - 2x^2 - 5x + 6, coefficients low to high
  auto roots = real_polynomial_roots({6.0, -5.0, -2.0, 1.0});
  std::sort(roots.begin(), roots.end());
  ASSERT_EQ(roots.size(), 3u);
  EXPECT_NEAR(roots[0], -2.0, 1e-13);
  EXPECT_NEAR(roots[1], 1.0, 1e-13);
  EXPECT_NEAR(roots[2], 3.0, 1e-13);
  EXPECT_THROW(real_polynomial_roots({1.0, 0.0, 1.0}), RootFindingFailure);
}
