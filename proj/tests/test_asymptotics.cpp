#include <gtest/gtest.h>

#include "levy_expfun/levy_expfun.hpp"
#include "oracles.hpp"

using namespace levy_expfun;

TEST(Asymptotics, DufresneCramer) {
  LevyModel m = LevyModel::brownian_drift(0, 2, 2);
  double theta = cramer_root(m);
  EXPECT_NEAR(theta, 1.0, 1e-12);
  // P(I > t) = 1 - e^{-1/(2t)} ~ 1/(2t)
  TailReport r = cramer_constant(m, theta, MomentSource{});
  EXPECT_NEAR(r.constant, 0.5, 1e-10);
  EXPECT_EQ(r.kind, TailKind::Cramer);
  EXPECT_NEAR(rate_constant(m, theta, MomentSource{}), 2.0, 1e-10);
}

TEST(Asymptotics, NoRootAndBadTilt) {
  EXPECT_THROW(cramer_root(LevyModel::killed_drift(1, 1)), NoRoot);
  EXPECT_THROW(cramer_root(load_model(oracle::model_path("neg_sub_jumps"))), NoRoot);
}

TEST(Asymptotics, SpectrallyNegativeConstantAgreesWithGeneralFormula) {
  LevyModel m = load_model(oracle::model_path("spec_neg"));
  LadderFactors f = factorize(m);
  double theta = cramer_root(m);
  EXPECT_NEAR(theta, oracle::kSpecNegRoot, 1e-12);
  DensityEstimate e = solve_renewal(m, potential_U(f), {1e-3, 1e3, 1500});
  double moment = e.mellin(theta - 1.0);
  TailReport r = cramer_constant(m, theta, MomentSource::from_density(e));
  EXPECT_NEAR(cramer_constant_spectrally_negative(m, f, theta, moment) / r.constant, 1.0, 1e-9);
  // theta^2 / (kappa(0) kappa_hat(theta + 1)), factors written out from the roots
  double rho = -oracle::kSpecNegRootDown;
  double kh = 0.5 * (theta + 1 + rho) * (theta + 1) / (theta + 1 + 2);
  EXPECT_NEAR(second_order_coefficient(m, f, theta), theta * theta / (theta * kh), 1e-12);
  EXPECT_THROW(second_order_coefficient(load_model(oracle::model_path("kou")), factorize(load_model(oracle::model_path("kou"))), 1.0),
               HypothesisFailure);
}

TEST(Asymptotics, DensityTailMatchesCramerConstant) {
  // the solved density's own tail against the predicted C t^{-theta}
  LevyModel m = load_model(oracle::model_path("kou"));
  DensityEstimate e = solve_renewal(m, potential_U(factorize(m)), {1e-3, 1e3, 1500});
  double theta = cramer_root(m);
  TailReport r = cramer_constant(m, theta, MomentSource::from_density(e));
  double t = 500.0;
  EXPECT_NEAR(e.tail_at(t) * std::pow(t, theta) / r.constant, 1.0, 0.02);
}

TEST(Asymptotics, ConvolutionEquivalentHypothesesFail) {
  LevyModel kou = load_model(oracle::model_path("kou"));
  EXPECT_THROW(convolution_equiv_tail(kou, 3.0), HypothesisFailure);
  EXPECT_THROW(convolution_equiv_tail(kou, 2.0), HypothesisFailure);
  EXPECT_THROW(convolution_equiv_tail(LevyModel::brownian_drift(0, 2, 2), 1.0), HypothesisFailure);
  EXPECT_DOUBLE_EQ(convolution_equiv_constant(2.0, 0.5), 4.0);
  EXPECT_THROW(convolution_equiv_constant(2.0, -0.5), HypothesisFailure);
}

TEST(Asymptotics, LeftTailKilled) {
  for (double q : {1.0, 2.0}) {
    LevyModel m = LevyModel::killed_drift(q, 1.0);
    SampleSet s = sample_I_path(m, 200000, 1e-2, 100, 31);
    TailReport r = left_tail(m, factorize(m), &s);
    EXPECT_EQ(r.kind, TailKind::LeftTailKilled);
    EXPECT_DOUBLE_EQ(r.constant, q);
    EXPECT_NEAR(left_tail_slope(s) / q, 1.0, 0.05);
  }
}

TEST(Asymptotics, LeftTailOutOfScope) {
  LevyModel duf = LevyModel::brownian_drift(0, 2, 2);
  EXPECT_THROW(left_tail(duf, factorize(duf)), HypothesisFailure);
  LevyModel kou = load_model(oracle::model_path("kou"));
  EXPECT_THROW(left_tail(kou, factorize(kou)), HypothesisFailure);
}

TEST(Asymptotics, TransferConstantMatchesDufresne) {
  // E[I_{-Hhat}] = 1/2 (drift 2), R_H ~ Gamma(2), E[R_H^{-1}] = 1, sup ~ Exp(1)
  LevyModel m = LevyModel::brownian_drift(0, 2, 2);
  TransferConstants c = rv_transfer_constant(m, factorize(m), 1.0);
  EXPECT_NEAR(c.upper, 0.5, 1e-9);
  EXPECT_TRUE(c.lower_degenerate);
}
