#include "sarsalab/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "sarsalab/errors.hpp"
#include "sarsalab/rng.hpp"

namespace sarsalab {
namespace {

BoundInputs reference_inputs() {
  BoundInputs in;
  in.g_const = 3.0;
  in.c_lipschitz = 0.1;
  in.n_actions = 2;
  in.lambda = 24.0;
  in.w = 0.1;
  in.w_s = 0.1;
  in.m = 1.0;
  in.rho = 0.5;
  in.inner_B = 1;
  return in;
}

TEST(LambdaConst, HandEvaluations) {
  // m = 1: ceiling term 0, lambda = 3*2*(2 + 0 + 2).
  EXPECT_DOUBLE_EQ(lambda_const(3.0, 2, 1.0, 0.5), 24.0);
  // m = 2/3, rho = 0.7: |ln m|/ln(1/rho) = 1.137 -> ceiling 2,
  // lambda = 6*(2 + 2 + 1/0.3).
  EXPECT_NEAR(lambda_const(3.0, 2, 2.0 / 3.0, 0.7), 44.0, 1e-12);
}

TEST(LambdaConst, GrowsAsMixingPrefactorShrinks) {
  const double a = lambda_const(3.0, 2, 0.5, 0.5);
  const double b = lambda_const(3.0, 2, 1e-2, 0.5);
  const double c = lambda_const(3.0, 2, 1e-4, 0.5);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

TEST(LambdaConst, ParameterValidation) {
  EXPECT_THROW(lambda_const(3.0, 2, 1.0, 1.0), ParameterError);
  EXPECT_THROW(lambda_const(3.0, 2, 1.0, 0.0), ParameterError);
  EXPECT_THROW(lambda_const(3.0, 2, 0.0, 0.5), ParameterError);
}

TEST(Tau0, Enumeration) {
  EXPECT_EQ(tau0(1.0, 0.5, 0.1), 4);   // 0.5^3 = 0.125 > 0.1, 0.5^4 <= 0.1
  EXPECT_EQ(tau0(0.05, 0.5, 0.1), 0);  // m <= alpha
  EXPECT_EQ(tau0_block(1.0, 0.5, 0.1, 3), 6);  // n = 2
  EXPECT_EQ(tau0_block(0.05, 0.5, 0.1, 3), 0);
}

TEST(Tau0, DefiningProperty) {
  Rng rng(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const double m = rng.uniform(0.05, 3.0);
    const double rho = rng.uniform(0.05, 0.95);
    const double alpha = rng.uniform(1e-6, 0.5);
    const long t = tau0(m, rho, alpha);
    EXPECT_LE(m * std::pow(rho, static_cast<double>(t)), alpha);
    if (t >= 1)
      EXPECT_GT(m * std::pow(rho, static_cast<double>(t - 1)), alpha);
  }
}

TEST(Theorem1, GoldenValue) {
  BoundInputs in = reference_inputs();
  in.horizon_T = 1 << 14;
  const BoundBreakdown out = theorem1_bound(in);
  EXPECT_TRUE(out.applicable);
  EXPECT_EQ(out.tau0, 12);
  // Regression-locked after first computation.
  EXPECT_NEAR(out.total, 80.9467984500934, 1e-10);
  EXPECT_NEAR(out.term1, 80.5842496219684, 1e-10);
  EXPECT_NEAR(out.term2, 0.36254882812499994, 1e-12);
}

TEST(Theorem1, VanishesAsHorizonGrows) {
  BoundInputs in = reference_inputs();
  in.horizon_T = 1 << 10;
  const double early = theorem1_bound(in).total;
  in.horizon_T = 1L << 22;
  const double late = theorem1_bound(in).total;
  EXPECT_LT(late, early / 100.0);
}

TEST(Theorem1, SecondTermHalvesWithDoubledHorizon) {
  BoundInputs in = reference_inputs();
  in.m = 1e-9;  // tau0 pinned at 0, so the 1/T scaling is exact
  in.horizon_T = 4096;
  const double term2 = theorem1_bound(in).term2;
  in.horizon_T = 8192;
  EXPECT_LE(theorem1_bound(in).term2, term2 / 2.0 + 1e-15);
}

TEST(Theorem1, WarnsWhenStepConstantTooLarge) {
  BoundInputs in = reference_inputs();
  in.w = 0.2;  // above w_s
  in.horizon_T = 1024;
  const BoundBreakdown out = theorem1_bound(in);
  EXPECT_FALSE(out.applicable);
  EXPECT_FALSE(out.warning.empty());
}

TEST(Theorem1, PolylogOverHorizonScaling) {
  // bound(T) * T / log^3 T stays within a narrow band, consistent with
  // O(log^3 T / T) via tau0 ~ log T.
  BoundInputs in = reference_inputs();
  double lo = 1e300;
  double hi = 0.0;
  for (int k = 10; k <= 20; ++k) {
    in.horizon_T = 1L << k;
    const double t = static_cast<double>(in.horizon_T);
    const double ratio =
        theorem1_bound(in).total * t / std::pow(std::log(t), 3.0);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_LT(hi / lo, 8.0);
  EXPECT_GT(lo, 0.0);
}

TEST(Theorem1, MonotoneDecreasingTail) {
  BoundInputs in = reference_inputs();
  double previous = 1e300;
  for (int k = 10; k <= 24; ++k) {
    in.horizon_T = 1L << k;
    const double value = theorem1_bound(in).total;
    EXPECT_LT(value, previous);
    previous = value;
  }
}

TEST(Theorem2, TransientAndPlateau) {
  BoundInputs in = reference_inputs();
  in.alpha0 = 0.01;
  in.horizon_T = 1000;
  in.theta0_error = 0.0;
  EXPECT_DOUBLE_EQ(theorem2_bound(in).term1, 0.0);  // theta_0 = theta*

  in.theta0_error = 2.0;
  const BoundBreakdown at_1k = theorem2_bound(in);
  in.horizon_T = 100000000;
  const BoundBreakdown at_inf = theorem2_bound(in);
  EXPECT_NEAR(at_inf.total, at_inf.term2, 1e-12);  // transient gone
  EXPECT_DOUBLE_EQ(at_inf.term2, at_1k.term2);     // plateau is T-free

  BoundInputs halved = in;
  halved.alpha0 = 0.005;
  EXPECT_LT(theorem2_bound(halved).term2, theorem2_bound(in).term2);
}

TEST(Theorem2, RejectsOversizedStep) {
  BoundInputs in = reference_inputs();
  in.alpha0 = 6.0;  // 1/(2 w_s) = 5
  in.horizon_T = 10;
  EXPECT_THROW(theorem2_bound(in), ParameterError);
}

TEST(Theorem3, GoldenValuesAtFixedBudget) {
  // Fixed total sample budget 2^14, B doubled: only the stated B-terms move.
  BoundInputs in = reference_inputs();
  in.inner_B = 2;
  in.horizon_T = (1 << 14) / 2;
  EXPECT_NEAR(theorem3_decaying_bound(in).total, 113.53476028888115, 1e-10);
  in.inner_B = 4;
  in.horizon_T = (1 << 14) / 4;
  EXPECT_NEAR(theorem3_decaying_bound(in).total, 114.93887156680678, 1e-10);
}

TEST(Theorem3, SameOrderAsTheorem1AtBlockOne) {
  BoundInputs in = reference_inputs();
  in.inner_B = 1;
  for (int k = 8; k <= 18; ++k) {
    in.horizon_T = 1L << k;
    const double fitted = theorem3_decaying_bound(in).total;
    const double plain = theorem1_bound(in).total;
    const double ratio = fitted / plain;
    EXPECT_GT(ratio, 1.0 / 64.0);
    EXPECT_LT(ratio, 64.0);
  }
}

TEST(Theorem3, DecayingVanishesAndConstantCapEnforced) {
  BoundInputs in = reference_inputs();
  in.inner_B = 4;
  in.horizon_T = 1L << 10;
  const double early = theorem3_decaying_bound(in).total;
  in.horizon_T = 1L << 22;
  EXPECT_LT(theorem3_decaying_bound(in).total, early / 100.0);

  in.alpha0 = 2.0;  // 1/(2 w_s B) = 1.25
  EXPECT_THROW(theorem3_constant_bound(in), ParameterError);
  in.alpha0 = 0.01;
  in.theta0_error = 1.0;
  const BoundBreakdown constant = theorem3_constant_bound(in);
  EXPECT_GT(constant.term2, 0.0);
  EXPECT_LE(constant.term1, 1.0);
}

TEST(RadiusBound, FormulaAndErrors) {
  EXPECT_DOUBLE_EQ(radius_bound(1.0, -0.5), 2.0);
  EXPECT_DOUBLE_EQ(radius_bound(0.0, -0.5), 0.0);  // zero rewards force theta* = 0
  EXPECT_THROW(radius_bound(1.0, 0.0), ParameterError);
  EXPECT_THROW(radius_bound(1.0, 0.2), ParameterError);
}

}  // namespace
}  // namespace sarsalab
