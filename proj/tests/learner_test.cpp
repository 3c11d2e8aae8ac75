#include "sarsalab/learner.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sarsalab/errors.hpp"
#include "sarsalab/oracle.hpp"

namespace sarsalab {
namespace {

Observation obs(int x, int a, int x_next, int a_next, double reward) {
  return Observation{x, a, x_next, a_next, reward};
}

TEST(TdError, ZeroParameterGivesReward) {
  const FeatureMap fm = one_hot_features(2, 2);
  EXPECT_DOUBLE_EQ(
      td_error(Eigen::VectorXd::Zero(4), obs(0, 0, 1, 1, 0.25), 0.5, fm), 0.25);
}

TEST(TdError, ExactFitAtGammaZero) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  Eigen::VectorXd theta(4);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) theta[x * 2 + a] = mdp.reward(x, a);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      EXPECT_DOUBLE_EQ(
          td_error(theta, obs(x, a, 1, 0, mdp.reward(x, a)), 0.0, fm), 0.0);
}

TEST(TdError, HandEvaluationOnTwoState) {
  const FeatureMap fm = one_hot_features(2, 2);
  const Eigen::VectorXd theta = Eigen::VectorXd::Ones(4);
  EXPECT_DOUBLE_EQ(td_error(theta, obs(0, 0, 1, 1, 0.25), 0.5, fm), -0.25);
}

TEST(SemiGradient, SupportAndBound) {
  const FeatureMap fm = one_hot_features(2, 2);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd theta(4);
  theta << 0.25, 0.375, 0.5, 0.75;
  // delta = 0 case: zero vector
  EXPECT_DOUBLE_EQ(
      semi_gradient(theta, obs(0, 0, 1, 0, 0.25), 0.0, fm).norm(), 0.0);
  // one-hot support on the (x,a) coordinate with value delta
  const Eigen::VectorXd g = semi_gradient(zero, obs(1, 1, 0, 0, 0.75), 0.5, fm);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g[i], i == 3 ? 0.75 : 0.0);
  // ||g|| <= r_max + 2R with R = 1, r_max = 1
  Rng rng(3);
  const FeatureMap random_fm = random_features(3, 2, 4, 9);
  for (int rep = 0; rep < 1000; ++rep) {
    const Eigen::VectorXd sample = sample_ball(4, 1.0, rng);
    const Observation o = obs(rng.uniform_int(3), rng.uniform_int(2),
                              rng.uniform_int(3), rng.uniform_int(2),
                              rng.uniform());
    EXPECT_LE(semi_gradient(sample, o, 0.9, random_fm).norm(), 3.0);
  }
}

TEST(Project, InteriorAndRadialScaling) {
  Eigen::VectorXd inside(2);
  inside << 0.3, 0.4;
  EXPECT_EQ(project(inside, 1.0), inside);
  Eigen::VectorXd outside = Eigen::VectorXd::Zero(3);
  outside[0] = 2.0;
  const Eigen::VectorXd projected = project(outside, 1.0);
  EXPECT_DOUBLE_EQ(projected[0], 1.0);
  EXPECT_DOUBLE_EQ(projected[1], 0.0);
}

TEST(Project, NonExpansiveOverRandomPairs) {
  Rng rng(5);
  for (int rep = 0; rep < 10000; ++rep) {
    const Eigen::VectorXd u = 3.0 * sample_ball(4, 1.0, rng);
    const Eigen::VectorXd v = 3.0 * sample_ball(4, 1.0, rng);
    const double before = (u - v).norm();
    const double after = (project(u, 1.0) - project(v, 1.0)).norm();
    EXPECT_LE(after, before * (1.0 + 1e-12) + 1e-15);
  }
}

TEST(Project, ResultNormNeverExceedsRadius) {
  Rng rng(6);
  for (int rep = 0; rep < 10000; ++rep) {
    Eigen::VectorXd v = 1e8 * sample_ball(6, 1.0, rng);
    EXPECT_LE(project(v, 0.7).norm(), 0.7);
  }
}

TEST(StepSize, Schedules) {
  EXPECT_DOUBLE_EQ(step_size(StepSchedule::decaying(0.5), 0), 1.0);
  EXPECT_DOUBLE_EQ(step_size(StepSchedule::decaying(0.5), 9), 0.1);
  EXPECT_DOUBLE_EQ(step_size(StepSchedule::constant(0.01), 12345), 0.01);
  const StepSchedule fitted = StepSchedule::fitted_decaying(0.5, 4);
  EXPECT_DOUBLE_EQ(fitted.at(0), 1.0 / (std::sqrt(2.0) * 4 * 0.5));
  EXPECT_DOUBLE_EQ(fitted.at(5), 1.0 / (2.0 * 5 * 0.5));
  EXPECT_THROW(StepSchedule::decaying(0.0), ParameterError);
  EXPECT_THROW(StepSchedule::constant(-0.1), ParameterError);
}

LearnerConfig base_config(double radius, StepSchedule schedule, long horizon,
                          int inner_b, std::uint64_t seed) {
  LearnerConfig cfg;
  cfg.radius = radius;
  cfg.schedule = schedule;
  cfg.horizon = horizon;
  cfg.inner_b = inner_b;
  cfg.seed = seed;
  return cfg;
}

TEST(RunSarsa, ZeroStepSizeFreezesParameters) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  LearnerConfig cfg = base_config(2.0, StepSchedule::constant(0.0), 500, 1, 17);
  Eigen::VectorXd theta0(4);
  theta0 << 0.1, -0.2, 0.3, 0.0;
  cfg.theta0 = theta0;
  const ThetaTrace trace =
      run_sarsa(mdp, fm, PolicyOperator::softmax(5.0), cfg, {0, 100, 500});
  for (const Eigen::VectorXd& theta : trace.thetas) EXPECT_EQ(theta, theta0);
  EXPECT_EQ(trace.observations_consumed, 500);
}

TEST(RunSarsa, GammaZeroConvergesToRewardTable) {
  FiniteMdp mdp = two_state_mdp();
  mdp.gamma = 0.0;
  const FeatureMap fm = one_hot_features(2, 2);
  const PolicyOperator op = PolicyOperator::softmax(5.0);

  // Under one-hot features and gamma = 0 the oracle fixed point is the
  // reward table itself; verify against it.
  FixedPointOptions options;
  const FixedPointReport report = solve_fixed_point(mdp, fm, op, options);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      EXPECT_NEAR(report.theta_star[x * 2 + a], mdp.reward(x, a), 1e-9);

  const LearnerConfig cfg =
      base_config(2.0, StepSchedule::decaying(0.25), 100000, 1, 99);
  const ThetaTrace trace = run_sarsa(mdp, fm, op, cfg, {100000});
  EXPECT_LE((trace.thetas.back() - report.theta_star).lpNorm<Eigen::Infinity>(),
            0.05);
}

TEST(RunSarsa, ProjectionAndGradientInvariants) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const double radius = 1.5;
  const LearnerConfig cfg =
      base_config(radius, StepSchedule::decaying(0.05), 20000, 1, 7);
  const ThetaTrace trace =
      run_sarsa(mdp, fm, PolicyOperator::softmax(5.0), cfg, log_checkpoints(20000));
  EXPECT_LE(trace.theta_norm_max, radius);
  EXPECT_LE(trace.gradient_norm_max, mdp.r_max + 2.0 * radius);
  for (const Eigen::VectorXd& theta : trace.thetas)
    EXPECT_LE(theta.norm(), radius);
}

TEST(RunSarsa, DeterministicInSeed) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const PolicyOperator op = PolicyOperator::softmax(3.0);
  const LearnerConfig cfg =
      base_config(2.0, StepSchedule::decaying(0.1), 3000, 1, 21);
  const ThetaTrace a = run_sarsa(mdp, fm, op, cfg, log_checkpoints(3000));
  const ThetaTrace b = run_sarsa(mdp, fm, op, cfg, log_checkpoints(3000));
  ASSERT_EQ(a.thetas.size(), b.thetas.size());
  for (std::size_t i = 0; i < a.thetas.size(); ++i)
    EXPECT_EQ(a.thetas[i], b.thetas[i]);
  EXPECT_EQ(a.gradient_norm_max, b.gradient_norm_max);

  LearnerConfig other = cfg;
  other.seed = 22;
  const ThetaTrace c = run_sarsa(mdp, fm, op, other, log_checkpoints(3000));
  EXPECT_NE(a.thetas.back(), c.thetas.back());
}

TEST(RunFittedSarsa, BlockOneReducesToSarsaExactly) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const PolicyOperator op = PolicyOperator::softmax(5.0);
  const LearnerConfig cfg =
      base_config(2.0, StepSchedule::fitted_decaying(0.05, 1), 5000, 1, 33);
  const std::vector<long> marks = log_checkpoints(5000);
  const ThetaTrace fitted = run_fitted_sarsa(mdp, fm, op, cfg, marks);
  const ThetaTrace plain = run_sarsa(mdp, fm, op, cfg, marks);
  ASSERT_EQ(fitted.thetas.size(), plain.thetas.size());
  for (std::size_t i = 0; i < fitted.thetas.size(); ++i)
    EXPECT_EQ(fitted.thetas[i], plain.thetas[i]);
  EXPECT_EQ(fitted.gradient_norm_max, plain.gradient_norm_max);
  EXPECT_EQ(fitted.theta_norm_max, plain.theta_norm_max);
}

TEST(RunFittedSarsa, AllBlockSizesReachTheFixedPoint) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const PolicyOperator op = PolicyOperator::softmax(5.0);
  FixedPointOptions options;
  const FixedPointReport report = solve_fixed_point(mdp, fm, op, options);
  for (int b : {1, 4, 16}) {
    const LearnerConfig cfg =
        base_config(2.2, StepSchedule::fitted_decaying(0.05, b), 100000, b, 41);
    const ThetaTrace trace = run_fitted_sarsa(mdp, fm, op, cfg, {100000});
    EXPECT_LE((trace.thetas.back() - report.theta_star).norm(), 0.05)
        << "inner_b = " << b;
  }
}

TEST(RunFittedSarsa, SingleBlockIsFrozenPolicyTd) {
  // B = horizon: the behavior policy never improves, so the run is projected
  // TD(0) for pi_{theta_0}; compare against the direct linear solve.
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const PolicyOperator op = PolicyOperator::softmax(5.0);
  const long horizon = 100000;
  const LearnerConfig cfg = base_config(
      2.2, StepSchedule::decaying(0.05), horizon, static_cast<int>(horizon), 55);
  const ThetaTrace trace = run_fitted_sarsa(mdp, fm, op, cfg, {horizon});
  const Eigen::VectorXd target =
      td_fixed_point(mdp, fm, PolicyMatrix::uniform(2, 2));
  EXPECT_LE((trace.thetas.back() - target).norm(), 0.05);
}

TEST(RunFittedSarsa, DriftBoundedByStepTimesG) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const double radius = 1.5;
  LearnerConfig cfg = base_config(radius, StepSchedule::decaying(0.2), 400, 4, 61);
  cfg.record_full = true;
  const ThetaTrace trace =
      run_fitted_sarsa(mdp, fm, PolicyOperator::softmax(5.0), cfg, {});
  const double g_limit = mdp.r_max + 2.0 * radius;
  ASSERT_EQ(trace.thetas.size(), 401u);
  for (std::size_t t = 0; t + 1 < trace.thetas.size(); ++t) {
    const double drift = (trace.thetas[t + 1] - trace.thetas[t]).norm();
    EXPECT_LE(drift, cfg.schedule.at(static_cast<long>(t)) * g_limit + 1e-15);
  }
}

TEST(TraceCsv, SchemaAndAlignment) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const LearnerConfig cfg =
      base_config(2.0, StepSchedule::decaying(0.1), 64, 1, 3);
  const ThetaTrace trace =
      run_sarsa(mdp, fm, PolicyOperator::softmax(5.0), cfg, {0, 16, 64});
  const std::string csv = trace_csv(trace);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t,theta_0,theta_1,theta_2,theta_3,grad_norm");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);  // header + 3 rows
  ASSERT_EQ(trace.grad_norms.size(), 3u);
  EXPECT_DOUBLE_EQ(trace.grad_norms[0], 0.0);  // before any update
  EXPECT_EQ(trace.grad_norms.back(), trace.gradient_norm_max);
}

TEST(RunFittedSarsa, ParameterValidation) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const PolicyOperator op = PolicyOperator::softmax(5.0);
  LearnerConfig cfg = base_config(2.0, StepSchedule::decaying(0.1), 10, 4, 1);
  EXPECT_THROW(run_fitted_sarsa(mdp, fm, op, cfg, {}), ParameterError);  // 10 % 4
  cfg.inner_b = 2;
  EXPECT_THROW(run_fitted_sarsa(mdp, fm, op, cfg, {12}), ParameterError);
  cfg.radius = 0.0;
  EXPECT_THROW(run_fitted_sarsa(mdp, fm, op, cfg, {}), ParameterError);
}

}  // namespace
}  // namespace sarsalab
