#include "sarsalab/features.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include "sarsalab/errors.hpp"
#include "sarsalab/mdp.hpp"
#include "sarsalab/oracle.hpp"
#include "sarsalab/serialize.hpp"

namespace sarsalab {
namespace {

FeatureMap raw_map(int n_states, int n_actions, std::vector<double> table) {
  FeatureMap fm;
  fm.n_states = n_states;
  fm.n_actions = n_actions;
  fm.n_features = static_cast<int>(table.size()) / (n_states * n_actions);
  fm.table = std::move(table);
  return fm;
}

TEST(Normalize, IdentityWhenAlreadyBounded) {
  const FeatureMap fm = normalize(raw_map(1, 2, {0.6, 0.8, 0.0, 1.0}));
  EXPECT_DOUBLE_EQ(fm.table[0], 0.6);
  EXPECT_DOUBLE_EQ(fm.table[3], 1.0);
}

TEST(Normalize, ScalesByLargestNorm) {
  const FeatureMap fm = normalize(raw_map(1, 1, {3.0, 4.0}));
  EXPECT_DOUBLE_EQ(fm.table[0], 0.6);
  EXPECT_DOUBLE_EQ(fm.table[1], 0.8);
}

TEST(Normalize, OutputMaxNormIsOne) {
  Rng rng(3);
  std::vector<double> table(24);
  for (double& v : table) v = 5.0 * rng.normal();
  const FeatureMap fm = normalize(raw_map(4, 2, std::move(table)));
  EXPECT_NEAR(fm.max_norm(), 1.0, 1e-12);
  EXPECT_LE(fm.max_norm(), 1.0 + 1e-15);
}

TEST(Normalize, AllZeroTableRejected) {
  EXPECT_THROW(normalize(raw_map(1, 2, {0.0, 0.0, 0.0, 0.0})),
               DegenerateFeaturesError);
}

TEST(Evaluate, OneHotBasisVectors) {
  const FeatureMap fm = one_hot_features(2, 2);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      const Eigen::VectorXd phi = evaluate(fm, x, a);
      for (int i = 0; i < 4; ++i)
        EXPECT_DOUBLE_EQ(phi[i], i == x * 2 + a ? 1.0 : 0.0);
    }
  EXPECT_EQ(evaluate(fm, 1, 1), evaluate(fm, 1, 1));  // pure lookup
  EXPECT_THROW(evaluate(fm, 2, 0), ParameterError);
}

TEST(Evaluate, ZeroParameterGivesZeroValue) {
  const FeatureMap fm = random_features(3, 2, 4, 5);
  const Eigen::VectorXd q = q_values(fm, Eigen::VectorXd::Zero(4));
  EXPECT_DOUBLE_EQ(q.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(GramReport, OneHotDiagonal) {
  const FeatureMap fm = one_hot_features(2, 2);
  const std::vector<double> mu(4, 0.25);
  const GramReport report = gram_report(fm, mu);
  EXPECT_TRUE(report.independent);
  EXPECT_NEAR(report.min_eigenvalue, 0.25, 1e-12);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      EXPECT_NEAR(report.gram(i, j), i == j ? 0.25 : 0.0, 1e-15);
}

TEST(GramReport, DuplicatedColumnNotIndependent) {
  // phi(x,a) = (v, v): rank 1 in R^2.
  FeatureMap fm = raw_map(2, 1, {0.5, 0.5, 0.7, 0.7});
  const std::vector<double> mu(2, 0.5);
  const GramReport report = gram_report(fm, mu);
  EXPECT_FALSE(report.independent);
  EXPECT_NEAR(report.min_eigenvalue, 0.0, 1e-12);
}

TEST(GramReport, MoreFeaturesThanSupportedPairs) {
  const FeatureMap fm = one_hot_features(2, 2);
  const std::vector<double> mu = {1.0, 0.0, 0.0, 0.0};
  EXPECT_FALSE(gram_report(fm, mu).independent);
}

TEST(GramReport, VerdictMatchesSvdRankOracle) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = random_features(2, 2, 2, 31);
  const auto [op, mu] = [&] {
    const PolicyOperator softmax = PolicyOperator::softmax(5.0);
    FixedPointOptions options;
    const FixedPointReport report = solve_fixed_point(mdp, fm, softmax, options);
    return std::pair{softmax, report.mu_star};
  }();
  const GramReport report =
      gram_report(fm, {mu.data(), static_cast<std::size_t>(mu.size())});

  // Independent oracle: rank of diag(sqrt(mu)) * Phi via singular values.
  Eigen::MatrixXd weighted = fm.stacked();
  for (int i = 0; i < weighted.rows(); ++i) weighted.row(i) *= std::sqrt(mu[i]);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] * svd.singularValues()[i] > 1e-10) ++rank;
  EXPECT_EQ(report.independent, rank == fm.n_features);
}

TEST(GramReport, MeasureMustSumToOne) {
  const FeatureMap fm = one_hot_features(2, 2);
  const std::vector<double> mu(4, 0.3);
  EXPECT_THROW(gram_report(fm, mu), ParameterError);
}

TEST(Families, AllRespectUnitNormBound) {
  for (const FeatureMap& fm :
       {one_hot_features(4, 3), random_features(4, 3, 5, 2), poly_features(4, 3, 5)})
    EXPECT_LE(fm.max_norm(), 1.0 + 1e-15);
  EXPECT_EQ(random_features(4, 3, 5, 2).table, random_features(4, 3, 5, 2).table);
}

TEST(FeatureSerialization, RoundTripIsExact) {
  const FeatureMap fm = random_features(3, 2, 4, 77);
  const std::string text = features_to_string(fm);
  const FeatureMap back = features_from_string(text);
  EXPECT_EQ(back.table, fm.table);
  EXPECT_EQ(features_to_string(back), text);
}

}  // namespace
}  // namespace sarsalab
