#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace sarsalab {

/// Linear feature table phi(x,a) in R^N with ||phi(x,a)||_2 <= 1.
struct FeatureMap {
  int n_states = 0;
  int n_actions = 0;
  int n_features = 0;
  std::vector<double> table;  // [(x*n_actions + a)][i]

  std::span<const double> row(int x, int a) const {
    return {table.data() +
                static_cast<std::size_t>(x * n_actions + a) * n_features,
            static_cast<std::size_t>(n_features)};
  }
  Eigen::Map<const Eigen::VectorXd> vec(int x, int a) const {
    return {table.data() +
                static_cast<std::size_t>(x * n_actions + a) * n_features,
            n_features};
  }
  int n_pairs() const { return n_states * n_actions; }
  double max_norm() const;

  /// Stacked (|X||A|) x N matrix, row index x*|A|+a.
  Eigen::MatrixXd stacked() const;
};

/// Scales the whole table by 1/max||raw(x,a)|| when that max exceeds 1,
/// otherwise returns the table unchanged. Rescaling preserves linear
/// independence. Throws DegenerateFeaturesError on an all-zero table.
FeatureMap normalize(FeatureMap raw);

/// Table lookup phi(x,a); throws ParameterError on bad indices.
Eigen::VectorXd evaluate(const FeatureMap& fm, int x, int a);

/// Q_theta(x,a) = phi(x,a)^T theta for all pairs, row index x*|A|+a.
Eigen::VectorXd q_values(const FeatureMap& fm, const Eigen::VectorXd& theta);

/// Gram matrix sum_{x,a} mu(x,a) phi phi^T and the independence verdict.
struct GramReport {
  Eigen::MatrixXd gram;
  double min_eigenvalue = 0.0;
  bool independent = false;
};

GramReport gram_report(const FeatureMap& fm, std::span<const double> mu,
                       double tol = 1e-10);

// Shipped feature families. All are normalized on construction.
FeatureMap one_hot_features(int n_states, int n_actions);
FeatureMap random_features(int n_states, int n_actions, int n_features,
                           std::uint64_t seed);
FeatureMap poly_features(int n_states, int n_actions, int n_features);

}  // namespace sarsalab
