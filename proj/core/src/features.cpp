#include "sarsalab/features.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "sarsalab/errors.hpp"
#include "sarsalab/rng.hpp"

namespace sarsalab {

double FeatureMap::max_norm() const {
  double worst = 0.0;
  for (int x = 0; x < n_states; ++x)
    for (int a = 0; a < n_actions; ++a) worst = std::max(worst, vec(x, a).norm());
  return worst;
}

Eigen::MatrixXd FeatureMap::stacked() const {
  Eigen::MatrixXd phi(n_pairs(), n_features);
  for (int x = 0; x < n_states; ++x)
    for (int a = 0; a < n_actions; ++a)
      phi.row(x * n_actions + a) = vec(x, a).transpose();
  return phi;
}

FeatureMap normalize(FeatureMap raw) {
  if (raw.table.empty() || raw.n_features < 1)
    throw ParameterError("normalize: empty feature table");
  if (raw.table.size() != static_cast<std::size_t>(raw.n_pairs()) * raw.n_features)
    throw ParameterError("normalize: table shape mismatch");
  const double worst = raw.max_norm();
  if (worst == 0.0)
    throw DegenerateFeaturesError("normalize: all feature vectors are zero");
  if (worst > 1.0) {
    const double scale = 1.0 / worst;
    for (double& v : raw.table) v *= scale;
  }
  return raw;
}

Eigen::VectorXd evaluate(const FeatureMap& fm, int x, int a) {
  if (x < 0 || x >= fm.n_states || a < 0 || a >= fm.n_actions)
    throw ParameterError("evaluate: index out of range");
  return fm.vec(x, a);
}

Eigen::VectorXd q_values(const FeatureMap& fm, const Eigen::VectorXd& theta) {
  if (theta.size() != fm.n_features)
    throw ParameterError("q_values: theta dimension mismatch");
  Eigen::VectorXd q(fm.n_pairs());
  for (int x = 0; x < fm.n_states; ++x)
    for (int a = 0; a < fm.n_actions; ++a)
      q[x * fm.n_actions + a] = fm.vec(x, a).dot(theta);
  return q;
}

GramReport gram_report(const FeatureMap& fm, std::span<const double> mu,
                       double tol) {
  if (mu.size() != static_cast<std::size_t>(fm.n_pairs()))
    throw ParameterError("gram_report: measure size mismatch");
  double total = 0.0;
  for (double w : mu) {
    if (!(w >= 0.0)) throw ParameterError("gram_report: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ParameterError("gram_report: measure does not sum to 1");

  GramReport report;
  report.gram = Eigen::MatrixXd::Zero(fm.n_features, fm.n_features);
  for (int x = 0; x < fm.n_states; ++x)
    for (int a = 0; a < fm.n_actions; ++a) {
      const double w = mu[static_cast<std::size_t>(x * fm.n_actions + a)];
      if (w == 0.0) continue;
      const auto phi = fm.vec(x, a);
      report.gram.noalias() += w * phi * phi.transpose();
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(report.gram);
  report.min_eigenvalue = solver.eigenvalues().minCoeff();
  report.independent = report.min_eigenvalue > tol;
  return report;
}

FeatureMap one_hot_features(int n_states, int n_actions) {
  FeatureMap fm;
  fm.n_states = n_states;
  fm.n_actions = n_actions;
  fm.n_features = n_states * n_actions;
  fm.table.assign(static_cast<std::size_t>(fm.n_pairs()) * fm.n_features, 0.0);
  for (int i = 0; i < fm.n_pairs(); ++i)
    fm.table[static_cast<std::size_t>(i) * fm.n_features + i] = 1.0;
  return fm;
}

FeatureMap random_features(int n_states, int n_actions, int n_features,
                           std::uint64_t seed) {
  if (n_features < 1) throw ParameterError("random_features: n_features must be >= 1");
  Rng rng(seed);
  FeatureMap fm;
  fm.n_states = n_states;
  fm.n_actions = n_actions;
  fm.n_features = n_features;
  fm.table.resize(static_cast<std::size_t>(fm.n_pairs()) * n_features);
  for (double& v : fm.table) v = rng.normal();
  return normalize(std::move(fm));
}

FeatureMap poly_features(int n_states, int n_actions, int n_features) {
  if (n_features < 1) throw ParameterError("poly_features: n_features must be >= 1");
  FeatureMap fm;
  fm.n_states = n_states;
  fm.n_actions = n_actions;
  fm.n_features = n_features;
  fm.table.resize(static_cast<std::size_t>(fm.n_pairs()) * n_features);
  // phi_i(x,a) = u^p * v^q over a diagonal enumeration of exponents, with
  // u, v the state and action indices mapped into (0, 1].
  std::vector<std::pair<int, int>> exponents;
  for (int degree = 0; static_cast<int>(exponents.size()) < n_features; ++degree)
    for (int p = 0; p <= degree && static_cast<int>(exponents.size()) < n_features; ++p)
      exponents.emplace_back(p, degree - p);
  for (int x = 0; x < n_states; ++x)
    for (int a = 0; a < n_actions; ++a) {
      const double u = static_cast<double>(x + 1) / n_states;
      const double v = static_cast<double>(a + 1) / n_actions;
      double* row = fm.table.data() +
                    static_cast<std::size_t>(x * n_actions + a) * n_features;
      for (int i = 0; i < n_features; ++i)
        row[i] = std::pow(u, exponents[static_cast<std::size_t>(i)].first) *
                 std::pow(v, exponents[static_cast<std::size_t>(i)].second);
    }
  return normalize(std::move(fm));
}

}  // namespace sarsalab
