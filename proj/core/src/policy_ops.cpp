#include "sarsalab/policy_ops.hpp"

#include <cmath>

#include "sarsalab/errors.hpp"

namespace sarsalab {

namespace {

void softmax_row(std::span<const double> q, double sigma, std::span<double> out) {
  double top = q[0];
  for (double v : q) top = std::max(top, v);
  double sum = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    out[a] = std::exp((q[a] - top) / sigma);
    sum += out[a];
  }
  for (double& v : out) v /= sum;
}

double mellowmax_value(std::span<const double> q, double omega) {
  double top = q[0];
  for (double v : q) top = std::max(top, v);
  double sum = 0.0;
  for (double v : q) sum += std::exp(omega * (v - top));
  return top + std::log(sum / static_cast<double>(q.size())) / omega;
}

// Maximum-entropy Boltzmann policy whose expected action value matches the
// mellowmax value: find beta >= 0 with sum_a exp(beta z_a) z_a = 0 where
// z_a = q_a - mm(q). The root function is increasing in beta; bisection on
// [0, 8 omega] with a clamp at the cap.
void mellowmax_row(std::span<const double> q, double omega, std::span<double> out) {
  const double mm = mellowmax_value(q, omega);
  const std::size_t n = q.size();
  double spread = 0.0;
  for (double v : q) spread = std::max(spread, std::abs(v - mm));
  if (spread < 1e-14) {
    for (double& v : out) v = 1.0 / static_cast<double>(n);
    return;
  }
  const auto root_fn = [&](double beta) {
    double acc = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double z = q[a] - mm;
      acc += std::exp(beta * z) * z;
    }
    return acc;
  };
  double lo = 0.0;
  double hi = 8.0 * omega;
  double beta = hi;
  if (root_fn(hi) > 0.0) {
    for (int iter = 0; iter < 100; ++iter) {
      beta = 0.5 * (lo + hi);
      (root_fn(beta) > 0.0 ? hi : lo) = beta;
    }
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double v : q) top = std::max(top, beta * (v - mm));
  double sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    out[a] = std::exp(beta * (q[a] - mm) - top);
    sum += out[a];
  }
  for (double& v : out) v /= sum;
}

void epsilon_greedy_row(std::span<const double> q, double epsilon,
                        std::span<double> out) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;  // ties keep the lowest index
  const double base = epsilon / static_cast<double>(q.size());
  for (double& v : out) v = base;
  out[best] += 1.0 - epsilon;
}

}  // namespace

PolicyOperator PolicyOperator::softmax(double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("softmax: sigma must be > 0");
  return {Kind::kSoftmax, sigma};
}

PolicyOperator PolicyOperator::mellowmax(double omega) {
  if (!(omega > 0.0)) throw ParameterError("mellowmax: omega must be > 0");
  return {Kind::kMellowmax, omega};
}

PolicyOperator PolicyOperator::epsilon_greedy(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ParameterError("epsilon_greedy: epsilon must lie in [0,1]");
  return {Kind::kEpsilonGreedy, epsilon};
}

std::string PolicyOperator::describe() const {
  switch (kind) {
    case Kind::kSoftmax:
      return "softmax sigma=" + std::to_string(param);
    case Kind::kMellowmax:
      return "mellowmax omega=" + std::to_string(param);
    case Kind::kEpsilonGreedy:
      return "epsilon_greedy epsilon=" + std::to_string(param);
  }
  return "?";
}

void improve_into(const PolicyOperator& op, const FeatureMap& fm,
                  const Eigen::VectorXd& theta, PolicyMatrix& out,
                  Eigen::VectorXd& q_scratch) {
  if (!theta.allFinite()) throw ParameterError("improve: theta must be finite");
  if (theta.size() != fm.n_features)
    throw ParameterError("improve: theta dimension mismatch");
  for (int x = 0; x < fm.n_states; ++x)
    for (int a = 0; a < fm.n_actions; ++a)
      q_scratch[x * fm.n_actions + a] = fm.vec(x, a).dot(theta);
  for (int x = 0; x < fm.n_states; ++x) {
    const std::span<const double> q{q_scratch.data() + x * fm.n_actions,
                                    static_cast<std::size_t>(fm.n_actions)};
    const std::span<double> row = out.row(x);
    switch (op.kind) {
      case PolicyOperator::Kind::kSoftmax:
        softmax_row(q, op.param, row);
        break;
      case PolicyOperator::Kind::kMellowmax:
        mellowmax_row(q, op.param, row);
        break;
      case PolicyOperator::Kind::kEpsilonGreedy:
        epsilon_greedy_row(q, op.param, row);
        break;
    }
  }
}

PolicyMatrix improve(const PolicyOperator& op, const FeatureMap& fm,
                     const Eigen::VectorXd& theta) {
  PolicyMatrix policy = PolicyMatrix::zeros(fm.n_states, fm.n_actions);
  Eigen::VectorXd scratch(fm.n_pairs());
  improve_into(op, fm, theta, policy, scratch);
  return policy;
}

double lipschitz_certificate(const PolicyOperator& op) {
  switch (op.kind) {
    case PolicyOperator::Kind::kSoftmax:
      return 1.0 / (2.0 * op.param);
    case PolicyOperator::Kind::kMellowmax:
      return 2.0 * op.param;
    case PolicyOperator::Kind::kEpsilonGreedy:
      throw NoCertificateError(
          "epsilon_greedy is discontinuous in theta and has no Lipschitz certificate");
  }
  throw ParameterError("lipschitz_certificate: unknown operator kind");
}

Eigen::VectorXd sample_ball(int dim, double radius, Rng& rng) {
  Eigen::VectorXd direction(dim);
  for (int i = 0; i < dim; ++i) direction[i] = rng.normal();
  const double norm = direction.norm();
  if (norm == 0.0) return Eigen::VectorXd::Zero(dim);
  const double r =
      radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
  return direction * (r / norm);
}

double empirical_lipschitz(const PolicyOperator& op, const FeatureMap& fm,
                           int n_pairs, double radius, Rng& rng) {
  if (n_pairs < 1) throw ParameterError("empirical_lipschitz: n_pairs must be >= 1");
  double best = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    Eigen::VectorXd theta1 = sample_ball(fm.n_features, radius, rng);
    Eigen::VectorXd theta2;
    if (k % 2 == 0) {
      theta2 = sample_ball(fm.n_features, radius, rng);
    } else {
      // Close pair along a random direction: probes the local derivative.
      Eigen::VectorXd dir = sample_ball(fm.n_features, 1.0, rng);
      const double norm = dir.norm();
      if (norm == 0.0) continue;
      theta2 = theta1 + dir * (1e-6 * radius / norm);
    }
    const double dist = (theta1 - theta2).norm();
    if (dist < 1e-15) continue;
    const PolicyMatrix p1 = improve(op, fm, theta1);
    const PolicyMatrix p2 = improve(op, fm, theta2);
    for (std::size_t i = 0; i < p1.probs.size(); ++i)
      best = std::max(best, std::abs(p1.probs[i] - p2.probs[i]) / dist);
  }
  return best;
}

}  // namespace sarsalab
