#include "sarsalab/oracle.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "sarsalab/bounds.hpp"
#include "sarsalab/errors.hpp"

namespace sarsalab {

namespace {

// Pair-to-pair transition T((x,a),(y,b)) = P(y|x,a) pi(b|y).
Eigen::MatrixXd pair_transition(const FiniteMdp& mdp, const PolicyMatrix& policy) {
  const int n = mdp.n_pairs();
  Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < mdp.n_states; ++x)
    for (int a = 0; a < mdp.n_actions; ++a) {
      const int row = x * mdp.n_actions + a;
      const auto kernel_row = mdp.kernel_row(x, a);
      for (int y = 0; y < mdp.n_states; ++y) {
        const double py = kernel_row[y];
        if (py == 0.0) continue;
        for (int b = 0; b < mdp.n_actions; ++b)
          trans(row, y * mdp.n_actions + b) = py * policy.prob(y, b);
      }
    }
  return trans;
}

Eigen::VectorXd action_measure(const FiniteMdp& mdp, const PolicyMatrix& policy) {
  const Eigen::VectorXd state_law =
      stationary_distribution(policy_kernel(mdp, policy));
  Eigen::VectorXd mu(mdp.n_pairs());
  for (int x = 0; x < mdp.n_states; ++x)
    for (int a = 0; a < mdp.n_actions; ++a)
      mu[x * mdp.n_actions + a] = state_law[x] * policy.prob(x, a);
  return mu;
}

MeanFieldPair mean_field_for_policy(const FiniteMdp& mdp, const FeatureMap& fm,
                                    const PolicyMatrix& policy) {
  const Eigen::VectorXd mu = action_measure(mdp, policy);
  const Eigen::MatrixXd phi = fm.stacked();
  const Eigen::MatrixXd next_phi = pair_transition(mdp, policy) * phi;
  const Eigen::MatrixXd weighted = mu.asDiagonal() * phi;

  MeanFieldPair pair;
  pair.a_matrix = weighted.transpose() * (mdp.gamma * next_phi - phi);
  Eigen::VectorXd rewards(mdp.n_pairs());
  for (int x = 0; x < mdp.n_states; ++x)
    for (int a = 0; a < mdp.n_actions; ++a)
      rewards[x * mdp.n_actions + a] = mdp.reward(x, a);
  pair.b_vector = weighted.transpose() * rewards;
  return pair;
}

double largest_symmetric_eigenvalue(const Eigen::MatrixXd& mat) {
  const Eigen::MatrixXd sym = 0.5 * (mat + mat.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

Eigen::VectorXd stationary_action_measure(const FiniteMdp& mdp, const FeatureMap& fm,
                                          const PolicyOperator& op,
                                          const Eigen::VectorXd& theta) {
  return action_measure(mdp, improve(op, fm, theta));
}

MeanFieldPair mean_field(const FiniteMdp& mdp, const FeatureMap& fm,
                         const PolicyOperator& op, const Eigen::VectorXd& theta) {
  return mean_field_for_policy(mdp, fm, improve(op, fm, theta));
}

Eigen::VectorXd mean_field_gradient(const FiniteMdp& mdp, const FeatureMap& fm,
                                    const PolicyOperator& op,
                                    const Eigen::VectorXd& theta) {
  const MeanFieldPair pair = mean_field(mdp, fm, op, theta);
  return pair.a_matrix * theta + pair.b_vector;
}

FixedPointReport solve_fixed_point(const FiniteMdp& mdp, const FeatureMap& fm,
                                   const PolicyOperator& op,
                                   const FixedPointOptions& options) {
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw ParameterError("solve_fixed_point: damping must lie in (0,1]");
  const double c_lipschitz = lipschitz_certificate(op);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(fm.n_features);
  MeanFieldPair pair;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  for (; iterations < options.max_iters; ++iterations) {
    pair = mean_field(mdp, fm, op, theta);
    residual = (pair.a_matrix * theta + pair.b_vector).norm();
    if (residual <= options.tol) {
      converged = true;
      break;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(pair.a_matrix);
    if (!lu.isInvertible())
      throw IndependenceError("solve_fixed_point: A_theta singular; features dependent");
    const Eigen::VectorXd target = lu.solve(-pair.b_vector);
    theta = (1.0 - options.damping) * theta + options.damping * target;
    if (!theta.allFinite() || theta.norm() > 1e8)
      throw NoFixedPointError("solve_fixed_point: iteration diverged");
  }
  if (!converged)
    throw NoFixedPointError("solve_fixed_point: residual above tol after max_iters");

  FixedPointReport report;
  report.theta_star = theta;
  report.residual = residual;
  report.iterations = iterations;
  report.c_lipschitz = c_lipschitz;

  report.w_l = largest_symmetric_eigenvalue(pair.a_matrix);
  if (report.w_l >= 0.0)
    throw IndependenceError("solve_fixed_point: sym(A*) not negative definite");
  report.radius_bound = radius_bound(mdp.r_max, report.w_l);
  report.radius_used = options.radius > 0.0 ? options.radius : report.radius_bound;
  report.g_const = mdp.r_max + 2.0 * report.radius_used;

  const PolicyMatrix policy = improve(op, fm, theta);
  const MixingProfile mixing = mixing_profile(policy_kernel(mdp, policy),
                                              options.mixing_horizon,
                                              options.rho_floor);
  report.m = mixing.m;
  report.rho = mixing.rho;
  if (options.worst_case_grid > 0) {
    // A (max m, max rho) pair dominates every sampled chain's envelope.
    Rng grid_rng(options.grid_seed);
    for (int i = 0; i < options.worst_case_grid; ++i) {
      const Eigen::VectorXd probe =
          sample_ball(fm.n_features, report.radius_used, grid_rng);
      const MixingProfile sampled =
          mixing_profile(policy_kernel(mdp, improve(op, fm, probe)),
                         options.mixing_horizon, options.rho_floor);
      report.m = std::max(report.m, sampled.m);
      report.rho = std::max(report.rho, sampled.rho);
    }
  }
  report.lambda = lambda_const(report.g_const, mdp.n_actions, report.m, report.rho);

  const Eigen::MatrixXd shifted =
      pair.a_matrix +
      c_lipschitz * report.lambda *
          Eigen::MatrixXd::Identity(fm.n_features, fm.n_features);
  report.w_s = -largest_symmetric_eigenvalue(shifted);
  report.assumption2_ok = report.w_s > 0.0;

  report.mu_star = action_measure(mdp, policy);
  const GramReport gram = gram_report(
      fm, {report.mu_star.data(), static_cast<std::size_t>(report.mu_star.size())},
      options.gram_tol);
  report.gram_independent = gram.independent;
  report.gram_min_eigenvalue = gram.min_eigenvalue;

  const Eigen::VectorXd q_exact = exact_q(mdp, policy);
  const Eigen::VectorXd q_approx = q_values(fm, theta);
  report.q_approx_error = (q_exact - q_approx).lpNorm<Eigen::Infinity>();
  return report;
}

Eigen::VectorXd exact_q(const FiniteMdp& mdp, const PolicyMatrix& policy) {
  const int n = mdp.n_pairs();
  Eigen::VectorXd rewards(n);
  for (int x = 0; x < mdp.n_states; ++x)
    for (int a = 0; a < mdp.n_actions; ++a)
      rewards[x * mdp.n_actions + a] = mdp.reward(x, a);
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - mdp.gamma * pair_transition(mdp, policy);
  return system.partialPivLu().solve(rewards);
}

Eigen::VectorXd td_fixed_point(const FiniteMdp& mdp, const FeatureMap& fm,
                               const PolicyMatrix& policy) {
  const MeanFieldPair pair = mean_field_for_policy(mdp, fm, policy);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(pair.a_matrix);
  if (!lu.isInvertible())
    throw IndependenceError("td_fixed_point: A singular; features dependent");
  return lu.solve(-pair.b_vector);
}

double bias_functional(const Eigen::VectorXd& theta, const Observation& obs,
                       const Eigen::VectorXd& theta_star, const FiniteMdp& mdp,
                       const FeatureMap& fm, const PolicyOperator& op) {
  const Eigen::VectorXd g = semi_gradient(theta, obs, mdp.gamma, fm);
  const Eigen::VectorXd g_bar = mean_field_gradient(mdp, fm, op, theta);
  return (theta - theta_star).dot(g - g_bar);
}

}  // namespace sarsalab
