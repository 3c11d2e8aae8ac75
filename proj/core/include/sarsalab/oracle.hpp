#pragma once

#include <Eigen/Dense>

#include "sarsalab/features.hpp"
#include "sarsalab/learner.hpp"
#include "sarsalab/mdp.hpp"
#include "sarsalab/policy_ops.hpp"

namespace sarsalab {

/// A_theta = E_theta[phi(X,A)(gamma phi^T(Y,B) - phi^T(X,A))] and
/// b_theta = E_theta[phi(X,A) r(X,A)], both exact sums over the finite
/// state-action space under the stationary law of pi_theta.
struct MeanFieldPair {
  Eigen::MatrixXd a_matrix;
  Eigen::VectorXd b_vector;
};

/// mu_theta(x,a) = P_theta(x) pi_theta(a|x), the stationary state-action law.
Eigen::VectorXd stationary_action_measure(const FiniteMdp& mdp, const FeatureMap& fm,
                                          const PolicyOperator& op,
                                          const Eigen::VectorXd& theta);

MeanFieldPair mean_field(const FiniteMdp& mdp, const FeatureMap& fm,
                         const PolicyOperator& op, const Eigen::VectorXd& theta);

/// Noiseless gradient g_bar(theta) = A_theta theta + b_theta; vanishes at the
/// fixed point.
Eigen::VectorXd mean_field_gradient(const FiniteMdp& mdp, const FeatureMap& fm,
                                    const PolicyOperator& op,
                                    const Eigen::VectorXd& theta);

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-12;       // on the residual ||A_theta theta + b_theta||
  int max_iters = 10000;
  double radius = 0.0;      // projection radius for the constants; 0 = use radius_bound
  int mixing_horizon = 200;
  double rho_floor = 1e-3;
  double gram_tol = 1e-10;
  // 0: (m, rho) from the theta* chain, the tightest policy-specific
  // certificate. > 0: additionally maximize both over this many chains at
  // parameters sampled from the radius ball (worst-case mode).
  int worst_case_grid = 0;
  std::uint64_t grid_seed = 13;
};

/// Everything the bound evaluators need, all computed at theta*.
struct FixedPointReport {
  Eigen::VectorXd theta_star;
  double residual = 0.0;        // ||A* theta* + b*||
  double w_l = 0.0;             // largest eigenvalue of sym(A*), negative
  double w_s = 0.0;             // -largest eigenvalue of sym(A* + C lambda I)
  double lambda = 0.0;          // G|A|(2 + ceil(log_rho 1/m) + 1/(1-rho))
  double c_lipschitz = 0.0;
  double g_const = 0.0;         // r_max + 2R
  double radius_used = 0.0;     // R the constants were evaluated at
  double radius_bound = 0.0;    // r_max / |w_l|
  double m = 0.0;               // mixing constants of the theta* chain
  double rho = 0.0;
  bool assumption2_ok = false;  // w_s > 0
  bool gram_independent = false;
  double gram_min_eigenvalue = 0.0;
  double q_approx_error = 0.0;  // ||Q_{theta*} - Q^{pi_theta*}||_inf, descriptive
  Eigen::VectorXd mu_star;      // stationary action measure at theta*
  int iterations = 0;
};

/// Damped iteration theta <- (1-d) theta + d (-A_theta^{-1} b_theta) until the
/// residual drops below tol. Throws NoFixedPointError on divergence or budget
/// exhaustion, IndependenceError when A_theta is singular.
FixedPointReport solve_fixed_point(const FiniteMdp& mdp, const FeatureMap& fm,
                                   const PolicyOperator& op,
                                   const FixedPointOptions& options = {});

/// Exact action values of a fixed policy: solves Q = r + gamma P Pi Q
/// directly. Returned table is indexed x*|A|+a.
Eigen::VectorXd exact_q(const FiniteMdp& mdp, const PolicyMatrix& policy);

/// TD(0) fixed point of a frozen policy: solves A^pi theta = -b^pi where the
/// mean-field pair is evaluated under the given policy instead of pi_theta.
Eigen::VectorXd td_fixed_point(const FiniteMdp& mdp, const FeatureMap& fm,
                               const PolicyMatrix& policy);

/// Bias functional Lambda_t(theta) = <theta - theta*, g_t(theta) - g_bar(theta)>
/// with g_bar evaluated exactly, so Lambda is machine precision.
double bias_functional(const Eigen::VectorXd& theta, const Observation& obs,
                       const Eigen::VectorXd& theta_star, const FiniteMdp& mdp,
                       const FeatureMap& fm, const PolicyOperator& op);

}  // namespace sarsalab
