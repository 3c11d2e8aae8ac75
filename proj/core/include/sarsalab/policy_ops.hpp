#pragma once

#include <Eigen/Dense>
#include <string>

#include "sarsalab/features.hpp"
#include "sarsalab/mdp.hpp"
#include "sarsalab/rng.hpp"

namespace sarsalab {

/// Policy improvement operator: maps an action-value table phi^T theta to a
/// behavior policy. softmax and mellowmax are Lipschitz in theta and carry an
/// analytic per-entry certificate; epsilon-greedy is discontinuous and
/// carries none.
struct PolicyOperator {
  enum class Kind { kSoftmax, kMellowmax, kEpsilonGreedy };

  Kind kind = Kind::kSoftmax;
  double param = 1.0;  // sigma, omega, or epsilon

  static PolicyOperator softmax(double sigma);
  static PolicyOperator mellowmax(double omega);
  static PolicyOperator epsilon_greedy(double epsilon);

  std::string describe() const;
};

/// pi_theta = Gamma(phi^T theta). Softmax: pi(a|x) proportional to
/// exp(phi(x,a)^T theta / sigma). Mellowmax: maximum-entropy Boltzmann policy
/// matching the mellowmax value of the action-value row. Epsilon-greedy:
/// mass 1-eps+eps/|A| on the argmax (ties to the lowest action index),
/// eps/|A| elsewhere.
PolicyMatrix improve(const PolicyOperator& op, const FeatureMap& fm,
                     const Eigen::VectorXd& theta);

/// Allocation-free variant for hot loops; `out` must be pre-shaped and
/// `q_scratch` have n_pairs entries.
void improve_into(const PolicyOperator& op, const FeatureMap& fm,
                  const Eigen::VectorXd& theta, PolicyMatrix& out,
                  Eigen::VectorXd& q_scratch);

/// Analytic per-entry Lipschitz constant C with |pi_t1(a|x) - pi_t2(a|x)|
/// <= C ||t1 - t2||. Softmax: 1/(2 sigma), from the Jacobian bound
/// ||grad pi(a|x)|| <= 2 pi (1-pi) / sigma <= 1/(2 sigma) given ||phi|| <= 1.
/// Mellowmax: 2 omega, an artifact-level certificate cross-checked by
/// empirical_lipschitz. Throws NoCertificateError for epsilon-greedy.
double lipschitz_certificate(const PolicyOperator& op);

/// Sampled lower estimate of the operator's per-entry Lipschitz constant:
/// max over theta pairs in the radius ball and over (x,a) of
/// |pi_1(a|x) - pi_2(a|x)| / ||t1 - t2||. Alternates independent pairs with
/// close perturbation pairs to probe the local derivative; zero-distance
/// pairs are skipped.
double empirical_lipschitz(const PolicyOperator& op, const FeatureMap& fm,
                           int n_pairs, double radius, Rng& rng);

/// Uniform sample from the L2 ball of the given radius.
Eigen::VectorXd sample_ball(int dim, double radius, Rng& rng);

}  // namespace sarsalab
