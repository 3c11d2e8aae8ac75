#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "sarsalab/rng.hpp"

namespace sarsalab {

// Tolerance for "this row of probabilities sums to one".
inline constexpr double kRowSumTol = 1e-12;

/// Finite MDP (X, A, P, r, gamma) with deterministic bounded rewards
/// r(x,a) in [0, r_max] and discount gamma in [0, 1).
struct FiniteMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> kernel;   // P(y|x,a), layout [x][a][y]
  std::vector<double> rewards;  // r(x,a), layout [x][a]
  double gamma = 0.0;
  double r_max = 0.0;

  double p(int x, int a, int y) const {
    return kernel[(static_cast<std::size_t>(x) * n_actions + a) * n_states + y];
  }
  double reward(int x, int a) const {
    return rewards[static_cast<std::size_t>(x) * n_actions + a];
  }
  std::span<const double> kernel_row(int x, int a) const {
    return {kernel.data() + (static_cast<std::size_t>(x) * n_actions + a) * n_states,
            static_cast<std::size_t>(n_states)};
  }
  int n_pairs() const { return n_states * n_actions; }

  /// Throws ParameterError unless rows are stochastic within kRowSumTol,
  /// rewards lie in [0, r_max], and gamma in [0, 1).
  void validate() const;
};

/// Behavior policy pi(a|x); rows sum to one.
struct PolicyMatrix {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> probs;  // [x][a]

  double prob(int x, int a) const {
    return probs[static_cast<std::size_t>(x) * n_actions + a];
  }
  std::span<const double> row(int x) const {
    return {probs.data() + static_cast<std::size_t>(x) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }
  std::span<double> row(int x) {
    return {probs.data() + static_cast<std::size_t>(x) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }
  void validate() const;

  static PolicyMatrix uniform(int n_states, int n_actions);
  static PolicyMatrix zeros(int n_states, int n_actions);
};

/// Certified uniform-ergodicity profile: d(t) <= m * rho^t for all
/// t = 0..horizon, where d(t) = max_x d_TV(K^t(x,.), stationary).
struct MixingProfile {
  double m = 0.0;
  double rho = 0.0;
  int horizon = 0;
  std::vector<double> tv_curve;  // d(t), t = 0..horizon
};

/// Kernel entries are floored at min_prob, which makes the chain induced by
/// any full-support policy uniformly ergodic. Deterministic in seed.
FiniteMdp build_random_mdp(int n_states, int n_actions, double r_max,
                           double gamma, double min_prob, std::uint64_t seed);

/// Reference desk-scale instance used throughout the test suite:
/// 2 states, 2 actions, P(1|0,a0)=0.9, P(1|0,a1)=0.1, P(0|1,a0)=0.9,
/// P(0|1,a1)=0.1, r(x,a) = 0.25*(1+x)*(1+0.5a) clipped to [0,1], gamma 0.5.
FiniteMdp two_state_mdp();

/// One environment transition: y ~ P(.|x,a), reward = r(x,a) exactly.
std::pair<int, double> sample_step(const FiniteMdp& mdp, int x, int a, Rng& rng);

/// State chain kernel under a policy: K(x,y) = sum_a pi(a|x) P(y|x,a).
Eigen::MatrixXd policy_kernel(const FiniteMdp& mdp, const PolicyMatrix& policy);

/// Stationary law of a row-stochastic matrix by power iteration,
/// L1 residual below 1e-12; throws ErgodicityError on non-convergence.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& kernel);

/// Fits (m, rho) so that d(t) <= m rho^t holds exactly on 0..horizon.
/// rho is the second-largest eigenvalue modulus floored at rho_floor;
/// m is the tightest constant over the horizon. TV values below 1e-13 are
/// treated as exact zeros (they are matrix-power roundoff).
MixingProfile mixing_profile(const Eigen::MatrixXd& kernel, int horizon,
                             double rho_floor = 1e-3);

/// max_x d_TV(K^t(x,.), pi) for one t, given M = K^t.
double tv_to_stationary(const Eigen::MatrixXd& kernel_power,
                        const Eigen::VectorXd& stationary);

}  // namespace sarsalab
