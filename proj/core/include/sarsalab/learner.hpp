#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sarsalab/features.hpp"
#include "sarsalab/mdp.hpp"
#include "sarsalab/policy_ops.hpp"
#include "sarsalab/rng.hpp"

namespace sarsalab {

/// One SARSA tuple O_t = (x_t, a_t, x_{t+1}, a_{t+1}) plus the observed
/// reward r(x_t, a_t).
struct Observation {
  int x = 0;
  int a = 0;
  int x_next = 0;
  int a_next = 0;
  double reward = 0.0;
};

/// Step-size schedule.
///  - decaying(w):          alpha_t = 1 / (2 w (t+1)), t >= 0
///  - constant(a0):         alpha_t = a0
///  - fitted_decaying(w,B): alpha_0 = 1 / (sqrt(2) B w), alpha_t = 1 / (2 t w)
///    for t >= 1 (the indexing the fitted-run bounds are stated in)
struct StepSchedule {
  enum class Kind { kDecaying, kConstant, kFittedDecaying };

  Kind kind = Kind::kDecaying;
  double w = 0.0;
  double alpha0 = 0.0;
  int block_b = 1;

  static StepSchedule decaying(double w);
  static StepSchedule constant(double alpha0);
  static StepSchedule fitted_decaying(double w, int block_b);

  double at(long t) const;
};

struct LearnerConfig {
  double radius = 1.0;         // projection ball ||theta|| <= radius
  StepSchedule schedule;
  long horizon = 0;            // total parameter updates (= samples consumed)
  int inner_b = 1;             // TD iterations per policy improvement; 1 = SARSA
  std::uint64_t seed = 0;
  Eigen::VectorXd theta0;      // empty = zeros
  int x0 = -1;                 // -1 = drawn uniformly
  bool record_full = false;    // record every step instead of checkpoints
};

/// Checkpointed theta trajectory plus the run-wide invariant witnesses.
struct ThetaTrace {
  std::vector<long> times;
  std::vector<Eigen::VectorXd> thetas;
  std::vector<double> grad_norms;  // running max ||g|| at each checkpoint
  double gradient_norm_max = 0.0;  // max_t ||g_t||, must stay <= r_max + 2R
  double theta_norm_max = 0.0;     // max_t ||theta_t||, must stay <= R
  long observations_consumed = 0;
};

/// Trace export: one row per checkpoint, columns t, theta_0..theta_{N-1},
/// grad_norm.
std::string trace_csv(const ThetaTrace& trace);

/// delta = r + gamma phi(x',a')^T theta - phi(x,a)^T theta.
double td_error(const Eigen::VectorXd& theta, const Observation& obs,
                double gamma, const FeatureMap& fm);

/// g = phi(x,a) * delta.
Eigen::VectorXd semi_gradient(const Eigen::VectorXd& theta, const Observation& obs,
                              double gamma, const FeatureMap& fm);

/// Euclidean projection onto the radius ball. The result satisfies
/// ||result|| <= radius verbatim in double arithmetic.
Eigen::VectorXd project(Eigen::VectorXd theta, double radius);

/// Incremental single-trajectory runner shared by SARSA and fitted SARSA.
/// Cloneable (including the random stream) so paired common-random-number
/// replications can branch mid-trajectory; freeze_policy() turns the copy
/// into the frozen-policy auxiliary chain.
class SarsaProcess {
 public:
  SarsaProcess(const FiniteMdp& mdp, const FeatureMap& fm,
               const PolicyOperator& op, const LearnerConfig& cfg);

  /// Consume one transition and apply one projected TD update. Policy
  /// improvement fires when the global step count reaches a block boundary.
  void step();

  long time() const { return time_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Observation& last_observation() const { return last_obs_; }
  const PolicyMatrix& behavior_policy() const { return policy_; }
  double gradient_norm_max() const { return gradient_norm_max_; }
  double theta_norm_max() const { return theta_norm_max_; }

  /// Stop policy improvements (and parameter updates); the state-action
  /// process then evolves under the policy frozen at the current block.
  /// Random-stream consumption per step is unchanged.
  void freeze_policy() { frozen_ = true; }

  SarsaProcess clone() const { return *this; }

 private:
  const FiniteMdp* mdp_;
  const FeatureMap* fm_;
  LearnerConfig cfg_;
  Rng rng_;
  Eigen::VectorXd theta_;
  PolicyMatrix policy_;
  Eigen::VectorXd q_scratch_;
  PolicyOperator op_;
  Observation last_obs_;
  int x_prev_ = 0;
  int a_prev_ = 0;
  long time_ = 0;
  double gradient_norm_max_ = 0.0;
  double theta_norm_max_ = 0.0;
  bool frozen_ = false;
};

/// Algorithm 1: projected SARSA on one continuous trajectory. Requires
/// cfg.inner_b == 1.
ThetaTrace run_sarsa(const FiniteMdp& mdp, const FeatureMap& fm,
                     const PolicyOperator& op, const LearnerConfig& cfg,
                     const std::vector<long>& checkpoints);

/// Algorithm 2: fitted SARSA with B TD(0) iterations per policy improvement,
/// still on one continuous trajectory. With inner_b == 1 the trace is
/// step-for-step identical to run_sarsa under the same seed.
ThetaTrace run_fitted_sarsa(const FiniteMdp& mdp, const FeatureMap& fm,
                            const PolicyOperator& op, const LearnerConfig& cfg,
                            const std::vector<long>& checkpoints);

/// alpha_t for the given schedule.
double step_size(const StepSchedule& schedule, long t);

/// Logarithmic checkpoint grid: powers of two up to horizon, plus horizon.
std::vector<long> log_checkpoints(long horizon);

}  // namespace sarsalab
