#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sarsalab/bounds.hpp"
#include "sarsalab/learner.hpp"
#include "sarsalab/oracle.hpp"

namespace sarsalab {

/// Flat key-value experiment description; see the README for the schema.
struct ExperimentConfig {
  std::string mode = "mse";  // mse | bound_check | b_sweep | coupling | chatter_demo

  // MDP source: "two_state", "random", or "file".
  std::string mdp_kind = "two_state";
  std::string mdp_file;
  int n_states = 10;
  int n_actions = 3;
  double min_prob = 0.01;
  double gamma = 0.9;
  double r_max = 1.0;
  std::uint64_t mdp_seed = 1;

  // Features: "one_hot", "random", "poly", or "file".
  std::string feature_kind = "one_hot";
  std::string feature_file;
  int n_features = 4;
  std::uint64_t feature_seed = 2;

  // Operator: "softmax" (sigma), "mellowmax" (omega), "epsilon_greedy"
  // (epsilon), or "softmax_auto" (smallest grid sigma with Assumption 2).
  std::string operator_kind = "softmax_auto";
  double sigma = 5.0;
  double omega = 1.0;
  double epsilon = 0.1;

  // Learner: schedule "decaying" | "constant" | "fitted_decaying";
  // w == 0 means "use w_s from the oracle".
  std::string schedule_kind = "decaying";
  double w = 0.0;
  double alpha0 = 0.01;
  double radius = 0.0;  // 0 = 1.1 ||theta*|| + 0.1
  long horizon = 1L << 14;
  int inner_b = 1;

  int n_replications = 200;
  std::uint64_t master_seed = 42;
  std::vector<long> checkpoints;  // empty = power-of-two grid

  std::string out_dir = ".";
  bool export_trace = false;  // run mode: write replication-0 trace.csv

  // coupling mode
  long coupling_t = 10000;
  std::vector<int> coupling_taus = {10, 50, 200};
  int coupling_reps = 10000;

  // b_sweep mode
  std::vector<int> b_list = {1, 4, 16};
  long budget = 100000;

  // chatter_demo mode
  int chatter_trials = 12;
  long chatter_horizon = 60000;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// A fully prepared problem: MDP + features + operator + oracle report with
/// the projection radius the constants were evaluated at.
struct Instance {
  std::string name;
  FiniteMdp mdp;
  FeatureMap features;
  PolicyOperator op;
  FixedPointReport report;
};

/// Builds the MDP and features from the config, selects the operator
/// (resolving softmax_auto against the Assumption-2 grid), and solves the
/// oracle with a tight projection radius.
Instance prepare_instance(const ExperimentConfig& cfg);

/// Smallest softmax temperature on the grid {1,2,5,10,20,40,80,...} whose
/// report satisfies Assumption 2 with margin w_s >= 0.25 |w_l| (the margin
/// keeps 1/(2 w_s) step sizes at a sane scale). Throws if the grid caps out.
std::pair<PolicyOperator, FixedPointReport> select_softmax_operator(
    const FiniteMdp& mdp, const FeatureMap& fm, double config_radius);

/// Default experiment suite: TwoState plus 5 random MDPs
/// (|X|=10, |A|=3, N=4, min_prob=0.01, gamma=0.9), softmax auto-selected.
std::vector<Instance> default_suite();

struct MsePoint {
  long t = 0;
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  double bound = 0.0;
  bool bound_valid = false;
  BoundBreakdown breakdown;
};

struct MseCurve {
  std::vector<MsePoint> points;
  double gradient_norm_max = 0.0;  // across all replications
  double theta_norm_max = 0.0;
  double g_limit = 0.0;   // r_max + 2R for this run
  double radius = 0.0;
  bool bounds_applicable = false;
  std::string warning;
};

/// Resolved learner settings for one experiment (w defaults to w_s).
StepSchedule resolve_schedule(const ExperimentConfig& cfg,
                              const FixedPointReport& report);

/// Monte Carlo estimate of E||theta_T - theta*||^2 over independent
/// single-trajectory replications, with the applicable theorem bound attached
/// per checkpoint. Replications run concurrently; output is deterministic in
/// the master seed.
MseCurve run_mse_experiment(const Instance& instance, const ExperimentConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

/// OLS of ln(mse) on ln(T) over the tail checkpoints.
RateFit fit_rate(const MseCurve& curve, double tail_fraction);

struct BSweepRow {
  int inner_b = 0;
  long horizon = 0;
  double final_error = 0.0;  // ||theta_final - theta*||
  bool bit_checked = false;  // B == 1 row compares against run_sarsa
  bool bit_identical = false;
};

/// Fitted SARSA across inner_b values at a fixed total sample budget.
std::vector<BSweepRow> b_sweep(const Instance& instance, const ExperimentConfig& cfg);

struct CouplingPoint {
  int tau = 0;
  double empirical_tv = 0.0;   // histogram TV between O_t and frozen-chain O_t
  double mismatch_rate = 0.0;  // paired-path disagreement frequency
  double bound = 0.0;          // policy-drift TV bound from the step sums
  double mixing_term = 0.0;    // 4 G^2 m rho^(tau-1), context only
  long paired_replications = 0;
};

/// Paired common-random-number replications: both copies share one stream;
/// the auxiliary copy freezes its policy at time t - tau. Because identical
/// paths cancel exactly in the paired histograms, the TV estimate has no
/// independent-sampling noise floor.
std::vector<CouplingPoint> coupling_diagnostic(const Instance& instance,
                                               const ExperimentConfig& cfg);

struct ChatterSummary {
  double diameter_eps_greedy = 0.0;  // late-window max pairwise theta distance
  double diameter_smooth = 0.0;      // same budget under softmax
  double theta_norm_max = 0.0;
  std::uint64_t mdp_seed = 0;
  std::uint64_t feature_seed = 0;
  bool crafted = false;        // the hand-built cycling instance won the screen
  bool found_chatter = false;  // smooth diameter below 10% of eps-greedy's
};

/// Qualitative: searches small instances for epsilon-greedy chattering and
/// reports the best contrast found. Nothing is asserted.
ChatterSummary chatter_demo(const ExperimentConfig& cfg);

// CSV / text renderings (byte-deterministic given the inputs).
std::string mse_csv(const MseCurve& curve);
std::string bound_audit_csv(const MseCurve& curve);
std::string rate_fit_text(const RateFit& fit);
std::string b_sweep_csv(const std::vector<BSweepRow>& rows);
std::string coupling_csv(const std::vector<CouplingPoint>& points);
std::string chatter_text(const ChatterSummary& summary);

/// Runs fn(0..n-1) on a small worker pool; rethrows the first failure.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace sarsalab
