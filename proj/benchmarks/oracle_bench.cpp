#include <benchmark/benchmark.h>

#include "sarsalab/oracle.hpp"

namespace {

using namespace sarsalab;

void BM_MeanField(benchmark::State& state) {
  const FiniteMdp mdp = build_random_mdp(10, 3, 1.0, 0.9, 0.01, 1);
  const FeatureMap fm = random_features(10, 3, 4, 2);
  const PolicyOperator op = PolicyOperator::softmax(20.0);
  Rng rng(5);
  const Eigen::VectorXd theta = sample_ball(4, 1.0, rng);
  for (auto _ : state) {
    const MeanFieldPair pair = mean_field(mdp, fm, op, theta);
    benchmark::DoNotOptimize(pair.b_vector.data());
  }
}
BENCHMARK(BM_MeanField);

void BM_SolveFixedPoint(benchmark::State& state) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const PolicyOperator op = PolicyOperator::softmax(320.0);
  for (auto _ : state) {
    const FixedPointReport report = solve_fixed_point(mdp, fm, op);
    benchmark::DoNotOptimize(report.residual);
  }
}
BENCHMARK(BM_SolveFixedPoint);

void BM_StationaryDistribution(benchmark::State& state) {
  const FiniteMdp mdp = build_random_mdp(
      static_cast<int>(state.range(0)), 3, 1.0, 0.9, 0.005, 1);
  const Eigen::MatrixXd kernel = policy_kernel(
      mdp, PolicyMatrix::uniform(mdp.n_states, mdp.n_actions));
  for (auto _ : state) {
    const Eigen::VectorXd pi = stationary_distribution(kernel);
    benchmark::DoNotOptimize(pi.data());
  }
}
BENCHMARK(BM_StationaryDistribution)->Arg(10)->Arg(40);

void BM_MixingProfile(benchmark::State& state) {
  const FiniteMdp mdp = build_random_mdp(10, 3, 1.0, 0.9, 0.01, 1);
  const Eigen::MatrixXd kernel =
      policy_kernel(mdp, PolicyMatrix::uniform(10, 3));
  for (auto _ : state) {
    const MixingProfile profile = mixing_profile(kernel, 200);
    benchmark::DoNotOptimize(profile.m);
  }
}
BENCHMARK(BM_MixingProfile);

}  // namespace

BENCHMARK_MAIN();
