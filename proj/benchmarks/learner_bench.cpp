#include <benchmark/benchmark.h>

#include "sarsalab/learner.hpp"

namespace {

using namespace sarsalab;

LearnerConfig config_for(double w, int inner_b) {
  LearnerConfig cfg;
  cfg.radius = 2.2;
  cfg.schedule = StepSchedule::decaying(w);
  cfg.horizon = 1L << 20;
  cfg.inner_b = inner_b;
  cfg.seed = 17;
  return cfg;
}

void BM_SarsaStepTwoState(benchmark::State& state) {
  const FiniteMdp mdp = two_state_mdp();
  const FeatureMap fm = one_hot_features(2, 2);
  const PolicyOperator op = PolicyOperator::softmax(5.0);
  SarsaProcess process(mdp, fm, op, config_for(0.05, 1));
  for (auto _ : state) {
    process.step();
    benchmark::DoNotOptimize(process.theta().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SarsaStepTwoState);

void BM_SarsaStepRandomMdp(benchmark::State& state) {
  const FiniteMdp mdp = build_random_mdp(10, 3, 1.0, 0.9, 0.01, 1);
  const FeatureMap fm = random_features(10, 3, 4, 2);
  const PolicyOperator op = PolicyOperator::softmax(20.0);
  SarsaProcess process(mdp, fm, op, config_for(0.05, 1));
  for (auto _ : state) {
    process.step();
    benchmark::DoNotOptimize(process.theta().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SarsaStepRandomMdp);

// Policy improvement amortized over the block: the dominant cost at B = 1.
void BM_FittedSarsaStepBlocked(benchmark::State& state) {
  const FiniteMdp mdp = build_random_mdp(10, 3, 1.0, 0.9, 0.01, 1);
  const FeatureMap fm = random_features(10, 3, 4, 2);
  const PolicyOperator op = PolicyOperator::softmax(20.0);
  SarsaProcess process(mdp, fm, op,
                       config_for(0.05, static_cast<int>(state.range(0))));
  for (auto _ : state) {
    process.step();
    benchmark::DoNotOptimize(process.theta().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FittedSarsaStepBlocked)->Arg(4)->Arg(16);

void BM_ImprovePolicy(benchmark::State& state) {
  const FeatureMap fm = random_features(10, 3, 4, 2);
  const PolicyOperator op = PolicyOperator::softmax(20.0);
  PolicyMatrix policy = PolicyMatrix::zeros(10, 3);
  Eigen::VectorXd scratch(fm.n_pairs());
  Rng rng(3);
  const Eigen::VectorXd theta = sample_ball(4, 1.0, rng);
  for (auto _ : state) {
    improve_into(op, fm, theta, policy, scratch);
    benchmark::DoNotOptimize(policy.probs.data());
  }
}
BENCHMARK(BM_ImprovePolicy);

}  // namespace
