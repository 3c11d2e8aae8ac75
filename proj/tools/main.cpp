// sarsalab command line: oracle reports, MSE experiments with theorem bounds,
// B sweeps, the frozen-policy coupling diagnostic, the epsilon-greedy chatter
// demo, and random MDP generation. Exit code 0 on success, 2 when a run
// completed but the requested bound was inapplicable, 1 on error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "sarsalab/errors.hpp"
#include "sarsalab/experiment.hpp"
#include "sarsalab/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBoundWarning = 2;

sarsalab::Instance instance_from(const std::string& mdp_arg,
                                 const std::string& config_path) {
  sarsalab::ExperimentConfig cfg = sarsalab::load_experiment_config(config_path);
  if (mdp_arg == "two_state") {
    cfg.mdp_kind = "two_state";
  } else {
    cfg.mdp_kind = "file";
    cfg.mdp_file = mdp_arg;
  }
  return sarsalab::prepare_instance(cfg);
}

std::string out_path(const sarsalab::ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_oracle(const std::string& mdp_arg, const std::string& config_path) {
  const sarsalab::Instance instance = instance_from(mdp_arg, config_path);
  std::cout << sarsalab::fixed_point_to_string(instance.report);
  return kExitOk;
}

int cmd_run(const std::string& config_path) {
  const sarsalab::ExperimentConfig cfg = sarsalab::load_experiment_config(config_path);
  const sarsalab::Instance instance = sarsalab::prepare_instance(cfg);
  const sarsalab::MseCurve curve = sarsalab::run_mse_experiment(instance, cfg);

  sarsalab::write_text_file(out_path(cfg, "mse.csv"), sarsalab::mse_csv(curve));
  sarsalab::write_text_file(out_path(cfg, "bound_audit.csv"),
                            sarsalab::bound_audit_csv(curve));
  sarsalab::save_fixed_point(instance.report, out_path(cfg, "fixed_point.txt"));
  if (curve.points.size() >= 4) {
    const sarsalab::RateFit fit = sarsalab::fit_rate(curve, 0.7);
    sarsalab::write_text_file(out_path(cfg, "rate_fit.txt"),
                              sarsalab::rate_fit_text(fit));
  }
  if (cfg.export_trace) {
    sarsalab::LearnerConfig learner;
    learner.radius = instance.report.radius_used;
    learner.schedule = sarsalab::resolve_schedule(cfg, instance.report);
    learner.horizon = cfg.horizon;
    learner.inner_b = cfg.inner_b;
    learner.seed = sarsalab::derive_seed(cfg.master_seed, 0);
    const sarsalab::ThetaTrace trace = sarsalab::run_fitted_sarsa(
        instance.mdp, instance.features, instance.op, learner,
        sarsalab::log_checkpoints(cfg.horizon));
    sarsalab::write_text_file(out_path(cfg, "trace.csv"),
                              sarsalab::trace_csv(trace));
  }

  int violations = 0;
  for (const auto& point : curve.points)
    if (point.bound_valid && point.mse_mean > point.bound) ++violations;
  std::cout << "instance " << instance.name << " operator "
            << instance.op.describe() << "\n";
  std::cout << "checkpoints " << curve.points.size() << ", bound violations "
            << violations << "\n";
  if (!curve.bounds_applicable) {
    std::cerr << "warning: " << curve.warning << "\n";
    return kExitBoundWarning;
  }
  return kExitOk;
}

int cmd_sweep_b(const std::string& config_path) {
  const sarsalab::ExperimentConfig cfg = sarsalab::load_experiment_config(config_path);
  const sarsalab::Instance instance = sarsalab::prepare_instance(cfg);
  const auto rows = sarsalab::b_sweep(instance, cfg);
  sarsalab::write_text_file(out_path(cfg, "sweep_b.csv"), sarsalab::b_sweep_csv(rows));
  std::cout << sarsalab::b_sweep_csv(rows);
  return kExitOk;
}

int cmd_coupling(const std::string& config_path) {
  const sarsalab::ExperimentConfig cfg = sarsalab::load_experiment_config(config_path);
  if (cfg.coupling_reps < 100)
    std::cerr << "warning: fewer than 100 paired replications; the TV histogram "
                 "will be unstable\n";
  const sarsalab::Instance instance = sarsalab::prepare_instance(cfg);
  const auto points = sarsalab::coupling_diagnostic(instance, cfg);
  sarsalab::write_text_file(out_path(cfg, "coupling.csv"),
                            sarsalab::coupling_csv(points));
  std::cout << sarsalab::coupling_csv(points);
  return kExitOk;
}

int cmd_chatter(const std::string& config_path) {
  const sarsalab::ExperimentConfig cfg = sarsalab::load_experiment_config(config_path);
  const sarsalab::ChatterSummary summary = sarsalab::chatter_demo(cfg);
  sarsalab::write_text_file(out_path(cfg, "chatter.txt"),
                            sarsalab::chatter_text(summary));
  std::cout << sarsalab::chatter_text(summary);
  return kExitOk;
}

int cmd_gen_mdp(const std::string& spec_path) {
  const sarsalab::ExperimentConfig cfg = sarsalab::load_experiment_config(spec_path);
  if (cfg.mdp_file.empty())
    throw sarsalab::ParameterError("gen-mdp: spec must set mdp_file (output path)");
  const sarsalab::FiniteMdp mdp = sarsalab::build_random_mdp(
      cfg.n_states, cfg.n_actions, cfg.r_max, cfg.gamma, cfg.min_prob, cfg.mdp_seed);
  sarsalab::save_mdp(mdp, cfg.mdp_file);
  std::cout << "wrote " << cfg.mdp_file << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected SARSA with linear function approximation: oracle, "
               "experiments, and finite-sample bound checks on finite MDPs"};
  app.require_subcommand(1);

  std::string mdp_arg;
  std::string config_path;

  auto* oracle = app.add_subcommand("oracle", "Solve theta* and print the fixed-point report");
  oracle->add_option("mdp", mdp_arg, "MDP file, or the literal 'two_state'")->required();
  oracle->add_option("config", config_path, "experiment config file")->required();

  auto* run = app.add_subcommand("run", "MSE experiment with theorem bounds");
  run->add_option("config", config_path, "experiment config file")->required();

  auto* sweep = app.add_subcommand("sweep-b", "Fitted SARSA across B at a fixed budget");
  sweep->add_option("config", config_path, "experiment config file")->required();

  auto* coupling = app.add_subcommand("coupling", "Frozen-policy coupling diagnostic");
  coupling->add_option("config", config_path, "experiment config file")->required();

  auto* chatter = app.add_subcommand("chatter", "Epsilon-greedy chatter demo");
  chatter->add_option("config", config_path, "experiment config file")->required();

  auto* gen = app.add_subcommand("gen-mdp", "Generate a random MDP file");
  gen->add_option("spec", config_path, "generator spec file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracle->parsed()) return cmd_oracle(mdp_arg, config_path);
    if (run->parsed()) return cmd_run(config_path);
    if (sweep->parsed()) return cmd_sweep_b(config_path);
    if (coupling->parsed()) return cmd_coupling(config_path);
    if (chatter->parsed()) return cmd_chatter(config_path);
    if (gen->parsed()) return cmd_gen_mdp(config_path);
  } catch (const sarsalab::Error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitError;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
