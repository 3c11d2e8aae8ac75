#include "sarsalab/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sarsalab/errors.hpp"
#include "sarsalab/format.hpp"

namespace sarsalab {

StepSchedule StepSchedule::decaying(double w) {
  if (!(w > 0.0)) throw ParameterError("decaying schedule: w must be > 0");
  StepSchedule s;
  s.kind = Kind::kDecaying;
  s.w = w;
  return s;
}

StepSchedule StepSchedule::constant(double alpha0) {
  if (!(alpha0 >= 0.0)) throw ParameterError("constant schedule: alpha0 must be >= 0");
  StepSchedule s;
  s.kind = Kind::kConstant;
  s.alpha0 = alpha0;
  return s;
}

StepSchedule StepSchedule::fitted_decaying(double w, int block_b) {
  if (!(w > 0.0)) throw ParameterError("fitted_decaying schedule: w must be > 0");
  if (block_b < 1) throw ParameterError("fitted_decaying schedule: B must be >= 1");
  StepSchedule s;
  s.kind = Kind::kFittedDecaying;
  s.w = w;
  s.block_b = block_b;
  return s;
}

double StepSchedule::at(long t) const {
  if (t < 0) throw ParameterError("step_size: t must be >= 0");
  switch (kind) {
    case Kind::kDecaying:
      return 1.0 / (2.0 * w * static_cast<double>(t + 1));
    case Kind::kConstant:
      return alpha0;
    case Kind::kFittedDecaying:
      if (t == 0) return 1.0 / (std::sqrt(2.0) * block_b * w);
      return 1.0 / (2.0 * static_cast<double>(t) * w);
  }
  throw ParameterError("step_size: unknown schedule kind");
}

double step_size(const StepSchedule& schedule, long t) { return schedule.at(t); }

double td_error(const Eigen::VectorXd& theta, const Observation& obs,
                double gamma, const FeatureMap& fm) {
  return obs.reward + gamma * fm.vec(obs.x_next, obs.a_next).dot(theta) -
         fm.vec(obs.x, obs.a).dot(theta);
}

Eigen::VectorXd semi_gradient(const Eigen::VectorXd& theta, const Observation& obs,
                              double gamma, const FeatureMap& fm) {
  return fm.vec(obs.x, obs.a) * td_error(theta, obs, gamma, fm);
}

Eigen::VectorXd project(Eigen::VectorXd theta, double radius) {
  if (!(radius > 0.0)) throw ParameterError("project: radius must be > 0");
  double norm = theta.norm();
  while (norm > radius) {
    theta *= radius / norm;
    norm = theta.norm();
  }
  return theta;
}

SarsaProcess::SarsaProcess(const FiniteMdp& mdp, const FeatureMap& fm,
                           const PolicyOperator& op, const LearnerConfig& cfg)
    : mdp_(&mdp), fm_(&fm), cfg_(cfg), rng_(cfg.seed), op_(op) {
  if (fm.n_states != mdp.n_states || fm.n_actions != mdp.n_actions)
    throw ParameterError("SarsaProcess: feature map shape mismatch");
  if (!(cfg.radius > 0.0)) throw ParameterError("SarsaProcess: radius must be > 0");
  if (cfg.inner_b < 1) throw ParameterError("SarsaProcess: inner_b must be >= 1");

  theta_ = cfg.theta0.size() == 0 ? Eigen::VectorXd::Zero(fm.n_features).eval()
                                  : cfg.theta0;
  if (theta_.size() != fm.n_features)
    throw ParameterError("SarsaProcess: theta0 dimension mismatch");
  theta_ = project(std::move(theta_), cfg.radius);
  theta_norm_max_ = theta_.norm();

  policy_ = PolicyMatrix::zeros(fm.n_states, fm.n_actions);
  q_scratch_.resize(fm.n_pairs());
  improve_into(op_, fm, theta_, policy_, q_scratch_);  // pi_{theta_0}

  x_prev_ = cfg.x0 >= 0 ? cfg.x0 : rng_.uniform_int(mdp.n_states);
  if (x_prev_ >= mdp.n_states) throw ParameterError("SarsaProcess: x0 out of range");
  a_prev_ = rng_.categorical(policy_.row(x_prev_));
}

void SarsaProcess::step() {
  // Observe x_t and r(x_{t-1}, a_{t-1}); draw a_t from the current behavior
  // policy; only then is O_{t-1} complete and the projected update applied.
  const auto [x_next, reward] = sample_step(*mdp_, x_prev_, a_prev_, rng_);
  const int a_next = rng_.categorical(policy_.row(x_next));
  last_obs_ = Observation{x_prev_, a_prev_, x_next, a_next, reward};

  if (!frozen_) {
    const auto phi = fm_->vec(last_obs_.x, last_obs_.a);
    const double delta = last_obs_.reward +
                         mdp_->gamma * fm_->vec(x_next, a_next).dot(theta_) -
                         phi.dot(theta_);
    gradient_norm_max_ =
        std::max(gradient_norm_max_, std::abs(delta) * phi.norm());
    const double alpha = cfg_.schedule.at(time_);
    theta_ += alpha * delta * phi;
    double norm = theta_.norm();
    while (norm > cfg_.radius) {
      theta_ *= cfg_.radius / norm;
      norm = theta_.norm();
    }
    theta_norm_max_ = std::max(theta_norm_max_, norm);
  }

  ++time_;
  if (!frozen_ && time_ % cfg_.inner_b == 0)
    improve_into(op_, *fm_, theta_, policy_, q_scratch_);

  x_prev_ = x_next;
  a_prev_ = a_next;
}

namespace {

ThetaTrace run_process(const FiniteMdp& mdp, const FeatureMap& fm,
                       const PolicyOperator& op, const LearnerConfig& cfg,
                       const std::vector<long>& checkpoints) {
  if (cfg.horizon < 0) throw ParameterError("run: horizon must be >= 0");
  if (cfg.horizon % cfg.inner_b != 0)
    throw ParameterError("run: horizon must be a multiple of inner_b");

  std::vector<long> marks = checkpoints;
  if (cfg.record_full) {
    marks.resize(static_cast<std::size_t>(cfg.horizon) + 1);
    for (long t = 0; t <= cfg.horizon; ++t) marks[static_cast<std::size_t>(t)] = t;
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  for (long t : marks)
    if (t < 0 || t > cfg.horizon)
      throw ParameterError("run: checkpoint outside [0, horizon]");

  SarsaProcess process(mdp, fm, op, cfg);
  ThetaTrace trace;
  std::size_t next_mark = 0;
  const auto record = [&](long t) {
    while (next_mark < marks.size() && marks[next_mark] == t) {
      trace.times.push_back(t);
      trace.thetas.push_back(process.theta());
      trace.grad_norms.push_back(process.gradient_norm_max());
      ++next_mark;
    }
  };
  record(0);
  for (long t = 1; t <= cfg.horizon; ++t) {
    process.step();
    record(t);
  }
  trace.gradient_norm_max = process.gradient_norm_max();
  trace.theta_norm_max = process.theta_norm_max();
  trace.observations_consumed = process.time();
  return trace;
}

}  // namespace

ThetaTrace run_sarsa(const FiniteMdp& mdp, const FeatureMap& fm,
                     const PolicyOperator& op, const LearnerConfig& cfg,
                     const std::vector<long>& checkpoints) {
  if (cfg.inner_b != 1) throw ParameterError("run_sarsa: inner_b must be 1");
  return run_process(mdp, fm, op, cfg, checkpoints);
}

ThetaTrace run_fitted_sarsa(const FiniteMdp& mdp, const FeatureMap& fm,
                            const PolicyOperator& op, const LearnerConfig& cfg,
                            const std::vector<long>& checkpoints) {
  return run_process(mdp, fm, op, cfg, checkpoints);
}

std::string trace_csv(const ThetaTrace& trace) {
  std::ostringstream out;
  const Eigen::Index dim = trace.thetas.empty() ? 0 : trace.thetas.front().size();
  out << "t";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",theta_" << i;
  out << ",grad_norm\n";
  for (std::size_t row = 0; row < trace.times.size(); ++row) {
    out << trace.times[row];
    for (Eigen::Index i = 0; i < dim; ++i)
      out << "," << format_g17(trace.thetas[row][i]);
    out << "," << format_g17(trace.grad_norms[row]) << "\n";
  }
  return out.str();
}

std::vector<long> log_checkpoints(long horizon) {
  std::vector<long> marks;
  for (long t = 1; t <= horizon && t > 0; t *= 2) marks.push_back(t);
  if (marks.empty() || marks.back() != horizon) marks.push_back(horizon);
  return marks;
}

}  // namespace sarsalab
