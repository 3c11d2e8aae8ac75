#include "sarsalab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "sarsalab/errors.hpp"
#include "sarsalab/serialize.hpp"

namespace sarsalab {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<long> parse_long_list(const std::string& value) {
  std::vector<long> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stol(item));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& value) {
  std::vector<int> out;
  for (long v : parse_long_list(value)) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    std::string value;
    std::getline(fields, value);
    value = trim(value);
    if (value.empty()) throw IoError("config: missing value for key '" + key + "'");

    if (key == "mode") cfg.mode = value;
    else if (key == "mdp") cfg.mdp_kind = value;
    else if (key == "mdp_file") cfg.mdp_file = value;
    else if (key == "n_states") cfg.n_states = std::stoi(value);
    else if (key == "n_actions") cfg.n_actions = std::stoi(value);
    else if (key == "min_prob") cfg.min_prob = std::stod(value);
    else if (key == "gamma") cfg.gamma = std::stod(value);
    else if (key == "r_max") cfg.r_max = std::stod(value);
    else if (key == "mdp_seed") cfg.mdp_seed = std::stoull(value);
    else if (key == "features") cfg.feature_kind = value;
    else if (key == "feature_file") cfg.feature_file = value;
    else if (key == "n_features") cfg.n_features = std::stoi(value);
    else if (key == "feature_seed") cfg.feature_seed = std::stoull(value);
    else if (key == "operator") cfg.operator_kind = value;
    else if (key == "sigma") cfg.sigma = std::stod(value);
    else if (key == "omega") cfg.omega = std::stod(value);
    else if (key == "epsilon") cfg.epsilon = std::stod(value);
    else if (key == "schedule") cfg.schedule_kind = value;
    else if (key == "w") cfg.w = std::stod(value);
    else if (key == "alpha0") cfg.alpha0 = std::stod(value);
    else if (key == "radius") cfg.radius = std::stod(value);
    else if (key == "horizon") cfg.horizon = std::stol(value);
    else if (key == "inner_b") cfg.inner_b = std::stoi(value);
    else if (key == "n_replications") cfg.n_replications = std::stoi(value);
    else if (key == "master_seed") cfg.master_seed = std::stoull(value);
    else if (key == "checkpoints") cfg.checkpoints = parse_long_list(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "export_trace") cfg.export_trace = std::stoi(value) != 0;
    else if (key == "coupling_t") cfg.coupling_t = std::stol(value);
    else if (key == "coupling_taus") cfg.coupling_taus = parse_int_list(value);
    else if (key == "coupling_reps") cfg.coupling_reps = std::stoi(value);
    else if (key == "b_list") cfg.b_list = parse_int_list(value);
    else if (key == "budget") cfg.budget = std::stol(value);
    else if (key == "chatter_trials") cfg.chatter_trials = std::stoi(value);
    else if (key == "chatter_horizon") cfg.chatter_horizon = std::stol(value);
    else throw IoError("config: unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text_file(path));
}

namespace {

FiniteMdp make_mdp(const ExperimentConfig& cfg) {
  if (cfg.mdp_kind == "two_state") return two_state_mdp();
  if (cfg.mdp_kind == "random")
    return build_random_mdp(cfg.n_states, cfg.n_actions, cfg.r_max, cfg.gamma,
                            cfg.min_prob, cfg.mdp_seed);
  if (cfg.mdp_kind == "file") {
    if (cfg.mdp_file.empty()) throw ParameterError("config: mdp=file needs mdp_file");
    return load_mdp(cfg.mdp_file);
  }
  throw ParameterError("config: unknown mdp kind '" + cfg.mdp_kind + "'");
}

FeatureMap make_features(const ExperimentConfig& cfg, const FiniteMdp& mdp) {
  FeatureMap fm;
  if (cfg.feature_kind == "one_hot")
    fm = one_hot_features(mdp.n_states, mdp.n_actions);
  else if (cfg.feature_kind == "random")
    fm = random_features(mdp.n_states, mdp.n_actions, cfg.n_features, cfg.feature_seed);
  else if (cfg.feature_kind == "poly")
    fm = poly_features(mdp.n_states, mdp.n_actions, cfg.n_features);
  else if (cfg.feature_kind == "file")
    fm = load_features(cfg.feature_file);
  else
    throw ParameterError("config: unknown feature kind '" + cfg.feature_kind + "'");
  if (fm.n_states != mdp.n_states || fm.n_actions != mdp.n_actions)
    throw ParameterError("config: feature table shape does not match the MDP");
  return fm;
}

FixedPointReport solve_with_tight_radius(const FiniteMdp& mdp, const FeatureMap& fm,
                                         const PolicyOperator& op,
                                         double config_radius) {
  FixedPointOptions options;
  const FixedPointReport first = solve_fixed_point(mdp, fm, op, options);
  options.radius = config_radius > 0.0
                       ? config_radius
                       : 1.1 * first.theta_star.norm() + 0.1;
  if (options.radius < first.theta_star.norm())
    throw ParameterError("config: radius smaller than ||theta*||; bounds need ||theta*|| <= R");
  return solve_fixed_point(mdp, fm, op, options);
}

}  // namespace

std::pair<PolicyOperator, FixedPointReport> select_softmax_operator(
    const FiniteMdp& mdp, const FeatureMap& fm, double config_radius) {
  std::vector<double> grid = {1.0, 2.0, 5.0, 10.0, 20.0};
  for (double sigma = 40.0; sigma <= 1e9; sigma *= 2.0) grid.push_back(sigma);
  for (double sigma : grid) {
    const PolicyOperator op = PolicyOperator::softmax(sigma);
    FixedPointReport report;
    try {
      report = solve_with_tight_radius(mdp, fm, op, config_radius);
    } catch (const NoFixedPointError&) {
      continue;  // operator too sharp at this temperature
    }
    // The extra quarter-|w_l| margin keeps the 1/(2 w_s) step-size scale sane.
    if (report.assumption2_ok && report.w_s >= 0.25 * std::abs(report.w_l))
      return {op, report};
  }
  throw Error("select_softmax_operator: no grid temperature satisfies Assumption 2");
}

Instance prepare_instance(const ExperimentConfig& cfg) {
  Instance instance;
  instance.mdp = make_mdp(cfg);
  instance.features = make_features(cfg, instance.mdp);
  instance.name = cfg.mdp_kind;
  if (cfg.operator_kind == "softmax_auto") {
    auto [op, report] =
        select_softmax_operator(instance.mdp, instance.features, cfg.radius);
    instance.op = op;
    instance.report = report;
    return instance;
  }
  if (cfg.operator_kind == "softmax")
    instance.op = PolicyOperator::softmax(cfg.sigma);
  else if (cfg.operator_kind == "mellowmax")
    instance.op = PolicyOperator::mellowmax(cfg.omega);
  else if (cfg.operator_kind == "epsilon_greedy")
    instance.op = PolicyOperator::epsilon_greedy(cfg.epsilon);
  else
    throw ParameterError("config: unknown operator '" + cfg.operator_kind + "'");
  instance.report =
      solve_with_tight_radius(instance.mdp, instance.features, instance.op, cfg.radius);
  return instance;
}

std::vector<Instance> default_suite() {
  std::vector<Instance> suite;
  {
    ExperimentConfig cfg;
    cfg.mdp_kind = "two_state";
    cfg.feature_kind = "one_hot";
    cfg.operator_kind = "softmax_auto";
    Instance instance = prepare_instance(cfg);
    instance.name = "two_state";
    suite.push_back(std::move(instance));
  }
  for (int k = 1; k <= 5; ++k) {
    ExperimentConfig cfg;
    cfg.mdp_kind = "random";
    cfg.n_states = 10;
    cfg.n_actions = 3;
    cfg.min_prob = 0.01;
    cfg.gamma = 0.9;
    cfg.r_max = 1.0;
    cfg.mdp_seed = static_cast<std::uint64_t>(k);
    cfg.feature_kind = "random";
    cfg.n_features = 4;
    cfg.feature_seed = static_cast<std::uint64_t>(100 + k);
    cfg.operator_kind = "softmax_auto";
    Instance instance = prepare_instance(cfg);
    instance.name = "random_" + std::to_string(k);
    suite.push_back(std::move(instance));
  }
  return suite;
}

StepSchedule resolve_schedule(const ExperimentConfig& cfg,
                              const FixedPointReport& report) {
  const auto resolve_w = [&]() {
    const double w = cfg.w > 0.0 ? cfg.w : report.w_s;
    if (!(w > 0.0))
      throw ParameterError(
          "schedule: w_s is not positive on this instance; supply w explicitly");
    return w;
  };
  if (cfg.schedule_kind == "decaying") return StepSchedule::decaying(resolve_w());
  if (cfg.schedule_kind == "constant") return StepSchedule::constant(cfg.alpha0);
  if (cfg.schedule_kind == "fitted_decaying")
    return StepSchedule::fitted_decaying(resolve_w(), cfg.inner_b);
  throw ParameterError("config: unknown schedule '" + cfg.schedule_kind + "'");
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 2;
  const int workers = std::min(n, static_cast<int>(hw));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto body = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::vector<long> resolved_checkpoints(const ExperimentConfig& cfg) {
  std::vector<long> marks =
      cfg.checkpoints.empty() ? log_checkpoints(cfg.horizon) : cfg.checkpoints;
  std::vector<long> kept;
  for (long t : marks)
    if (t >= 1 && t <= cfg.horizon && t % cfg.inner_b == 0) kept.push_back(t);
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.empty()) throw ParameterError("experiment: no usable checkpoints");
  return kept;
}

enum class BoundKind { kNone, kTheorem1, kTheorem2, kTheorem3Decaying, kTheorem3Constant };

BoundKind classify_bound(const ExperimentConfig& cfg, const StepSchedule& schedule,
                         const FixedPointReport& report, std::string* warning) {
  if (!report.assumption2_ok) {
    *warning = "assumption 2 violated at theta*; running descriptive mode";
    return BoundKind::kNone;
  }
  switch (schedule.kind) {
    case StepSchedule::Kind::kDecaying:
      if (cfg.inner_b != 1) {
        *warning = "no bound covers the (t+1)-indexed decaying schedule with B > 1";
        return BoundKind::kNone;
      }
      if (schedule.w > report.w_s) {
        *warning = "w exceeds w_s; Theorem 1 inapplicable";
        return BoundKind::kNone;
      }
      return BoundKind::kTheorem1;
    case StepSchedule::Kind::kFittedDecaying:
      if (schedule.w > report.w_s) {
        *warning = "w exceeds w_s; Theorem 3 inapplicable";
        return BoundKind::kNone;
      }
      return BoundKind::kTheorem3Decaying;
    case StepSchedule::Kind::kConstant:
      if (!(schedule.alpha0 > 0.0)) {
        *warning = "zero constant step size; frozen learner, descriptive run";
        return BoundKind::kNone;
      }
      if (cfg.inner_b == 1) {
        if (!(schedule.alpha0 < 1.0 / (2.0 * report.w_s))) {
          *warning = "alpha0 >= 1/(2 w_s); Theorem 2 inapplicable";
          return BoundKind::kNone;
        }
        return BoundKind::kTheorem2;
      }
      if (!(schedule.alpha0 < 1.0 / (2.0 * report.w_s * cfg.inner_b))) {
        *warning = "alpha0 >= 1/(2 w_s B); Theorem 3(2) inapplicable";
        return BoundKind::kNone;
      }
      return BoundKind::kTheorem3Constant;
  }
  return BoundKind::kNone;
}

}  // namespace

MseCurve run_mse_experiment(const Instance& instance, const ExperimentConfig& cfg) {
  if (cfg.n_replications < 1)
    throw ParameterError("experiment: n_replications must be >= 1");
  const std::vector<long> checkpoints = resolved_checkpoints(cfg);
  const FixedPointReport& report = instance.report;
  const StepSchedule schedule = resolve_schedule(cfg, report);

  MseCurve curve;
  curve.radius = report.radius_used;
  curve.g_limit = instance.mdp.r_max + 2.0 * report.radius_used;
  const BoundKind bound_kind = classify_bound(cfg, schedule, report, &curve.warning);
  curve.bounds_applicable = bound_kind != BoundKind::kNone;

  const int n = cfg.n_replications;
  const std::size_t n_marks = checkpoints.size();
  std::vector<std::vector<double>> squared_error(
      static_cast<std::size_t>(n), std::vector<double>(n_marks, 0.0));
  std::vector<double> grad_max(static_cast<std::size_t>(n), 0.0);
  std::vector<double> theta_max(static_cast<std::size_t>(n), 0.0);

  LearnerConfig base;
  base.radius = report.radius_used;
  base.schedule = schedule;
  base.horizon = cfg.horizon;
  base.inner_b = cfg.inner_b;

  parallel_for(n, [&](int i) {
    LearnerConfig worker_cfg = base;
    worker_cfg.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
    const ThetaTrace trace = run_fitted_sarsa(instance.mdp, instance.features,
                                              instance.op, worker_cfg, checkpoints);
    for (std::size_t j = 0; j < n_marks; ++j)
      squared_error[static_cast<std::size_t>(i)][j] =
          (trace.thetas[j] - report.theta_star).squaredNorm();
    grad_max[static_cast<std::size_t>(i)] = trace.gradient_norm_max;
    theta_max[static_cast<std::size_t>(i)] = trace.theta_norm_max;
  });

  curve.gradient_norm_max = *std::max_element(grad_max.begin(), grad_max.end());
  curve.theta_norm_max = *std::max_element(theta_max.begin(), theta_max.end());

  BoundInputs inputs;
  inputs.g_const = report.g_const;
  inputs.lambda = report.lambda;
  inputs.c_lipschitz = report.c_lipschitz;
  inputs.n_actions = instance.mdp.n_actions;
  inputs.w = schedule.w;
  inputs.w_s = report.w_s;
  inputs.m = report.m;
  inputs.rho = report.rho;
  inputs.inner_B = cfg.inner_b;
  inputs.alpha0 = schedule.alpha0;
  inputs.theta0_error = report.theta_star.squaredNorm();  // theta_0 = 0

  curve.points.resize(n_marks);
  for (std::size_t j = 0; j < n_marks; ++j) {
    MsePoint& point = curve.points[j];
    point.t = checkpoints[j];
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += squared_error[static_cast<std::size_t>(i)][j];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = squared_error[static_cast<std::size_t>(i)][j] - mean;
      var += d * d;
    }
    var = n > 1 ? var / (n - 1) : 0.0;
    point.mse_mean = mean;
    point.mse_stderr = std::sqrt(var / n);

    if (bound_kind == BoundKind::kNone) continue;
    inputs.horizon_T = bound_kind == BoundKind::kTheorem1 || bound_kind == BoundKind::kTheorem2
                           ? point.t
                           : point.t / cfg.inner_b;
    switch (bound_kind) {
      case BoundKind::kTheorem1:
        point.breakdown = theorem1_bound(inputs);
        break;
      case BoundKind::kTheorem2:
        point.breakdown = theorem2_bound(inputs);
        break;
      case BoundKind::kTheorem3Decaying:
        point.breakdown = theorem3_decaying_bound(inputs);
        break;
      case BoundKind::kTheorem3Constant:
        point.breakdown = theorem3_constant_bound(inputs);
        break;
      case BoundKind::kNone:
        break;
    }
    point.bound = point.breakdown.total;
    point.bound_valid = point.breakdown.applicable;
  }
  return curve;
}

RateFit fit_rate(const MseCurve& curve, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ParameterError("fit_rate: tail_fraction must lie in (0,1]");
  std::vector<std::pair<double, double>> points;
  for (const MsePoint& p : curve.points) {
    if (p.t < 1) continue;
    points.emplace_back(static_cast<double>(p.t), p.mse_mean);
  }
  const int tail = std::max(
      4, static_cast<int>(std::ceil(tail_fraction * static_cast<double>(points.size()))));
  if (static_cast<int>(points.size()) < 4 || tail > static_cast<int>(points.size()))
    throw FitError("fit_rate: needs at least 4 tail checkpoints");
  points.erase(points.begin(), points.end() - tail);

  double x_mean = 0.0;
  double y_mean = 0.0;
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (const auto& [t, mse] : points) {
    if (!(mse > 0.0))
      throw FitError("fit_rate: nonpositive mse in the tail (below float noise)");
    logs.emplace_back(std::log(t), std::log(mse));
    x_mean += logs.back().first;
    y_mean += logs.back().second;
  }
  x_mean /= static_cast<double>(logs.size());
  y_mean /= static_cast<double>(logs.size());

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - x_mean) * (x - x_mean);
    sxy += (x - x_mean) * (y - y_mean);
  }
  if (sxx <= 0.0) throw FitError("fit_rate: degenerate abscissa");

  RateFit fit;
  fit.points_used = static_cast<int>(logs.size());
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& [x, y] : logs) {
    const double predicted = fit.intercept + fit.slope * x;
    ss_res += (y - predicted) * (y - predicted);
    ss_tot += (y - y_mean) * (y - y_mean);
  }
  fit.r_squared = ss_tot <= 1e-300 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

std::vector<BSweepRow> b_sweep(const Instance& instance, const ExperimentConfig& cfg) {
  const FixedPointReport& report = instance.report;
  std::vector<BSweepRow> rows;
  for (int b : cfg.b_list) {
    if (b < 1 || cfg.budget % b != 0)
      throw ParameterError("b_sweep: budget must be a positive multiple of every B");
    ExperimentConfig local = cfg;
    local.inner_b = b;
    local.schedule_kind = cfg.schedule_kind == "constant" ? "constant" : "fitted_decaying";
    const StepSchedule schedule = resolve_schedule(local, report);

    LearnerConfig learner;
    learner.radius = report.radius_used;
    learner.schedule = schedule;
    learner.horizon = cfg.budget;
    learner.inner_b = b;
    learner.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(b));
    const std::vector<long> marks = log_checkpoints(cfg.budget);
    const ThetaTrace trace =
        run_fitted_sarsa(instance.mdp, instance.features, instance.op, learner, marks);

    BSweepRow row;
    row.inner_b = b;
    row.horizon = cfg.budget;
    row.final_error = (trace.thetas.back() - report.theta_star).norm();
    if (b == 1) {
      const ThetaTrace reference =
          run_sarsa(instance.mdp, instance.features, instance.op, learner, marks);
      row.bit_checked = true;
      row.bit_identical = reference.times == trace.times &&
                          reference.gradient_norm_max == trace.gradient_norm_max &&
                          reference.theta_norm_max == trace.theta_norm_max;
      for (std::size_t i = 0; row.bit_identical && i < trace.thetas.size(); ++i)
        row.bit_identical = trace.thetas[i] == reference.thetas[i];
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<CouplingPoint> coupling_diagnostic(const Instance& instance,
                                               const ExperimentConfig& cfg) {
  const FixedPointReport& report = instance.report;
  const long t = cfg.coupling_t;
  std::vector<int> taus = cfg.coupling_taus;
  std::sort(taus.begin(), taus.end(), std::greater<>());
  for (int tau : taus)
    if (!(t > tau && tau >= 1))
      throw ParameterError("coupling: requires t > tau >= 1");
  const int n = cfg.coupling_reps;
  if (n < 1) throw ParameterError("coupling: needs at least one replication");

  ExperimentConfig sarsa_cfg = cfg;
  sarsa_cfg.inner_b = 1;
  const StepSchedule schedule = resolve_schedule(sarsa_cfg, report);
  LearnerConfig base;
  base.radius = report.radius_used;
  base.schedule = schedule;
  base.inner_b = 1;

  const FiniteMdp& mdp = instance.mdp;
  const std::size_t n_cells = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions *
                              mdp.n_states * mdp.n_actions;
  const auto cell_of = [&](const Observation& obs) {
    return ((static_cast<std::size_t>(obs.x) * mdp.n_actions + obs.a) * mdp.n_states +
            obs.x_next) *
               mdp.n_actions +
           obs.a_next;
  };

  const std::size_t n_taus = taus.size();
  // Integer counts merge associatively, so the aggregate is deterministic
  // regardless of worker interleaving.
  std::vector<std::vector<long>> sarsa_hist(n_taus, std::vector<long>(n_cells, 0));
  std::vector<std::vector<long>> frozen_hist(n_taus, std::vector<long>(n_cells, 0));
  std::vector<long> mismatches(n_taus, 0);
  std::mutex merge_mutex;

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 2;
  const int workers = std::min(n, static_cast<int>(hw));
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  for (int worker = 0; worker < workers; ++worker) {
    pool.emplace_back([&] {
      std::vector<std::vector<long>> local_sarsa(n_taus, std::vector<long>(n_cells, 0));
      std::vector<std::vector<long>> local_frozen(n_taus, std::vector<long>(n_cells, 0));
      std::vector<long> local_mismatch(n_taus, 0);
      try {
        while (true) {
          const int rep = next.fetch_add(1);
          if (rep >= n) break;
          LearnerConfig worker_cfg = base;
          worker_cfg.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(rep));
          SarsaProcess process(mdp, instance.features, instance.op, worker_cfg);
          std::vector<SarsaProcess> frozen;
          frozen.reserve(n_taus);
          for (int tau : taus) {
            while (process.time() < t - tau) process.step();
            frozen.push_back(process.clone());
            frozen.back().freeze_policy();
          }
          while (process.time() < t + 1) process.step();
          const std::size_t live_cell = cell_of(process.last_observation());
          for (std::size_t k = 0; k < n_taus; ++k) {
            while (frozen[k].time() < t + 1) frozen[k].step();
            const std::size_t aux_cell = cell_of(frozen[k].last_observation());
            ++local_sarsa[k][live_cell];
            ++local_frozen[k][aux_cell];
            if (aux_cell != live_cell) ++local_mismatch[k];
          }
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
      const std::lock_guard<std::mutex> lock(merge_mutex);
      for (std::size_t k = 0; k < n_taus; ++k) {
        mismatches[k] += local_mismatch[k];
        for (std::size_t c = 0; c < n_cells; ++c) {
          sarsa_hist[k][c] += local_sarsa[k][c];
          frozen_hist[k][c] += local_frozen[k][c];
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<CouplingPoint> points;
  for (std::size_t k = 0; k < n_taus; ++k) {
    CouplingPoint point;
    point.tau = taus[k];
    point.paired_replications = n;
    double tv = 0.0;
    for (std::size_t c = 0; c < n_cells; ++c)
      tv += std::abs(static_cast<double>(sarsa_hist[k][c] - frozen_hist[k][c]));
    point.empirical_tv = 0.5 * tv / static_cast<double>(n);
    point.mismatch_rate = static_cast<double>(mismatches[k]) / static_cast<double>(n);

    // Policy-drift TV bound on the O_t laws: the X-marginal recursion
    // contributes the windowed double sum of step sizes, the two action
    // draws of O_t contribute the single sums.
    double tail1 = 0.0;
    double tail2 = 0.0;
    double double_sum = 0.0;
    for (long j = t - point.tau; j <= t - 1; ++j) {
      const double alpha = schedule.at(j);
      tail1 += alpha;
      if (j <= t - 2) tail2 += alpha;
      double_sum += static_cast<double>(t - j) * alpha;  // alpha_j appears in t-j windows
    }
    point.bound = report.c_lipschitz * mdp.n_actions * report.g_const *
                  (double_sum + tail1 + tail2);
    point.mixing_term = 4.0 * report.g_const * report.g_const * report.m *
                        std::pow(report.rho, point.tau - 1);
    points.push_back(point);
  }
  std::sort(points.begin(), points.end(),
            [](const CouplingPoint& a, const CouplingPoint& b) { return a.tau < b.tau; });
  return points;
}

namespace {

// Epsilon-smoothed deterministic policy encoded by one action index per state.
PolicyMatrix smoothed_deterministic(const FiniteMdp& mdp, int encoded,
                                    double epsilon) {
  PolicyMatrix policy = PolicyMatrix::zeros(mdp.n_states, mdp.n_actions);
  for (int x = 0; x < mdp.n_states; ++x) {
    const int pick = (encoded >> x) & 1;
    for (int a = 0; a < mdp.n_actions; ++a)
      policy.row(x)[static_cast<std::size_t>(a)] =
          epsilon / mdp.n_actions + (a == pick ? 1.0 - epsilon : 0.0);
  }
  return policy;
}

struct ChatterScreen {
  bool no_stable_policy = false;  // no deterministic policy is greedy-consistent
  double fixed_point_spread = 0.0;
};

// A deterministic policy is greedy-consistent when it is greedy with respect
// to its own (epsilon-smoothed) TD fixed point. Instances without any such
// policy leave epsilon-greedy SARSA no attractor to settle on; the spread of
// the competing fixed points gauges how visible the resulting cycle is.
ChatterScreen screen_for_chatter(const FiniteMdp& mdp, const FeatureMap& fm,
                                 double epsilon) {
  ChatterScreen screen;
  screen.no_stable_policy = true;
  std::vector<Eigen::VectorXd> fixed_points;
  for (int encoded = 0; encoded < 1 << mdp.n_states; ++encoded) {
    Eigen::VectorXd theta;
    try {
      theta = td_fixed_point(mdp, fm, smoothed_deterministic(mdp, encoded, epsilon));
    } catch (const IndependenceError&) {
      continue;
    }
    fixed_points.push_back(theta);
    bool consistent = true;
    for (int x = 0; x < mdp.n_states && consistent; ++x) {
      int best_action = 0;
      for (int a = 1; a < mdp.n_actions; ++a)
        if (fm.vec(x, a).dot(theta) > fm.vec(x, best_action).dot(theta))
          best_action = a;
      consistent = best_action == ((encoded >> x) & 1);
    }
    if (consistent) screen.no_stable_policy = false;
  }
  for (std::size_t i = 0; i < fixed_points.size(); ++i)
    for (std::size_t j = i + 1; j < fixed_points.size(); ++j)
      screen.fixed_point_spread = std::max(
          screen.fixed_point_spread, (fixed_points[i] - fixed_points[j]).norm());
  return screen;
}

// Cycling instance: no deterministic policy is greedy-consistent at its own
// TD fixed point, and the piecewise mean-field flow orbits the greedy-region
// arrangement with diameter ~0.3, so epsilon-greedy SARSA cannot settle.
std::pair<FiniteMdp, FeatureMap> crafted_chatter_instance() {
  FiniteMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.gamma = 0.9;
  mdp.r_max = 1.0;
  mdp.kernel = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  mdp.rewards = {0.060208511109235086, 0.20249835929303284,
                 0.1369224234795885, 0.57252171979057587};
  mdp.validate();
  FeatureMap fm;
  fm.n_states = 2;
  fm.n_actions = 2;
  fm.n_features = 2;
  fm.table = {0.027106398102728968, 0.16567249733851369,
              -0.14852556789041005, 0.10959619345204907,
              -0.99970940327849167, -0.024106202450034534,
              0.12031404601826966, -0.3288542414799836};
  return {mdp, fm};
}

}  // namespace

ChatterSummary chatter_demo(const ExperimentConfig& cfg) {
  LearnerConfig learner;
  learner.radius = 2.0;
  learner.schedule = StepSchedule::constant(0.002);
  learner.horizon = cfg.chatter_horizon;
  learner.inner_b = 1;

  std::vector<long> window;
  const long start = (cfg.chatter_horizon * 4) / 5;
  const long stride = std::max<long>(1, (cfg.chatter_horizon - start) / 60);
  for (long mark = start; mark <= cfg.chatter_horizon; mark += stride)
    window.push_back(mark);

  const auto diameter = [](const ThetaTrace& trace) {
    double worst = 0.0;
    for (std::size_t i = 0; i < trace.thetas.size(); ++i)
      for (std::size_t j = i + 1; j < trace.thetas.size(); ++j)
        worst = std::max(worst, (trace.thetas[i] - trace.thetas[j]).norm());
    return worst;
  };

  // Candidate 0 is the hand-built cycling instance; the rest are random
  // draws. Each candidate runs the epsilon-greedy and softmax learners under
  // the same budget; the best greedy-vs-smooth contrast wins.
  ChatterSummary best;
  double best_ratio = -1.0;
  for (int candidate = 0; candidate <= cfg.chatter_trials; ++candidate) {
    const bool crafted = candidate == 0;
    const std::uint64_t mdp_seed =
        cfg.mdp_seed + static_cast<std::uint64_t>(candidate - 1);
    const std::uint64_t feature_seed =
        cfg.feature_seed + static_cast<std::uint64_t>(candidate - 1);
    const auto [mdp, fm] =
        crafted ? crafted_chatter_instance()
                : std::pair{build_random_mdp(2, 2, 1.0, 0.9, 0.05, mdp_seed),
                            random_features(2, 2, 2, feature_seed)};
    if (!crafted && !screen_for_chatter(mdp, fm, cfg.epsilon).no_stable_policy)
      continue;  // a greedy-stable policy exists, nothing to demonstrate
    learner.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(candidate));
    const ThetaTrace eps_trace = run_sarsa(
        mdp, fm, PolicyOperator::epsilon_greedy(cfg.epsilon), learner, window);
    const ThetaTrace smooth_trace =
        run_sarsa(mdp, fm, PolicyOperator::softmax(5.0), learner, window);
    const double d_eps = diameter(eps_trace);
    const double d_smooth = diameter(smooth_trace);
    const double ratio = d_eps / std::max(d_smooth, 1e-12);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best.diameter_eps_greedy = d_eps;
      best.diameter_smooth = d_smooth;
      best.theta_norm_max = eps_trace.theta_norm_max;
      best.mdp_seed = crafted ? 0 : mdp_seed;
      best.feature_seed = crafted ? 0 : feature_seed;
      best.crafted = crafted;
      best.found_chatter = d_smooth < 0.1 * d_eps;
    }
  }
  return best;
}

std::string mse_csv(const MseCurve& curve) {
  std::ostringstream out;
  out << "T,mse_mean,mse_stderr,bound\n";
  for (const MsePoint& p : curve.points) {
    out << p.t << "," << format_g17(p.mse_mean) << "," << format_g17(p.mse_stderr)
        << ",";
    if (p.bound_valid) out << format_g17(p.bound);
    out << "\n";
  }
  return out.str();
}

std::string bound_audit_csv(const MseCurve& curve) {
  std::ostringstream out;
  out << "T,tau0,lambda,term1,term2,total\n";
  for (const MsePoint& p : curve.points) {
    if (!p.bound_valid) continue;
    out << p.t << "," << p.breakdown.tau0 << "," << format_g17(p.breakdown.lambda)
        << "," << format_g17(p.breakdown.term1) << "," << format_g17(p.breakdown.term2)
        << "," << format_g17(p.breakdown.total) << "\n";
  }
  return out.str();
}

std::string rate_fit_text(const RateFit& fit) {
  std::ostringstream out;
  out << "rate_fit v1\n";
  out << "slope " << format_g17(fit.slope) << "\n";
  out << "intercept " << format_g17(fit.intercept) << "\n";
  out << "r_squared " << format_g17(fit.r_squared) << "\n";
  out << "points_used " << fit.points_used << "\n";
  return out.str();
}

std::string b_sweep_csv(const std::vector<BSweepRow>& rows) {
  std::ostringstream out;
  out << "B,final_error,bit_identical\n";
  for (const BSweepRow& row : rows) {
    out << row.inner_b << "," << format_g17(row.final_error) << ",";
    if (row.bit_checked) out << (row.bit_identical ? 1 : 0);
    out << "\n";
  }
  return out.str();
}

std::string coupling_csv(const std::vector<CouplingPoint>& points) {
  std::ostringstream out;
  out << "tau,empirical_tv,mismatch_rate,bound,mixing_term,replications\n";
  for (const CouplingPoint& p : points)
    out << p.tau << "," << format_g17(p.empirical_tv) << ","
        << format_g17(p.mismatch_rate) << "," << format_g17(p.bound) << ","
        << format_g17(p.mixing_term) << "," << p.paired_replications << "\n";
  return out.str();
}

std::string chatter_text(const ChatterSummary& summary) {
  std::ostringstream out;
  out << "chatter_demo v1\n";
  out << "diameter_eps_greedy " << format_g17(summary.diameter_eps_greedy) << "\n";
  out << "diameter_smooth " << format_g17(summary.diameter_smooth) << "\n";
  out << "theta_norm_max " << format_g17(summary.theta_norm_max) << "\n";
  out << "crafted_instance " << (summary.crafted ? 1 : 0) << "\n";
  out << "mdp_seed " << summary.mdp_seed << "\n";
  out << "feature_seed " << summary.feature_seed << "\n";
  out << "found_chatter " << (summary.found_chatter ? 1 : 0) << "\n";
  return out.str();
}

}  // namespace sarsalab
