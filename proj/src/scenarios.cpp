#include "mvabo/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mvabo {
namespace {

int argmax_first(const Eigen::VectorXd& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i)
    if (values(i) > values(best)) best = i;
  return best;
}

}  // namespace

int mt_select(const RiskBoundTable& table) {
  if (table.size() == 0)
    throw std::invalid_argument("mt_select: empty design set");
  if (!table.has_g)
    throw std::invalid_argument("mt_select: scalarized bounds missing");
  return argmax_first(table.g_upper);
}

int mt_recommend(const std::vector<int>& selected,
                 const std::vector<double>& per_step_lower,
                 RecommendationRule rule,
                 const Eigen::VectorXd& current_lower) {
  if (selected.empty())
    throw std::invalid_argument("mt_recommend: empty history");
  if (selected.size() != per_step_lower.size())
    throw std::invalid_argument("mt_recommend: ragged history");
  size_t best = 0;
  for (size_t t = 1; t < selected.size(); ++t) {
    const double candidate = rule == RecommendationRule::kPerStepBounds
                                 ? per_step_lower[t]
                                 : current_lower(selected[t]);
    const double incumbent = rule == RecommendationRule::kPerStepBounds
                                 ? per_step_lower[best]
                                 : current_lower(selected[best]);
    if (candidate > incumbent) best = t;
  }
  return selected[best];
}

ParetoState estimate_pareto(const RiskBoundTable& table,
                            const Eigen::Vector2d& epsilon) {
  const int n = table.size();
  ParetoState state;
  state.step = table.step;
  state.epsilon = epsilon;

  std::vector<bool> in_hat(n, false);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d pi = table.pessimistic(i);
    bool dominated = false;
    for (int j = 0; j < n && !dominated; ++j) {
      const Eigen::Vector2d pj = table.pessimistic(j);
      if (pj == pi) continue;  // equal-vector pairs never exclude each other
      if (pi(0) <= pj(0) && pi(1) <= pj(1)) dominated = true;
    }
    if (!dominated) {
      in_hat[i] = true;
      state.pareto_hat.push_back(i);
    }
  }

  for (int i = 0; i < n; ++i) {
    if (in_hat[i]) continue;
    const Eigen::Vector2d oi = table.optimistic(i);
    bool epsilon_dominated = false;
    for (const int j : state.pareto_hat) {
      const Eigen::Vector2d pj = table.pessimistic(j);
      if (oi(0) <= pj(0) + epsilon(0) && oi(1) <= pj(1) + epsilon(1)) {
        epsilon_dominated = true;
        break;
      }
    }
    if (!epsilon_dominated) state.potential.push_back(i);
  }

  for (const int i : state.pareto_hat) {
    const Eigen::Vector2d pi = table.pessimistic(i);
    for (const int j : state.pareto_hat) {
      if (j == i) continue;
      const Eigen::Vector2d oj = table.optimistic(j);
      // x stays uncertain while some other front candidate could still beat
      // it by more than epsilon in both coordinates
      if (pi(0) + epsilon(0) < oj(0) && pi(1) + epsilon(1) < oj(1)) {
        state.uncertain.push_back(i);
        break;
      }
    }
  }

  state.terminated = state.potential.empty() && state.uncertain.empty();
  return state;
}

int mo_select(const ParetoState& state, const RiskBoundTable& table) {
  if (state.terminated)
    throw std::logic_error("mo_select: called on a terminated state");
  int best = -1;
  double best_diameter = -1.0;
  // pareto_hat and potential are each sorted; walk their union in index
  // order so ties resolve to the lowest index.
  size_t a = 0, b = 0;
  while (a < state.pareto_hat.size() || b < state.potential.size()) {
    int i;
    if (a == state.pareto_hat.size())
      i = state.potential[b++];
    else if (b == state.potential.size())
      i = state.pareto_hat[a++];
    else if (state.pareto_hat[a] < state.potential[b])
      i = state.pareto_hat[a++];
    else
      i = state.potential[b++];
    const double diameter = rect_diameter(table, i);
    if (diameter > best_diameter) {
      best_diameter = diameter;
      best = i;
    }
  }
  if (best < 0) throw std::logic_error("mo_select: empty selection domain");
  return best;
}

ConstrainedState constrained_step(const RiskBoundTable& table, double h,
                                  const Eigen::Vector2d& epsilon) {
  if (!(h < 0.0))
    throw std::invalid_argument("constrained_step: threshold h must be < 0");
  const int n = table.size();
  ConstrainedState state;
  state.step = table.step;
  state.threshold = h;
  state.epsilon = epsilon;

  for (int i = 0; i < n; ++i)
    if (table.f2_upper(i) >= h - epsilon(1)) state.m_cons.push_back(i);
  for (int i = 0; i < n; ++i)
    if (table.f2_lower(i) >= h - epsilon(1)) state.s_feasible.push_back(i);

  if (state.s_feasible.empty()) {
    state.m_obj.resize(n);
    for (int i = 0; i < n; ++i) state.m_obj[i] = i;
  } else {
    double best_lower = -std::numeric_limits<double>::infinity();
    for (const int i : state.s_feasible)
      best_lower = std::max(best_lower, table.f1_lower(i));
    for (int i = 0; i < n; ++i)
      if (table.f1_upper(i) >= best_lower - epsilon(0))
        state.m_obj.push_back(i);
  }

  std::set_intersection(state.m_cons.begin(), state.m_cons.end(),
                        state.m_obj.begin(), state.m_obj.end(),
                        std::back_inserter(state.m_latent));

  double max_diameter = 0.0;  // max over the empty set is 0
  for (const int i : state.m_latent)
    max_diameter = std::max(max_diameter, rect_diameter(table, i));
  state.terminated = max_diameter <= std::min(epsilon(0), epsilon(1));

  if (!state.s_feasible.empty()) {
    int best = state.s_feasible.front();
    for (const int i : state.s_feasible)
      if (table.f1_lower(i) > table.f1_lower(best)) best = i;
    state.recommendation = best;
  }
  return state;
}

int env_sample(const EnvDistribution& p, RngStream& rng) {
  p.validate();
  const double u = rng.uniform();
  double cumulative = 0.0;
  const int n = static_cast<int>(p.weights.size());
  for (int i = 0; i < n; ++i) {
    cumulative += p.weights(i);
    if (u < cumulative) return i;
  }
  return n - 1;
}

EnvDistribution empirical_env(const std::vector<int>& observed_indices,
                              const std::vector<Eigen::VectorXd>& env_grid) {
  if (observed_indices.empty())
    throw std::invalid_argument("empirical_env: no observed environments");
  EnvDistribution dist;
  dist.support = env_grid;
  dist.weights = Eigen::VectorXd::Zero(env_grid.size());
  for (const int w : observed_indices) {
    if (w < 0 || w >= static_cast<int>(env_grid.size()))
      throw std::invalid_argument("empirical_env: index outside the grid");
    dist.weights(w) += 1.0;
  }
  dist.weights /= static_cast<double>(observed_indices.size());
  return dist;
}

int simulator_env_select(const GpPosterior& model, const Eigen::VectorXd& x,
                         const std::vector<Eigen::VectorXd>& env_grid,
                         bool additive) {
  const Eigen::MatrixXd rows = build_joint_grid({x}, env_grid, additive);
  Eigen::VectorXd mean, variance;
  model.query_batch(rows, mean, variance);
  return argmax_first(variance);
}

int noisy_simulator_select(const GpPosterior& model, const Eigen::VectorXd& x,
                           const std::vector<Eigen::VectorXd>& delta_grid,
                           const EnvDistribution& noise_dist) {
  noise_dist.validate();
  if (noise_dist.weights.size() != static_cast<long>(delta_grid.size()))
    throw std::invalid_argument("noisy_simulator_select: grid/weight mismatch");
  const Eigen::MatrixXd rows = build_joint_grid({x}, delta_grid, true);
  Eigen::VectorXd mean, variance;
  model.query_batch(rows, mean, variance);
  const Eigen::VectorXd weighted =
      variance.array().sqrt().matrix().cwiseProduct(noise_dist.weights);
  return argmax_first(weighted);
}

DiscretizedDesign discretize_design_space(int d1,
                                          const Eigen::Vector2d& epsilon,
                                          double lipschitz_l, double b_tilde,
                                          std::int64_t max_points) {
  if (d1 <= 0) throw std::invalid_argument("discretize: d1 must be positive");
  if (!(lipschitz_l > 0.0) || !(b_tilde > 0.0))
    throw std::invalid_argument("discretize: L and Btilde must be positive");
  if (!(epsilon(0) > 0.0) || !(epsilon(1) > 0.0))
    throw std::invalid_argument("discretize: epsilon must be positive");

  DiscretizedDesign out;
  out.tau = std::max(2.0 * lipschitz_l * d1 / epsilon(0),
                     16.0 * b_tilde * lipschitz_l * d1 /
                         (epsilon(1) * epsilon(1)));
  out.segments_per_dim = static_cast<int>(std::ceil(out.tau));
  out.epsilon_half = epsilon / 2.0;
  const int points_per_dim = out.segments_per_dim + 1;
  double total = 1.0;
  for (int d = 0; d < d1; ++d) total *= points_per_dim;
  if (total > static_cast<double>(max_points))
    throw ResourceError(
        "discretize: grid needs " + std::to_string(static_cast<long long>(total)) +
        " points, above the cap of " + std::to_string(max_points));
  out.grid = product_grid(points_per_dim, d1, 0.0, 1.0);
  return out;
}

namespace {

// Everything a step loop needs, rebuilt once per iteration.
struct LoopContext {
  const ScenarioConfig& config;
  const Benchmark& benchmark;
  const GroundTruth* truth;
  const StepObserver& observer;

  GpPosterior model;
  Eigen::MatrixXd joint_grid;
  int n_design;
  int n_env;
  BetaSchedule schedule;
  RngStream env_rng;
  RngStream noise_rng;
  RngStream baseline_rng;
  std::vector<int> observed_w;
  bool additive;

  PointwiseBounds pointwise;
  RiskBoundTable table;

  LoopContext(const ScenarioConfig& config, const Benchmark& benchmark,
              const GroundTruth* truth, std::uint64_t seed,
              const StepObserver& observer)
      : config(config),
        benchmark(benchmark),
        truth(truth),
        observer(observer),
        model(config.kernel ? *config.kernel : benchmark.default_kernel,
              config.noise_variance),
        env_rng(derive_seed(seed, 0)),
        noise_rng(derive_seed(seed, 1)),
        baseline_rng(derive_seed(seed, 2)) {
    if (config.input_mode == InputMode::kNoisyInput &&
        !benchmark.additive_input)
      throw std::invalid_argument(
          "run_scenario: noisy-input mode needs a benchmark whose "
          "environment variable perturbs the design point additively");
    additive = benchmark.additive_input;
    joint_grid = build_joint_grid(benchmark.design_grid, benchmark.env_grid,
                                  additive);
    n_design = static_cast<int>(benchmark.design_grid.size());
    n_env = static_cast<int>(benchmark.env_grid.size());
    schedule.rkhs_bound = config.rkhs_bound;
    schedule.delta = config.delta;
    schedule.delta_divisor = 3;
  }

  EnvDistribution bound_distribution() const {
    if (config.environment_mode == EnvironmentMode::kSampledEmpiricalP) {
      if (observed_w.empty()) {
        EnvDistribution uniform;
        uniform.support = benchmark.env_grid;
        uniform.weights = Eigen::VectorXd::Constant(n_env, 1.0 / n_env);
        return uniform;
      }
      return empirical_env(observed_w, benchmark.env_grid);
    }
    return benchmark.env_dist;
  }

  // Step-t bounds (model holds t-1 observations) plus the risk table.
  void refresh_bounds() {
    const double beta_t = beta(model, schedule);
    pointwise = pointwise_bounds(model, beta_t, joint_grid, n_design, n_env);
    const EnvDistribution p = bound_distribution();
    if (additive)
      table = noisy_input_bounds(pointwise, p, model.size());
    else
      table = make_risk_table(pointwise, p, model.size());
    if (config.scenario == Scenario::kMultiTask)
      scalarized_bounds(table, config.alpha);
    if (observer) observer(StepView{model.size(), pointwise, table});
  }

  int pick_environment(int x_index) {
    if (config.environment_mode == EnvironmentMode::kSimulatorSelected) {
      if (additive) {
        Eigen::VectorXd weighted =
            pointwise.stddev.row(x_index).transpose().cwiseProduct(
                benchmark.env_dist.weights);
        return argmax_first(weighted);
      }
      return argmax_first(pointwise.stddev.row(x_index).transpose());
    }
    return env_sample(benchmark.env_dist, env_rng);
  }

  // Observes (x, w), updates the model, and refits hyperparameters on the
  // configured interval.
  double observe(int x_index, int w_index, int step) {
    const Eigen::VectorXd& x = benchmark.design_grid[x_index];
    const Eigen::VectorXd& w = benchmark.env_grid[w_index];
    const double y = benchmark.oracle(x, w) +
                     std::sqrt(config.noise_variance) * noise_rng.normal();
    Observation obs;
    if (additive) {
      obs.x = x + w;
      obs.w = Eigen::VectorXd();
    } else {
      obs.x = x;
      obs.w = w;
    }
    obs.y = y;
    obs.step = step;
    model.add(obs);
    observed_w.push_back(w_index);
    if (config.refit_interval > 0 && model.size() >= 2 &&
        model.size() % config.refit_interval == 0) {
      const FitResult fit = fit_hyperparameters(
          model.data(), model.kernel(), config.noise_variance);
      if (!fit.warning) model.set_kernel(fit.spec);
    }
    return y;
  }
};

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Trace run_multi_task(LoopContext& ctx) {
  const ScenarioConfig& config = ctx.config;
  Trace trace;
  std::vector<int> selected;
  std::vector<double> per_step_lower;

  const auto lower_for_method = [&](const RiskBoundTable& table) {
    switch (config.method) {
      case Method::kBqoUcb:
        return table.f1_lower;
      case Method::kBoVo:
        return table.f2_lower;
      default:
        return table.g_lower;
    }
  };

  for (int t = 1; t <= config.budget; ++t) {
    const double started = now_ms();
    ctx.refresh_bounds();
    int x_index;
    switch (config.method) {
      case Method::kRandomSampling:
        x_index = rs_select(ctx.n_design, ctx.baseline_rng);
        break;
      case Method::kUncertaintySampling:
        x_index = us_select(ctx.pointwise, ctx.bound_distribution());
        break;
      case Method::kBqoUcb:
      case Method::kAdaBqoUcb:
        x_index = bqoucb_select(ctx.table);
        break;
      case Method::kBoVo:
      case Method::kAdaBoVo:
        x_index = bovo_select(ctx.table);
        break;
      default:
        x_index = mt_select(ctx.table);
    }
    const Eigen::VectorXd current_lower = lower_for_method(ctx.table);
    selected.push_back(x_index);
    per_step_lower.push_back(current_lower(x_index));
    const int recommendation =
        mt_recommend(selected, per_step_lower, config.recommendation_rule,
                     current_lower);
    const int w_index = ctx.pick_environment(x_index);
    const double y = ctx.observe(x_index, w_index, t);

    TraceRecord record;
    record.step = t;
    record.x_index = x_index;
    record.w_index = w_index;
    record.y = y;
    record.recommendation = recommendation;
    if (ctx.truth) record.metric = regret(*ctx.truth, recommendation);
    record.wall_ms = now_ms() - started;
    trace.records.push_back(record);
  }
  if (!trace.records.empty())
    trace.final_recommendation = trace.records.back().recommendation;
  return trace;
}

Trace run_multi_objective(LoopContext& ctx) {
  const ScenarioConfig& config = ctx.config;
  Trace trace;
  ctx.refresh_bounds();
  ParetoState state = estimate_pareto(ctx.table, config.epsilon);

  int t = 0;
  while (t < config.budget && !mo_terminated(state)) {
    const double started = now_ms();
    int x_index;
    switch (config.method) {
      case Method::kRandomSampling:
        x_index = rs_select(ctx.n_design, ctx.baseline_rng);
        break;
      case Method::kUncertaintySampling:
        x_index = us_select(ctx.pointwise, ctx.bound_distribution());
        break;
      default:
        x_index = mo_select(state, ctx.table);
    }
    const int w_index = ctx.pick_environment(x_index);
    const double y = ctx.observe(x_index, w_index, ++t);
    ctx.refresh_bounds();
    state = estimate_pareto(ctx.table, config.epsilon);

    TraceRecord record;
    record.step = t;
    record.x_index = x_index;
    record.w_index = w_index;
    record.y = y;
    record.pareto_size = static_cast<int>(state.pareto_hat.size());
    record.potential_size = static_cast<int>(state.potential.size());
    record.uncertain_size = static_cast<int>(state.uncertain.size());
    record.terminated = mo_terminated(state);
    if (ctx.truth)
      record.metric = hypervolume_gap(*ctx.truth, state.pareto_hat,
                                      ctx.truth->reference);
    record.wall_ms = now_ms() - started;
    trace.records.push_back(record);
  }
  trace.terminated = mo_terminated(state);
  trace.final_pareto = state.pareto_hat;
  return trace;
}

Trace run_constrained(LoopContext& ctx) {
  const ScenarioConfig& config = ctx.config;
  Trace trace;
  ctx.refresh_bounds();
  ConstrainedState state =
      constrained_step(ctx.table, config.h, config.epsilon);

  int t = 0;
  while (t < config.budget && !state.terminated) {
    const double started = now_ms();
    int x_index = state.m_latent.front();
    for (const int i : state.m_latent)
      if (rect_diameter(ctx.table, i) > rect_diameter(ctx.table, x_index))
        x_index = i;
    const int w_index = ctx.pick_environment(x_index);
    const double y = ctx.observe(x_index, w_index, ++t);
    ctx.refresh_bounds();
    state = constrained_step(ctx.table, config.h, config.epsilon);

    TraceRecord record;
    record.step = t;
    record.x_index = x_index;
    record.w_index = w_index;
    record.y = y;
    record.recommendation = state.recommendation.value_or(-1);
    record.terminated = state.terminated;
    if (ctx.truth && state.recommendation && ctx.truth->constrained_optimum)
      record.metric = ctx.truth->f1(*ctx.truth->constrained_optimum) -
                      ctx.truth->f1(*state.recommendation);
    record.wall_ms = now_ms() - started;
    trace.records.push_back(record);
  }
  trace.terminated = state.terminated;
  trace.final_recommendation = state.recommendation.value_or(-1);
  return trace;
}

}  // namespace

Trace run_scenario(const ScenarioConfig& config, const Benchmark& benchmark,
                   const GroundTruth* truth, std::uint64_t seed,
                   const StepObserver& observer) {
  if (benchmark.design_grid.empty() || benchmark.env_grid.empty())
    throw std::invalid_argument("run_scenario: empty grids");
  if (config.budget < 0)
    throw std::invalid_argument("run_scenario: negative budget");
  LoopContext ctx(config, benchmark, truth, seed, observer);
  switch (config.scenario) {
    case Scenario::kMultiTask:
      return run_multi_task(ctx);
    case Scenario::kMultiObjective:
      return run_multi_objective(ctx);
    case Scenario::kConstrained:
      return run_constrained(ctx);
  }
  throw std::logic_error("run_scenario: unreachable");
}

}  // namespace mvabo
