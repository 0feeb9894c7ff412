#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mvabo/baselines.hpp"
#include "mvabo/benchmarks.hpp"
#include "mvabo/gp.hpp"
#include "mvabo/random.hpp"
#include "mvabo/risk_bounds.hpp"

namespace mvabo {

enum class Scenario { kMultiTask, kMultiObjective, kConstrained };

enum class Method {
  kMtMvaBo,
  kMoMvaBo,
  kConstrainedMvaBo,
  kRandomSampling,
  kUncertaintySampling,
  kBqoUcb,
  kBoVo,
  kAdaBqoUcb,
  kAdaBoVo,
};

enum class EnvironmentMode {
  kSampledKnownP,
  kSampledEmpiricalP,
  kSimulatorSelected,
};

enum class InputMode { kJoint, kNoisyInput };

enum class RecommendationRule { kPerStepBounds, kCurrentStepBounds };

/// Estimated Pareto set, potential Pareto set, and uncertainty set of the
/// multi-objective loop, with the termination flag M = U = empty.
struct ParetoState {
  int step = 0;
  std::vector<int> pareto_hat;
  std::vector<int> potential;
  std::vector<int> uncertain;
  Eigen::Vector2d epsilon{0.0, 0.0};
  bool terminated = false;
};

/// State of the constrained loop: the candidate feasible set (by the F2
/// upper bound), the certified feasible set (by the F2 lower bound), the
/// objective candidates, and their intersection.
struct ConstrainedState {
  int step = 0;
  std::vector<int> m_cons;
  std::vector<int> s_feasible;
  std::vector<int> m_obj;
  std::vector<int> m_latent;
  double threshold = 0.0;
  Eigen::Vector2d epsilon{0.0, 0.0};
  bool terminated = false;
  std::optional<int> recommendation;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::kMultiTask;
  Method method = Method::kMtMvaBo;
  double alpha = 0.5;
  Eigen::Vector2d epsilon{0.1, 0.1};
  double h = -0.5;
  EnvironmentMode environment_mode = EnvironmentMode::kSampledKnownP;
  InputMode input_mode = InputMode::kJoint;
  int budget = 100;
  RecommendationRule recommendation_rule = RecommendationRule::kPerStepBounds;
  double delta = 0.1;
  double rkhs_bound = 2.0;
  double noise_variance = 1e-4;
  int refit_interval = 0;  // 0 disables hyperparameter refits
  std::optional<KernelSpec> kernel;  // defaults to the benchmark's kernel
};

/// One logged step of a run. Fields that do not apply to the method's
/// scenario stay at their sentinel values (-1 / NaN). wall_ms is runtime
/// bookkeeping only and is never serialized.
struct TraceRecord {
  int step = 0;
  int x_index = -1;
  int w_index = -1;
  double y = 0.0;
  int recommendation = -1;
  double metric = std::numeric_limits<double>::quiet_NaN();
  int pareto_size = -1;
  int potential_size = -1;
  int uncertain_size = -1;
  bool terminated = false;
  double wall_ms = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
  bool terminated = false;
  int final_recommendation = -1;
  std::vector<int> final_pareto;
};

class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// argmax of the G upper bound; ties break to the lowest index.
int mt_select(const RiskBoundTable& table);

/// Estimated solution after >= 1 steps. The per-step rule maximizes each
/// step's own lower bound at its selected point; the current-step rule
/// re-evaluates all past selections under the current lower bounds. Ties
/// break to the earliest step.
int mt_recommend(const std::vector<int>& selected,
                 const std::vector<double>& per_step_lower,
                 RecommendationRule rule, const Eigen::VectorXd& current_lower);

ParetoState estimate_pareto(const RiskBoundTable& table,
                            const Eigen::Vector2d& epsilon);

/// argmax of the rectangle diameter over M_t united with the estimated
/// Pareto set. Throws std::logic_error when called on a terminated state.
int mo_select(const ParetoState& state, const RiskBoundTable& table);

inline bool mo_terminated(const ParetoState& state) {
  return state.potential.empty() && state.uncertain.empty();
}

/// One state evaluation of the constrained loop at threshold h < 0;
/// terminated when the largest diameter over the latent set is at most
/// min(epsilon). The recommendation maximizes the F1 lower bound over the
/// certified feasible set when that set is nonempty.
ConstrainedState constrained_step(const RiskBoundTable& table, double h,
                                  const Eigen::Vector2d& epsilon);

/// Categorical draw from the environment distribution; returns the support
/// index. Reproducible under a fixed stream.
int env_sample(const EnvDistribution& p, RngStream& rng);

/// Relative frequencies of the observed support indices over the grid.
EnvDistribution empirical_env(const std::vector<int>& observed_indices,
                              const std::vector<Eigen::VectorXd>& env_grid);

/// argmax over the environment grid of the posterior stddev at (x, w);
/// additive mode evaluates at x + w.
int simulator_env_select(const GpPosterior& model, const Eigen::VectorXd& x,
                         const std::vector<Eigen::VectorXd>& env_grid,
                         bool additive = false);

/// Density-weighted variant for the noisy-input setting:
/// argmax of stddev(x + xi) * p(xi).
int noisy_simulator_select(const GpPosterior& model, const Eigen::VectorXd& x,
                           const std::vector<Eigen::VectorXd>& delta_grid,
                           const EnvDistribution& noise_dist);

struct DiscretizedDesign {
  std::vector<Eigen::VectorXd> grid;  // over [0, 1]^d1
  Eigen::Vector2d epsilon_half;       // tolerance to use in M_t and U_t
  double tau = 0.0;
  int segments_per_dim = 0;
};

/// Grid resolution for continuous design spaces:
/// tau = max(2 L d1 / eps1, 16 Btilde L d1 / eps2^2), with ceil(tau)
/// segments per dimension. Throws ResourceError when the grid would exceed
/// max_points.
DiscretizedDesign discretize_design_space(int d1,
                                          const Eigen::Vector2d& epsilon,
                                          double lipschitz_l, double b_tilde,
                                          std::int64_t max_points = 1000000);

/// Per-step view handed to an observer: the bounds the loop is about to act
/// on (or just produced after an update).
struct StepView {
  int observations = 0;  // dataset size behind these bounds
  const PointwiseBounds& pointwise;
  const RiskBoundTable& table;
};
using StepObserver = std::function<void(const StepView&)>;

/// Runs the configured decision loop on the benchmark until budget or
/// termination. Randomness comes from streams derived from `seed` by fixed
/// offsets (environment, observation noise, baseline); identical inputs
/// produce identical traces. `truth` enables the per-step metric (regret or
/// hypervolume gap) and may be null.
Trace run_scenario(const ScenarioConfig& config, const Benchmark& benchmark,
                   const GroundTruth* truth, std::uint64_t seed,
                   const StepObserver& observer = {});

}  // namespace mvabo
