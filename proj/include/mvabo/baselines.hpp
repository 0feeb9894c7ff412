#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvabo/benchmarks.hpp"
#include "mvabo/random.hpp"
#include "mvabo/risk_bounds.hpp"

namespace mvabo {

/// Exhaustively computed truth for a benchmark: exact objectives per design
/// point, the scalarized optimum, the Pareto set and its nondominated
/// vectors, the constrained optimum, and the front hypervolume.
struct GroundTruth {
  Eigen::VectorXd f1, f2, g;
  double alpha = 0.0;
  double h = 0.0;
  int x_star = 0;
  std::vector<int> pareto_set;
  std::vector<Eigen::Vector2d> pareto_front;  // unique nondominated vectors
  std::optional<int> constrained_optimum;
  Eigen::Vector2d reference;
  double hypervolume = 0.0;

  Eigen::Vector2d objective(int x) const { return {f1(x), f2(x)}; }
};

/// Brute-force evaluation of the oracle over the full grid; no sampling.
/// With no reference point given, the componentwise minimum of (F1, F2)
/// minus 1e-6 is used so every point counts and gaps stay nonnegative.
GroundTruth ground_truth(
    const Benchmark& benchmark, double alpha, double h,
    std::optional<Eigen::Vector2d> reference = std::nullopt);

/// Uniformly random design index.
int rs_select(int n_design, RngStream& rng);

/// argmax_x of the weighted average posterior stddev over the environment.
int us_select(const PointwiseBounds& pointwise, const EnvDistribution& p);

/// argmax of the F1 upper bound (the mean-only baseline).
int bqoucb_select(const RiskBoundTable& table);

/// argmax of the F2 upper bound (the variance-only variant).
int bovo_select(const RiskBoundTable& table);

/// G(x*) - G(x_hat), nonnegative by construction.
double regret(const GroundTruth& truth, int x_hat);

/// Area of the union of boxes [reference, point] for 2-D maximization
/// fronts, by sort-and-sweep. Points not strictly above the reference in
/// both coordinates contribute nothing; the empty set gives 0.
double hypervolume(const std::vector<Eigen::Vector2d>& points,
                   const Eigen::Vector2d& reference);

/// HV of the true front minus HV of the true objective vectors of the
/// estimated set, with a shared reference point. Throws when the reference
/// is not dominated by the whole true front.
double hypervolume_gap(const GroundTruth& truth,
                       const std::vector<int>& estimated_set,
                       const Eigen::Vector2d& reference);

struct EpsilonParetoReport {
  bool ok = true;
  int violated_condition = 0;  // 1 or 2 when ok is false
  int x = -1;                  // offending design index
  int other = -1;              // witness index when applicable
  std::string message;
};

/// Checks that `estimated_set` is an epsilon-accurate Pareto set against the
/// exact objectives: (1) every kept point is at most epsilon below the true
/// front and not epsilon-dominated by any grid point, and (2) every true
/// Pareto point is epsilon-covered by some kept point.
EpsilonParetoReport epsilon_pareto_check(const GroundTruth& truth,
                                         const std::vector<int>& estimated_set,
                                         const Eigen::Vector2d& epsilon);

}  // namespace mvabo
