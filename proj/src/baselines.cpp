#include "mvabo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvabo {
namespace {

bool weakly_dominates(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  // b is weakly dominated by a
  return b(0) <= a(0) && b(1) <= a(1);
}

}  // namespace

GroundTruth ground_truth(const Benchmark& benchmark, double alpha, double h,
                         std::optional<Eigen::Vector2d> reference) {
  if (benchmark.design_grid.empty() || benchmark.env_grid.empty())
    throw std::invalid_argument("ground_truth: empty grids");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("ground_truth: alpha must lie in [0, 1]");
  benchmark.env_dist.validate();

  const int nx = static_cast<int>(benchmark.design_grid.size());
  const int nw = static_cast<int>(benchmark.env_grid.size());
  const Eigen::VectorXd& p = benchmark.env_dist.weights;

  GroundTruth truth;
  truth.alpha = alpha;
  truth.h = h;
  truth.f1.resize(nx);
  truth.f2.resize(nx);
  for (int i = 0; i < nx; ++i) {
    Eigen::VectorXd row(nw);
    for (int j = 0; j < nw; ++j) {
      row(j) =
          benchmark.oracle(benchmark.design_grid[i], benchmark.env_grid[j]);
      if (!std::isfinite(row(j)))
        throw std::invalid_argument(
            "ground_truth: oracle is not finite on the grid");
    }
    const double mean = row.dot(p);
    double var = 0.0;
    for (int j = 0; j < nw; ++j) {
      const double d = row(j) - mean;
      var += d * d * p(j);
    }
    truth.f1(i) = mean;
    truth.f2(i) = -std::sqrt(std::max(0.0, var));
  }
  truth.g = alpha * truth.f1 + (1.0 - alpha) * truth.f2;

  truth.x_star = 0;
  for (int i = 1; i < nx; ++i)
    if (truth.g(i) > truth.g(truth.x_star)) truth.x_star = i;

  // Pareto set: x survives unless some point with a differing objective
  // vector weakly dominates it.
  for (int i = 0; i < nx; ++i) {
    const Eigen::Vector2d fi = truth.objective(i);
    bool dominated = false;
    for (int j = 0; j < nx && !dominated; ++j) {
      const Eigen::Vector2d fj = truth.objective(j);
      if (fi == fj) continue;
      if (weakly_dominates(fj, fi)) dominated = true;
    }
    if (!dominated) truth.pareto_set.push_back(i);
  }
  for (const int i : truth.pareto_set) {
    const Eigen::Vector2d fi = truth.objective(i);
    const bool seen =
        std::any_of(truth.pareto_front.begin(), truth.pareto_front.end(),
                    [&fi](const Eigen::Vector2d& v) { return v == fi; });
    if (!seen) truth.pareto_front.push_back(fi);
  }

  double best_f1 = 0.0;
  for (int i = 0; i < nx; ++i) {
    if (truth.f2(i) < h) continue;
    if (!truth.constrained_optimum || truth.f1(i) > best_f1) {
      truth.constrained_optimum = i;
      best_f1 = truth.f1(i);
    }
  }

  if (reference) {
    truth.reference = *reference;
  } else {
    truth.reference = {truth.f1.minCoeff() - 1e-6, truth.f2.minCoeff() - 1e-6};
  }
  truth.hypervolume = hypervolume(truth.pareto_front, truth.reference);
  return truth;
}

int rs_select(int n_design, RngStream& rng) {
  if (n_design <= 0) throw std::invalid_argument("rs_select: empty design set");
  return rng.uniform_index(n_design);
}

int us_select(const PointwiseBounds& pointwise, const EnvDistribution& p) {
  p.validate();
  if (pointwise.stddev.cols() != p.weights.size())
    throw std::invalid_argument("us_select: grid/weight mismatch");
  const Eigen::VectorXd averaged = pointwise.stddev * p.weights;
  int best = 0;
  for (int i = 1; i < averaged.size(); ++i)
    if (averaged(i) > averaged(best)) best = i;
  return best;
}

int bqoucb_select(const RiskBoundTable& table) {
  int best = 0;
  for (int i = 1; i < table.size(); ++i)
    if (table.f1_upper(i) > table.f1_upper(best)) best = i;
  return best;
}

int bovo_select(const RiskBoundTable& table) {
  int best = 0;
  for (int i = 1; i < table.size(); ++i)
    if (table.f2_upper(i) > table.f2_upper(best)) best = i;
  return best;
}

double regret(const GroundTruth& truth, int x_hat) {
  return truth.g(truth.x_star) - truth.g(x_hat);
}

double hypervolume(const std::vector<Eigen::Vector2d>& points,
                   const Eigen::Vector2d& reference) {
  std::vector<Eigen::Vector2d> kept;
  for (const auto& p : points)
    if (p(0) > reference(0) && p(1) > reference(1)) kept.push_back(p);
  if (kept.empty()) return 0.0;
  std::sort(kept.begin(), kept.end(),
            [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
              return a(0) != b(0) ? a(0) > b(0) : a(1) > b(1);
            });
  double area = 0.0;
  double covered = reference(1);
  for (const auto& p : kept) {
    if (p(1) > covered) {
      area += (p(0) - reference(0)) * (p(1) - covered);
      covered = p(1);
    }
  }
  return area;
}

double hypervolume_gap(const GroundTruth& truth,
                       const std::vector<int>& estimated_set,
                       const Eigen::Vector2d& reference) {
  for (const auto& v : truth.pareto_front)
    if (!(v(0) > reference(0) && v(1) > reference(1)))
      throw std::invalid_argument(
          "hypervolume_gap: reference is not dominated by the true front");
  std::vector<Eigen::Vector2d> estimated;
  estimated.reserve(estimated_set.size());
  for (const int x : estimated_set) estimated.push_back(truth.objective(x));
  const double hv_true = hypervolume(truth.pareto_front, reference);
  const double hv_estimated = hypervolume(estimated, reference);
  return hv_true - hv_estimated;
}

EpsilonParetoReport epsilon_pareto_check(const GroundTruth& truth,
                                         const std::vector<int>& estimated_set,
                                         const Eigen::Vector2d& epsilon) {
  EpsilonParetoReport report;
  const int nx = static_cast<int>(truth.f1.size());

  // Condition 1: each kept vector sits in the epsilon band below the front.
  for (const int x : estimated_set) {
    const Eigen::Vector2d fx = truth.objective(x);
    for (int other = 0; other < nx; ++other) {
      const Eigen::Vector2d fo = truth.objective(other);
      if (fx(0) + epsilon(0) < fo(0) && fx(1) + epsilon(1) < fo(1)) {
        report.ok = false;
        report.violated_condition = 1;
        report.x = x;
        report.other = other;
        report.message = "estimated point is epsilon-dominated by grid point";
        return report;
      }
    }
    const bool below_front = std::any_of(
        truth.pareto_front.begin(), truth.pareto_front.end(),
        [&fx](const Eigen::Vector2d& v) { return weakly_dominates(v, fx); });
    if (!below_front) {
      report.ok = false;
      report.violated_condition = 1;
      report.x = x;
      report.message = "estimated vector lies above the true front";
      return report;
    }
  }

  // Condition 2: every true Pareto point is epsilon-covered.
  for (const int x : truth.pareto_set) {
    const Eigen::Vector2d fx = truth.objective(x);
    const bool covered = std::any_of(
        estimated_set.begin(), estimated_set.end(), [&](int kept) {
          const Eigen::Vector2d fk = truth.objective(kept);
          return fx(0) <= fk(0) + epsilon(0) && fx(1) <= fk(1) + epsilon(1);
        });
    if (!covered) {
      report.ok = false;
      report.violated_condition = 2;
      report.x = x;
      report.message = "true Pareto point is not epsilon-covered";
      return report;
    }
  }
  return report;
}

}  // namespace mvabo
