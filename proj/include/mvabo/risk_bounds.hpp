#pragma once

#include <vector>

#include <Eigen/Core>

#include "mvabo/gp.hpp"

namespace mvabo {

/// Finite environment distribution: ordered support points and nonnegative
/// weights summing to one.
struct EnvDistribution {
  std::vector<Eigen::VectorXd> support;
  Eigen::VectorXd weights;

  /// Throws std::invalid_argument when sizes mismatch, any weight is
  /// negative, or the weights do not sum to 1 within 1e-12.
  void validate() const;
};

/// Per-design-point confidence intervals on the mean objective F1, the
/// negative-standard-deviation objective F2, and optionally their
/// scalarization G. The optimistic vector at x is (f1_upper, f2_upper),
/// the pessimistic vector (f1_lower, f2_lower).
struct RiskBoundTable {
  int step = 0;
  Eigen::VectorXd f1_lower, f1_upper;
  Eigen::VectorXd f2_lower, f2_upper;
  bool has_g = false;
  double alpha = 0.0;
  Eigen::VectorXd g_lower, g_upper;

  int size() const { return static_cast<int>(f1_lower.size()); }
  Eigen::Vector2d optimistic(int x) const {
    return {f1_upper(x), f2_upper(x)};
  }
  Eigen::Vector2d pessimistic(int x) const {
    return {f1_lower(x), f2_lower(x)};
  }
};

/// F1 intervals: lower/upper rows of the pointwise table integrated against
/// the environment weights.
void mean_bounds(const PointwiseBounds& pointwise, const EnvDistribution& p,
                 Eigen::VectorXd& lower, Eigen::VectorXd& upper);

/// F2 intervals via the squared-envelope construction; guarantees
/// lower <= upper <= 0 for every design point.
void variance_bounds(const PointwiseBounds& pointwise, const EnvDistribution& p,
                     Eigen::VectorXd& lower, Eigen::VectorXd& upper);

/// Convenience: F1 and F2 intervals in one table.
RiskBoundTable make_risk_table(const PointwiseBounds& pointwise,
                               const EnvDistribution& p, int step = 0);

/// Fills g_lower/g_upper with alpha * F1 + (1 - alpha) * F2 interval ends.
void scalarized_bounds(RiskBoundTable& table, double alpha);

/// Euclidean diagonal of the F1 x F2 uncertainty rectangle at design x.
double rect_diameter(const RiskBoundTable& table, int x);

/// Noisy-input variant: the pointwise table indexes design x (rows) against
/// input perturbations xi (columns), with bounds evaluated at x + xi; the
/// interval calculus is the same with p over the perturbation grid.
RiskBoundTable noisy_input_bounds(const PointwiseBounds& pointwise_over_d,
                                  const EnvDistribution& noise_dist,
                                  int step = 0);

}  // namespace mvabo
