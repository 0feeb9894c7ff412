#include "mvabo/risk_bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace mvabo {
namespace {

void check_shapes(const PointwiseBounds& pointwise, const EnvDistribution& p) {
  p.validate();
  if (pointwise.lower.cols() != p.weights.size())
    throw std::invalid_argument(
        "risk bounds: pointwise grid does not match environment support");
  if (pointwise.lower.rows() != pointwise.upper.rows() ||
      pointwise.lower.cols() != pointwise.upper.cols())
    throw std::invalid_argument("risk bounds: ragged pointwise table");
}

}  // namespace

void EnvDistribution::validate() const {
  if (support.empty())
    throw std::invalid_argument("EnvDistribution: empty support");
  if (static_cast<long>(support.size()) != weights.size())
    throw std::invalid_argument(
        "EnvDistribution: weight count does not match support");
  double total = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    if (weights(i) < 0.0)
      throw std::invalid_argument("EnvDistribution: negative weight");
    total += weights(i);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("EnvDistribution: weights must sum to 1");
}

void mean_bounds(const PointwiseBounds& pointwise, const EnvDistribution& p,
                 Eigen::VectorXd& lower, Eigen::VectorXd& upper) {
  check_shapes(pointwise, p);
  lower = pointwise.lower * p.weights;
  upper = pointwise.upper * p.weights;
}

void variance_bounds(const PointwiseBounds& pointwise, const EnvDistribution& p,
                     Eigen::VectorXd& lower, Eigen::VectorXd& upper) {
  check_shapes(pointwise, p);
  const int n_design = static_cast<int>(pointwise.lower.rows());
  const int n_env = static_cast<int>(pointwise.lower.cols());
  lower.resize(n_design);
  upper.resize(n_design);
  for (int i = 0; i < n_design; ++i) {
    const double mean_upper = pointwise.upper.row(i).dot(p.weights);
    const double mean_lower = pointwise.lower.row(i).dot(p.weights);
    double sq_lo = 0.0;
    double sq_hi = 0.0;
    for (int j = 0; j < n_env; ++j) {
      const double lt = pointwise.lower(i, j) - mean_upper;
      const double ut = pointwise.upper(i, j) - mean_lower;
      const double lt2 = lt * lt;
      const double ut2 = ut * ut;
      const double env_lo = (lt <= 0.0 && 0.0 <= ut) ? 0.0 : std::min(lt2, ut2);
      const double env_hi = std::max(lt2, ut2);
      sq_lo += env_lo * p.weights(j);
      sq_hi += env_hi * p.weights(j);
    }
    lower(i) = -std::sqrt(sq_hi);
    upper(i) = -std::sqrt(sq_lo);
  }
}

RiskBoundTable make_risk_table(const PointwiseBounds& pointwise,
                               const EnvDistribution& p, int step) {
  RiskBoundTable table;
  table.step = step;
  mean_bounds(pointwise, p, table.f1_lower, table.f1_upper);
  variance_bounds(pointwise, p, table.f2_lower, table.f2_upper);
  return table;
}

void scalarized_bounds(RiskBoundTable& table, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("scalarized_bounds: alpha must lie in [0, 1]");
  if (table.f1_lower.size() == 0 || table.f2_lower.size() == 0)
    throw std::invalid_argument("scalarized_bounds: F1/F2 intervals missing");
  table.alpha = alpha;
  table.has_g = true;
  table.g_lower = alpha * table.f1_lower + (1.0 - alpha) * table.f2_lower;
  table.g_upper = alpha * table.f1_upper + (1.0 - alpha) * table.f2_upper;
}

double rect_diameter(const RiskBoundTable& table, int x) {
  const double w1 = table.f1_upper(x) - table.f1_lower(x);
  const double w2 = table.f2_upper(x) - table.f2_lower(x);
  return std::hypot(w1, w2);
}

RiskBoundTable noisy_input_bounds(const PointwiseBounds& pointwise_over_d,
                                  const EnvDistribution& noise_dist,
                                  int step) {
  noise_dist.validate();
  if (pointwise_over_d.lower.cols() != noise_dist.weights.size())
    throw std::invalid_argument(
        "noisy_input_bounds: perturbation grid incomplete");
  const int n_design = static_cast<int>(pointwise_over_d.lower.rows());
  const int n_noise = static_cast<int>(pointwise_over_d.lower.cols());
  const Eigen::VectorXd& q = noise_dist.weights;

  RiskBoundTable table;
  table.step = step;
  table.f1_lower.resize(n_design);
  table.f1_upper.resize(n_design);
  table.f2_lower.resize(n_design);
  table.f2_upper.resize(n_design);
  for (int i = 0; i < n_design; ++i) {
    double f1_lo = 0.0, f1_hi = 0.0;
    for (int j = 0; j < n_noise; ++j) {
      f1_lo += pointwise_over_d.lower(i, j) * q(j);
      f1_hi += pointwise_over_d.upper(i, j) * q(j);
    }
    double sq_lo = 0.0, sq_hi = 0.0;
    for (int j = 0; j < n_noise; ++j) {
      const double lt = pointwise_over_d.lower(i, j) - f1_hi;
      const double ut = pointwise_over_d.upper(i, j) - f1_lo;
      const double lt2 = lt * lt;
      const double ut2 = ut * ut;
      sq_lo += ((lt <= 0.0 && 0.0 <= ut) ? 0.0 : std::min(lt2, ut2)) * q(j);
      sq_hi += std::max(lt2, ut2) * q(j);
    }
    table.f1_lower(i) = f1_lo;
    table.f1_upper(i) = f1_hi;
    table.f2_lower(i) = -std::sqrt(sq_hi);
    table.f2_upper(i) = -std::sqrt(sq_lo);
  }
  return table;
}

}  // namespace mvabo
