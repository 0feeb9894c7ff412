#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mvabo/kernel.hpp"

namespace mvabo {

/// One evaluation record: design point x, environment point w, observed
/// value y, and the step at which it was collected. The GP input is the
/// concatenation (x, w); runs that fold environment noise into the design
/// point store the already-combined point in x with an empty w.
struct Observation {
  Eigen::VectorXd x;
  Eigen::VectorXd w;
  double y = 0.0;
  int step = 0;

  Eigen::VectorXd joint() const {
    Eigen::VectorXd z(x.size() + w.size());
    z << x, w;
    return z;
  }
};

/// Thrown when the kernel-matrix factorization fails even after jitter;
/// carries basic conditioning diagnostics.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Exact GP regression with a cached Cholesky factorization of
/// (K_t + noise_variance * I). Refit from scratch on every update; budgets
/// of a few hundred points keep the cubic cost irrelevant.
///
/// Instances are safe for concurrent read-only queries; updates require
/// exclusive ownership (or use updated() to obtain a fresh value).
class GpPosterior {
 public:
  GpPosterior(KernelSpec kernel, double noise_variance);

  const KernelSpec& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }
  int size() const { return static_cast<int>(data_.size()); }
  const std::vector<Observation>& data() const { return data_; }

  /// Extends the dataset by one row and refreshes the factorization.
  /// Throws std::invalid_argument for non-finite y or mismatched dimensions.
  void add(const Observation& obs);

  /// Value-returning form of add().
  GpPosterior updated(const Observation& obs) const;

  /// Replaces the kernel hyperparameters and refits on the same data.
  void set_kernel(const KernelSpec& kernel);

  /// Posterior mean and variance at one joint point. Variance is clamped
  /// at zero against round-off.
  std::pair<double, double> query(const Eigen::VectorXd& z) const;

  /// Batched queries; rows of Z are joint points.
  void query_batch(const Eigen::MatrixXd& z, Eigen::VectorXd& mean,
                   Eigen::VectorXd& variance) const;

  /// ln det(I_t + noise_variance^-1 K_t); zero for the empty dataset.
  double log_det_term() const { return log_det_term_; }

 private:
  void refit();

  KernelSpec kernel_;
  double noise_variance_;
  std::vector<Observation> data_;
  Eigen::MatrixXd train_;  // t x d joint inputs, kept in sync with data_
  Eigen::VectorXd y_;
  Eigen::MatrixXd chol_lower_;  // L with L L^T = K + noise_variance I
  Eigen::VectorXd alpha_;       // (K + noise_variance I)^-1 y
  double log_det_term_ = 0.0;
};

/// Confidence-width schedule of the pointwise bound
/// beta_t = (sqrt(ln det(I + sigma^-2 K) + 2 ln(delta_divisor / delta)) + B)^2.
/// delta_divisor is 1 for the standalone bound and 3 in the scenario drivers.
struct BetaSchedule {
  double rkhs_bound = 2.0;
  double delta = 0.1;
  int delta_divisor = 3;
};

double beta(const GpPosterior& model, const BetaSchedule& schedule);

/// Per-cell posterior statistics and confidence bounds over a design x
/// environment grid. Row i / column j corresponds to design point i and
/// environment point j of the joint grid the table was built from.
struct PointwiseBounds {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd stddev;
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
  double beta = 0.0;
};

/// Joint grid as a (|X|*|W|) x d matrix, row-major in the environment index
/// (row x_i, w_j sits at i*|W|+j). When `additive` is set the joint point is
/// x + w (noisy-input mode) rather than the concatenation.
Eigen::MatrixXd build_joint_grid(const std::vector<Eigen::VectorXd>& design,
                                 const std::vector<Eigen::VectorXd>& env,
                                 bool additive = false);

/// lower = mean - sqrt(beta) stddev, upper = mean + sqrt(beta) stddev,
/// evaluated with the model's current data (the step-t bounds when the
/// model holds t-1 observations).
PointwiseBounds pointwise_bounds(const GpPosterior& model, double beta_t,
                                 const Eigen::MatrixXd& joint_grid,
                                 int n_design, int n_env);

struct FitResult {
  KernelSpec spec;
  bool warning = false;  // optimizer failed; spec falls back to the init
  double log_marginal_likelihood = 0.0;
};

/// Maximizes the exact log marginal likelihood over log-hyperparameters
/// with a 4-start Nelder-Mead search. Lengthscales are confined to
/// [1e-2, 1e1] and the signal variance to [1e-2, 1e2]. Requires at least
/// two observations.
FitResult fit_hyperparameters(const std::vector<Observation>& data,
                              const KernelSpec& init, double noise_variance);

/// Log marginal likelihood of the data under the given hyperparameters.
double log_marginal_likelihood(const std::vector<Observation>& data,
                               const KernelSpec& spec, double noise_variance);

}  // namespace mvabo
