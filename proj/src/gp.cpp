#include "mvabo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace mvabo {
namespace {

constexpr double kJitter = 1e-10;

// Cholesky of K + noise I, retried once with jitter on the diagonal.
// Returns false when both attempts fail.
bool cholesky_with_jitter(Eigen::MatrixXd k, double noise_variance,
                          Eigen::MatrixXd& lower) {
  k.diagonal().array() += noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() == Eigen::Success) {
    lower = llt.matrixL();
    return true;
  }
  k.diagonal().array() += kJitter;
  llt.compute(k);
  if (llt.info() == Eigen::Success) {
    lower = llt.matrixL();
    return true;
  }
  return false;
}

}  // namespace

GpPosterior::GpPosterior(KernelSpec kernel, double noise_variance)
    : kernel_(std::move(kernel)), noise_variance_(noise_variance) {
  kernel_.validate();
  if (!(noise_variance_ > 0.0))
    throw std::invalid_argument("GpPosterior: noise variance must be > 0");
}

void GpPosterior::add(const Observation& obs) {
  if (!std::isfinite(obs.y))
    throw std::invalid_argument("GpPosterior::add: non-finite observation");
  const Eigen::VectorXd z = obs.joint();
  if (!data_.empty() && z.size() != train_.cols())
    throw std::invalid_argument("GpPosterior::add: dimension mismatch");
  data_.push_back(obs);
  const int t = size();
  Eigen::MatrixXd train(t, z.size());
  if (t > 1) train.topRows(t - 1) = train_;
  train.row(t - 1) = z.transpose();
  train_ = std::move(train);
  y_.conservativeResize(t);
  y_(t - 1) = obs.y;
  refit();
}

GpPosterior GpPosterior::updated(const Observation& obs) const {
  GpPosterior next = *this;
  next.add(obs);
  return next;
}

void GpPosterior::set_kernel(const KernelSpec& kernel) {
  kernel.validate();
  kernel_ = kernel;
  if (size() > 0) refit();
}

void GpPosterior::refit() {
  const int t = size();
  const Eigen::MatrixXd k = kernel_matrix(kernel_, train_, train_);
  if (!cholesky_with_jitter(k, noise_variance_, chol_lower_)) {
    throw NumericalError(
        "GpPosterior: Cholesky of (K + sigma^2 I) failed after jitter; t=" +
        std::to_string(t) +
        ", diag range [" + std::to_string(k.diagonal().minCoeff()) + ", " +
        std::to_string(k.diagonal().maxCoeff()) + "]");
  }
  alpha_ = chol_lower_.triangularView<Eigen::Lower>().solve(y_);
  chol_lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
  // ln det(I + sigma^-2 K) = ln det(K + sigma^2 I) - t ln sigma^2
  log_det_term_ = 2.0 * chol_lower_.diagonal().array().log().sum() -
                  t * std::log(noise_variance_);
}

std::pair<double, double> GpPosterior::query(const Eigen::VectorXd& z) const {
  Eigen::VectorXd mean, variance;
  query_batch(z.transpose(), mean, variance);
  return {mean(0), variance(0)};
}

void GpPosterior::query_batch(const Eigen::MatrixXd& z, Eigen::VectorXd& mean,
                              Eigen::VectorXd& variance) const {
  const int n = static_cast<int>(z.rows());
  if (size() == 0) {
    mean = Eigen::VectorXd::Zero(n);
    variance.resize(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd zi = z.row(i).transpose();
      variance(i) = kernel_eval(kernel_, zi, zi);
    }
    return;
  }
  const Eigen::MatrixXd kz = kernel_matrix(kernel_, train_, z);  // t x n
  mean = kz.transpose() * alpha_;
  const Eigen::MatrixXd v =
      chol_lower_.triangularView<Eigen::Lower>().solve(kz);
  variance.resize(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd zi = z.row(i).transpose();
    const double prior = kernel_eval(kernel_, zi, zi);
    variance(i) = std::max(0.0, prior - v.col(i).squaredNorm());
  }
}

double beta(const GpPosterior& model, const BetaSchedule& schedule) {
  if (!(schedule.delta > 0.0 && schedule.delta < 1.0))
    throw std::invalid_argument("beta: delta must lie in (0, 1)");
  if (schedule.delta_divisor <= 0)
    throw std::invalid_argument("beta: delta divisor must be positive");
  const double root =
      std::sqrt(model.log_det_term() +
                2.0 * std::log(schedule.delta_divisor / schedule.delta));
  const double s = root + schedule.rkhs_bound;
  return s * s;
}

Eigen::MatrixXd build_joint_grid(const std::vector<Eigen::VectorXd>& design,
                                 const std::vector<Eigen::VectorXd>& env,
                                 bool additive) {
  if (design.empty() || env.empty())
    throw std::invalid_argument("build_joint_grid: empty grid");
  const int d1 = static_cast<int>(design[0].size());
  const int d2 = static_cast<int>(env[0].size());
  const int d = additive ? d1 : d1 + d2;
  if (additive && d1 != d2)
    throw std::invalid_argument(
        "build_joint_grid: additive mode needs matching dimensions");
  Eigen::MatrixXd grid(design.size() * env.size(), d);
  int row = 0;
  for (const auto& x : design)
    for (const auto& w : env) {
      if (additive)
        grid.row(row) = (x + w).transpose();
      else
        grid.row(row) << x.transpose(), w.transpose();
      ++row;
    }
  return grid;
}

PointwiseBounds pointwise_bounds(const GpPosterior& model, double beta_t,
                                 const Eigen::MatrixXd& joint_grid,
                                 int n_design, int n_env) {
  if (beta_t < 0.0)
    throw std::invalid_argument("pointwise_bounds: beta must be >= 0");
  if (joint_grid.rows() != static_cast<long>(n_design) * n_env)
    throw std::invalid_argument("pointwise_bounds: grid shape mismatch");
  Eigen::VectorXd mean, variance;
  model.query_batch(joint_grid, mean, variance);
  PointwiseBounds out;
  out.beta = beta_t;
  const double root = std::sqrt(beta_t);
  out.mean = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                            Eigen::Dynamic, Eigen::RowMajor>>(
      mean.data(), n_design, n_env);
  const Eigen::VectorXd sd = variance.array().sqrt().matrix();
  out.stddev = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>(
      sd.data(), n_design, n_env);
  out.lower = out.mean - root * out.stddev;
  out.upper = out.mean + root * out.stddev;
  return out;
}

double log_marginal_likelihood(const std::vector<Observation>& data,
                               const KernelSpec& spec, double noise_variance) {
  const int t = static_cast<int>(data.size());
  Eigen::MatrixXd train(t, data[0].joint().size());
  Eigen::VectorXd y(t);
  for (int i = 0; i < t; ++i) {
    train.row(i) = data[i].joint().transpose();
    y(i) = data[i].y;
  }
  const Eigen::MatrixXd k = kernel_matrix(spec, train, train);
  Eigen::MatrixXd lower;
  if (!cholesky_with_jitter(k, noise_variance, lower))
    return -std::numeric_limits<double>::infinity();
  Eigen::VectorXd alpha = lower.triangularView<Eigen::Lower>().solve(y);
  const double quad = alpha.squaredNorm();
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  return -0.5 * quad - 0.5 * log_det -
         0.5 * t * std::log(2.0 * std::numbers::pi);
}

namespace {

constexpr double kLogLengthscaleMin = -4.605170185988091;  // ln 1e-2
constexpr double kLogLengthscaleMax = 2.302585092994046;   // ln 1e1
constexpr double kLogSignalMin = -4.605170185988091;       // ln 1e-2
constexpr double kLogSignalMax = 4.605170185988091;        // ln 1e2

Eigen::VectorXd clamp_params(Eigen::VectorXd p) {
  p(0) = std::clamp(p(0), kLogSignalMin, kLogSignalMax);
  for (int i = 1; i < p.size(); ++i)
    p(i) = std::clamp(p(i), kLogLengthscaleMin, kLogLengthscaleMax);
  return p;
}

KernelSpec params_to_spec(const KernelSpec& like, const Eigen::VectorXd& p) {
  KernelSpec spec = like;
  spec.signal_variance = std::exp(p(0));
  for (int i = 1; i < p.size(); ++i) spec.lengthscales(i - 1) = std::exp(p(i));
  return spec;
}

// Nelder-Mead on a clamped parameter box. Returns the best point found.
Eigen::VectorXd nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, double step, int max_iters, double tol) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> value(n + 1);
  for (int i = 1; i <= n; ++i) simplex[i](i - 1) += step;
  for (int i = 0; i <= n; ++i) value[i] = objective(simplex[i]);

  const auto order = [&] {
    for (int i = 1; i <= n; ++i)
      for (int j = i; j > 0 && value[j] < value[j - 1]; --j) {
        std::swap(value[j], value[j - 1]);
        std::swap(simplex[j], simplex[j - 1]);
      }
  };
  order();

  for (int iter = 0; iter < max_iters; ++iter) {
    if (std::abs(value[n] - value[0]) < tol) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[n]);
    const double fr = objective(reflected);
    if (fr < value[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[n]);
      const double fe = objective(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        value[n] = fe;
      } else {
        simplex[n] = reflected;
        value[n] = fr;
      }
    } else if (fr < value[n - 1]) {
      simplex[n] = reflected;
      value[n] = fr;
    } else {
      const Eigen::VectorXd contracted =
          centroid + 0.5 * (simplex[n] - centroid);
      const double fc = objective(contracted);
      if (fc < value[n]) {
        simplex[n] = contracted;
        value[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          value[i] = objective(simplex[i]);
        }
      }
    }
    order();
  }
  return simplex[0];
}

}  // namespace

FitResult fit_hyperparameters(const std::vector<Observation>& data,
                              const KernelSpec& init, double noise_variance) {
  if (data.size() < 2)
    throw std::invalid_argument(
        "fit_hyperparameters: need at least two observations");
  init.validate();

  const int n_params = 1 + static_cast<int>(init.lengthscales.size());
  const auto objective = [&](const Eigen::VectorXd& raw) {
    const Eigen::VectorXd p = clamp_params(raw);
    const double lml =
        log_marginal_likelihood(data, params_to_spec(init, p), noise_variance);
    return std::isfinite(lml) ? -lml : std::numeric_limits<double>::max();
  };

  Eigen::VectorXd init_params(n_params);
  init_params(0) = std::log(init.signal_variance);
  for (int i = 0; i < init.lengthscales.size(); ++i)
    init_params(i + 1) = std::log(init.lengthscales(i));
  init_params = clamp_params(init_params);

  const double init_lml =
      log_marginal_likelihood(data, params_to_spec(init, init_params),
                              noise_variance);

  const double offsets[4] = {0.0, 1.0, -1.0, 2.0};
  Eigen::VectorXd best = init_params;
  double best_neg = -init_lml;
  bool any_improved = std::isfinite(init_lml);
  for (const double offset : offsets) {
    const Eigen::VectorXd start =
        clamp_params((init_params.array() + offset).matrix());
    const Eigen::VectorXd found = nelder_mead(objective, start, 0.7, 120, 1e-7);
    const double neg = objective(found);
    if (neg < best_neg) {
      best_neg = neg;
      best = clamp_params(found);
      any_improved = true;
    }
  }

  FitResult result;
  if (!any_improved || !std::isfinite(best_neg) ||
      best_neg == std::numeric_limits<double>::max()) {
    result.spec = init;
    result.warning = true;
    result.log_marginal_likelihood = init_lml;
    return result;
  }
  result.spec = params_to_spec(init, best);
  result.log_marginal_likelihood = -best_neg;
  return result;
}

}  // namespace mvabo
