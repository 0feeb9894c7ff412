#include "mvabo/benchmarks.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "mvabo/random.hpp"

namespace mvabo {
namespace {

constexpr double kSamplePathLengthscale = 0.25;
// Anchor interpolation error scales like sqrt(jitter); 1e-13 keeps the
// reproduction error below 1e-6 while the factorization still succeeds.
constexpr double kFitJitter = 1e-13;

double standard_normal_density(double v) {
  return std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
}

// Noise-free GP interpolant of values on anchor rows; shared state for the
// sample-path oracles.
struct SamplePathSurrogate {
  KernelSpec kernel;
  Eigen::MatrixXd anchors;
  Eigen::VectorXd alpha;
  double inv_two_l2 = 0.0;

  double operator()(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd q =
        (anchors.rowwise() - z.transpose()).rowwise().squaredNorm();
    return kernel.signal_variance *
           alpha.dot((-q * inv_two_l2).array().exp().matrix());
  }
};

std::shared_ptr<SamplePathSurrogate> draw_sample_path(
    std::uint64_t seed, const std::vector<Eigen::VectorXd>& anchor_points) {
  auto surrogate = std::make_shared<SamplePathSurrogate>();
  surrogate->kernel = KernelSpec::isotropic(kSamplePathLengthscale, 1.0);
  surrogate->inv_two_l2 =
      1.0 / (2.0 * kSamplePathLengthscale * kSamplePathLengthscale);
  const int n = static_cast<int>(anchor_points.size());
  const int d = static_cast<int>(anchor_points[0].size());
  surrogate->anchors.resize(n, d);
  for (int i = 0; i < n; ++i)
    surrogate->anchors.row(i) = anchor_points[i].transpose();

  const Eigen::MatrixXd k =
      kernel_matrix(surrogate->kernel, surrogate->anchors, surrogate->anchors);
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = kFitJitter;
  for (;; jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt.compute(kj);
    if (llt.info() == Eigen::Success) break;
    if (jitter > 1e-8)
      throw NumericalError("gp_sample_benchmark: anchor factorization failed");
  }

  RngStream rng(seed);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.normal();
  const Eigen::VectorXd path = Eigen::MatrixXd(llt.matrixL()) * z;
  surrogate->alpha = llt.solve(path);
  return surrogate;
}

double affine_rescale(double g, double lo, double hi) {
  return lo + (g + 1.0) * 0.5 * (hi - lo);
}

}  // namespace

std::vector<Eigen::VectorXd> linear_grid(int n, double lo, double hi) {
  if (n <= 0) throw std::invalid_argument("linear_grid: need n > 0");
  std::vector<Eigen::VectorXd> grid(n);
  for (int i = 0; i < n; ++i) {
    const double v = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    grid[i] = Eigen::VectorXd::Constant(1, v);
  }
  return grid;
}

std::vector<Eigen::VectorXd> product_grid(int points_per_dim, int dims,
                                          double lo, double hi) {
  std::vector<Eigen::VectorXd> grid;
  const auto axis = linear_grid(points_per_dim, lo, hi);
  std::vector<int> index(dims, 0);
  for (;;) {
    Eigen::VectorXd p(dims);
    for (int d = 0; d < dims; ++d) p(d) = axis[index[d]](0);
    grid.push_back(p);
    int d = dims - 1;
    while (d >= 0 && ++index[d] == points_per_dim) index[d--] = 0;
    if (d < 0) break;
  }
  return grid;
}

EnvDistribution truncated_normal_weights(
    const std::vector<Eigen::VectorXd>& support) {
  if (support.empty())
    throw std::invalid_argument("truncated_normal_weights: empty support");
  EnvDistribution dist;
  dist.support = support;
  dist.weights.resize(support.size());
  for (size_t i = 0; i < support.size(); ++i) {
    double density = 1.0;
    for (int d = 0; d < support[i].size(); ++d)
      density *= standard_normal_density(support[i](d));
    dist.weights(static_cast<int>(i)) = density;
  }
  dist.weights /= dist.weights.sum();
  return dist;
}

Benchmark gp_sample_benchmark(std::uint64_t seed, int x_points, int w_points,
                              int anchor_points) {
  Benchmark bench;
  bench.name = "gp-sample";
  bench.design_grid = linear_grid(x_points);
  bench.env_grid = linear_grid(w_points);
  bench.env_dist = truncated_normal_weights(bench.env_grid);
  bench.default_kernel = KernelSpec::isotropic(kSamplePathLengthscale, 1.0);
  bench.default_refit_interval = 0;  // true hyperparameters are known

  std::vector<Eigen::VectorXd> anchors;
  for (const auto& x : linear_grid(anchor_points))
    for (const auto& w : linear_grid(anchor_points)) {
      Eigen::VectorXd z(2);
      z << x(0), w(0);
      anchors.push_back(z);
    }
  auto surrogate = draw_sample_path(seed, anchors);
  bench.oracle = [surrogate](const Eigen::VectorXd& x,
                             const Eigen::VectorXd& w) {
    Eigen::VectorXd z(x.size() + w.size());
    z << x, w;
    return (*surrogate)(z);
  };
  return bench;
}

Benchmark gp_sample_noisy_benchmark(std::uint64_t seed, int x_points,
                                    int noise_points, double noise_halfwidth) {
  Benchmark bench;
  bench.name = "gp-sample-noisy";
  bench.design_grid = linear_grid(x_points);
  bench.env_grid =
      linear_grid(noise_points, -noise_halfwidth, noise_halfwidth);
  // Mildly concentrated around zero perturbation.
  const double scale = noise_halfwidth / 2.0;
  EnvDistribution dist;
  dist.support = bench.env_grid;
  dist.weights.resize(noise_points);
  for (int i = 0; i < noise_points; ++i)
    dist.weights(i) = standard_normal_density(bench.env_grid[i](0) / scale);
  dist.weights /= dist.weights.sum();
  bench.env_dist = dist;
  bench.default_kernel = KernelSpec::isotropic(kSamplePathLengthscale, 1.0);
  bench.default_refit_interval = 0;
  bench.additive_input = true;

  // The path must cover every x + xi, so anchors span the enlarged interval.
  auto surrogate = draw_sample_path(
      seed, linear_grid(25, -1.0 - noise_halfwidth, 1.0 + noise_halfwidth));
  bench.oracle = [surrogate](const Eigen::VectorXd& x,
                             const Eigen::VectorXd& xi) {
    return (*surrogate)(x + xi);
  };
  return bench;
}

Benchmark bird_benchmark(int points_per_dim) {
  Benchmark bench;
  bench.name = "bird";
  bench.design_grid = linear_grid(points_per_dim);
  bench.env_grid = linear_grid(points_per_dim);
  bench.env_dist = truncated_normal_weights(bench.env_grid);
  bench.default_kernel =
      KernelSpec::ard(Eigen::VectorXd::Constant(2, 0.25), 1.0);
  bench.default_refit_interval = 10;
  const double bound = 2.0 * std::numbers::pi;
  bench.oracle = [bound](const Eigen::VectorXd& xg, const Eigen::VectorXd& wg) {
    const double x = affine_rescale(xg(0), -bound, bound);
    const double y = affine_rescale(wg(0), -bound, bound);
    const double s = 1.0 - std::cos(y);
    const double c = 1.0 - std::sin(x);
    return std::sin(x) * std::exp(s * s) + std::cos(y) * std::exp(c * c) +
           (x - y) * (x - y);
  };
  return bench;
}

Benchmark rosenbrock_benchmark(int points_per_dim) {
  Benchmark bench;
  bench.name = "rosenbrock";
  bench.design_grid = product_grid(points_per_dim, 2);
  bench.env_grid = linear_grid(points_per_dim);
  bench.env_dist = truncated_normal_weights(bench.env_grid);
  bench.default_kernel =
      KernelSpec::ard(Eigen::VectorXd::Constant(3, 0.25), 1.0);
  bench.default_refit_interval = 10;
  bench.oracle = [](const Eigen::VectorXd& xg, const Eigen::VectorXd& wg) {
    double v[3];
    v[0] = affine_rescale(xg(0), -2.048, 2.048);
    v[1] = affine_rescale(xg(1), -2.048, 2.048);
    v[2] = affine_rescale(wg(0), -2.048, 2.048);
    double total = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double a = v[i + 1] - v[i] * v[i];
      const double b = 1.0 - v[i];
      total += 100.0 * a * a + b * b;
    }
    return total;
  };
  return bench;
}

Benchmark newsvendor_benchmark(const NewsvendorParams& params,
                               std::uint64_t seed) {
  if (params.products <= 0)
    throw std::invalid_argument("newsvendor: need at least one product");
  if (params.prices.size() != params.products ||
      params.costs.size() != params.products)
    throw std::invalid_argument("newsvendor: price/cost size mismatch");
  for (int i = 0; i < params.products; ++i)
    if (!(params.prices(i) > params.costs(i) && params.costs(i) > 0.0))
      throw std::invalid_argument(
          "newsvendor: prices must exceed costs and costs must be positive");

  Benchmark bench;
  bench.name = "newsvendor";

  std::vector<int> levels;
  for (int v = 0; v <= params.inventory_max; v += params.inventory_stride)
    levels.push_back(v);
  std::vector<int> index(params.products, 0);
  for (;;) {
    Eigen::VectorXd x(params.products);
    for (int d = 0; d < params.products; ++d) x(d) = levels[index[d]];
    bench.design_grid.push_back(x);
    int d = params.products - 1;
    while (d >= 0 && ++index[d] == static_cast<int>(levels.size()))
      index[d--] = 0;
    if (d < 0) break;
  }

  RngStream rng(seed);
  for (int s = 0; s < params.env_samples; ++s) {
    Eigen::VectorXd w(params.products);
    for (int d = 0; d < params.products; ++d)
      w(d) = rng.gamma(params.gamma_shape, params.gamma_scale);
    bench.env_grid.push_back(w);
  }
  bench.env_dist.support = bench.env_grid;
  bench.env_dist.weights =
      Eigen::VectorXd::Constant(params.env_samples, 1.0 / params.env_samples);

  const Eigen::VectorXd prices = params.prices;
  const Eigen::VectorXd costs = params.costs;
  const int customers = params.customers;
  bench.oracle = [prices, costs, customers](const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& w) {
    Eigen::VectorXd stock = x;
    double revenue = 0.0;
    for (int c = 0; c < customers; ++c) {
      int best = -1;
      double best_utility = 0.0;
      for (int j = 0; j < stock.size(); ++j) {
        if (stock(j) < 1.0) continue;
        const double utility = w(j) - prices(j);
        if (utility > 0.0 && (best < 0 || utility > best_utility)) {
          best = j;
          best_utility = utility;
        }
      }
      if (best < 0) break;  // remaining customers face the same shelves
      stock(best) -= 1.0;
      revenue += prices(best);
    }
    return revenue - costs.dot(x);
  };

  bench.default_kernel = KernelSpec::ard(
      Eigen::VectorXd::Constant(2 * params.products, 0.25), 1.0);
  bench.default_refit_interval = 10;
  return bench;
}

Benchmark make_benchmark(const std::string& name, std::uint64_t seed,
                         const std::map<std::string, double>& overrides) {
  const auto get = [&overrides](const std::string& key, double fallback) {
    const auto it = overrides.find(key);
    return it == overrides.end() ? fallback : it->second;
  };
  if (name == "gp-sample")
    return gp_sample_benchmark(seed,
                               static_cast<int>(get("x_grid_points", 100)),
                               static_cast<int>(get("w_grid_points", 100)),
                               static_cast<int>(get("anchor_points", 25)));
  if (name == "gp-sample-noisy")
    return gp_sample_noisy_benchmark(
        seed, static_cast<int>(get("x_grid_points", 100)),
        static_cast<int>(get("w_grid_points", 11)),
        get("noise_halfwidth", 0.25));
  if (name == "bird")
    return bird_benchmark(static_cast<int>(get("x_grid_points", 100)));
  if (name == "rosenbrock")
    return rosenbrock_benchmark(static_cast<int>(get("x_grid_points", 100)));
  if (name == "newsvendor") {
    NewsvendorParams params;
    params.customers = static_cast<int>(get("customers", params.customers));
    params.gamma_shape = get("gamma_shape", params.gamma_shape);
    params.gamma_scale = get("gamma_scale", params.gamma_scale);
    params.inventory_max =
        static_cast<int>(get("inventory_max", params.inventory_max));
    params.inventory_stride =
        static_cast<int>(get("inventory_stride", params.inventory_stride));
    params.env_samples =
        static_cast<int>(get("env_samples", params.env_samples));
    return newsvendor_benchmark(params, seed);
  }
  throw std::invalid_argument("make_benchmark: unknown benchmark '" + name +
                              "'");
}

}  // namespace mvabo
