#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvabo/risk_bounds.hpp"

namespace mvabo {

/// A blackbox problem instance: finite design grid X, finite environment
/// grid (the w support, or the perturbation support in noisy-input
/// problems), the environment distribution, and a deterministic oracle
/// mapping (x, w) to a real value. Immutable after construction; oracle
/// evaluation is reentrant.
struct Benchmark {
  std::string name;
  std::vector<Eigen::VectorXd> design_grid;
  std::vector<Eigen::VectorXd> env_grid;
  EnvDistribution env_dist;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> oracle;
  KernelSpec default_kernel;
  int default_refit_interval = 0;
  bool additive_input = false;  // joint point is x + w instead of (x, w)
};

/// Evenly spaced 1-D grid of n points on [lo, hi].
std::vector<Eigen::VectorXd> linear_grid(int n, double lo = -1.0,
                                         double hi = 1.0);

/// Cartesian product of d copies of an evenly spaced 1-D grid.
std::vector<Eigen::VectorXd> product_grid(int points_per_dim, int dims,
                                          double lo = -1.0, double hi = 1.0);

/// Weights proportional to the standard normal density at each support
/// point (product across coordinates for multi-dimensional support).
EnvDistribution truncated_normal_weights(
    const std::vector<Eigen::VectorXd>& support);

/// Deterministic surrogate of a GP sample path: a path is drawn on a
/// 25x25 anchor grid over [-1,1]^2 from the prior with the isotropic
/// Gaussian kernel (signal 1, lengthscale 0.25), a noise-free GP is fitted
/// to it, and the posterior mean acts as the oracle. X and Omega default to
/// 100-point grids on [-1, 1].
Benchmark gp_sample_benchmark(std::uint64_t seed, int x_points = 100,
                              int w_points = 100, int anchor_points = 25);

/// 1-D variant over an enlarged interval for the noisy-input setting:
/// the design grid lives on [-1, 1], perturbations on a small symmetric
/// grid, and the oracle evaluates the sample-path surrogate at x + xi.
Benchmark gp_sample_noisy_benchmark(std::uint64_t seed, int x_points = 100,
                                    int noise_points = 11,
                                    double noise_halfwidth = 0.25);

/// Bird function (2D) on [-2 pi, 2 pi]^2; x is the first dimension, w the
/// second, each rescaled from a 100-point grid on [-1, 1].
Benchmark bird_benchmark(int points_per_dim = 100);

/// Rosenbrock function (3D, sum form) on [-2.048, 2.048]^3; w is the third
/// dimension, x the first two.
Benchmark rosenbrock_benchmark(int points_per_dim = 100);

struct NewsvendorParams {
  int products = 2;
  Eigen::VectorXd prices = (Eigen::VectorXd(2) << 1.0, 0.9).finished();
  Eigen::VectorXd costs = (Eigen::VectorXd(2) << 0.5, 0.4).finished();
  int customers = 50;
  double gamma_shape = 2.0;
  double gamma_scale = 0.5;
  int inventory_max = 30;
  int inventory_stride = 2;
  int env_samples = 200;  // frozen preference draws forming the w grid
};

/// Newsvendor with substitution: x is the initial inventory vector, w a
/// frozen realization of per-product preference weights (independent Gamma
/// draws). Each customer buys the highest-utility in-stock product
/// (utility = preference - price; no purchase when all utilities are
/// negative or stock is gone); profit = revenue - procurement cost.
Benchmark newsvendor_benchmark(const NewsvendorParams& params,
                               std::uint64_t seed);

/// Registry addressable by name: gp-sample, gp-sample-noisy, bird,
/// rosenbrock, newsvendor. Unknown names throw std::invalid_argument.
Benchmark make_benchmark(const std::string& name, std::uint64_t seed,
                         const std::map<std::string, double>& overrides = {});

}  // namespace mvabo
