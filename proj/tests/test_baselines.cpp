#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "mvabo/baselines.hpp"
#include "mvabo/scenarios.hpp"

using namespace mvabo;

namespace {

// Benchmark with explicitly tabulated values.
Benchmark tabulated(const Eigen::MatrixXd& values, const Eigen::VectorXd& p) {
  Benchmark bench;
  bench.name = "tabulated";
  for (int i = 0; i < values.rows(); ++i)
    bench.design_grid.push_back(Eigen::VectorXd::Constant(1, i));
  for (int j = 0; j < values.cols(); ++j)
    bench.env_dist.support.push_back(Eigen::VectorXd::Constant(1, j));
  bench.env_grid = bench.env_dist.support;
  bench.env_dist.weights = p;
  bench.oracle = [values](const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    return values(static_cast<int>(x(0)), static_cast<int>(w(0)));
  };
  bench.default_kernel = KernelSpec::isotropic(0.25, 1.0);
  return bench;
}

Eigen::MatrixXd random_values(RngStream& rng, int nx, int nw) {
  Eigen::MatrixXd values(nx, nw);
  for (int i = 0; i < values.size(); ++i)
    values.data()[i] = rng.uniform(-2, 2);
  return values;
}

// Second, fully independent implementation of the exact objectives.
void direct_objectives(const Benchmark& bench, Eigen::VectorXd& f1,
                       Eigen::VectorXd& f2) {
  const int nx = static_cast<int>(bench.design_grid.size());
  const int nw = static_cast<int>(bench.env_grid.size());
  f1.resize(nx);
  f2.resize(nx);
  for (int i = 0; i < nx; ++i) {
    double mean = 0.0;
    for (int j = 0; j < nw; ++j)
      mean +=
          bench.oracle(bench.design_grid[i], bench.env_grid[j]) *
          bench.env_dist.weights(j);
    double second = 0.0;
    for (int j = 0; j < nw; ++j) {
      const double v = bench.oracle(bench.design_grid[i], bench.env_grid[j]);
      second += v * v * bench.env_dist.weights(j);
    }
    f1(i) = mean;
    f2(i) = -std::sqrt(std::max(0.0, second - mean * mean));
  }
}

}  // namespace

TEST_CASE("ground truth on the 2x2 hand instance") {
  Eigen::MatrixXd values(2, 2);
  values << 1.0, -1.0, 0.0, 0.0;
  const Benchmark bench =
      tabulated(values, Eigen::VectorXd::Constant(2, 0.5));
  const GroundTruth truth = ground_truth(bench, 0.5, -0.5);

  CHECK(truth.f1(0) == doctest::Approx(0.0));
  CHECK(truth.f1(1) == doctest::Approx(0.0));
  CHECK(truth.f2(0) == doctest::Approx(-1.0));
  CHECK(truth.f2(1) == doctest::Approx(0.0));
  CHECK(truth.x_star == 1);
  CHECK(truth.pareto_set == std::vector<int>{1});

  CHECK(regret(truth, 1) == doctest::Approx(0.0));
  CHECK(regret(truth, 0) == doctest::Approx(0.5));
}

TEST_CASE("ground truth: constant oracle") {
  const Benchmark bench = tabulated(Eigen::MatrixXd::Constant(3, 2, 0.4),
                                    Eigen::VectorXd::Constant(2, 0.5));
  const GroundTruth truth = ground_truth(bench, 0.5, -0.5);
  for (int i = 0; i < 3; ++i) CHECK(truth.f2(i) == doctest::Approx(0.0));
  CHECK(truth.pareto_set.size() == 3);  // identical vectors co-exist
  CHECK(truth.pareto_front.size() == 1);
}

TEST_CASE("ground truth properties") {
  RngStream rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const int nx = 2 + rng.uniform_index(6);
    const int nw = 2 + rng.uniform_index(5);
    Eigen::VectorXd p(nw);
    for (int j = 0; j < nw; ++j) p(j) = rng.uniform(0.05, 1.0);
    p /= p.sum();
    const Benchmark bench = tabulated(random_values(rng, nx, nw), p);
    const double alpha = rng.uniform(0.05, 0.95);
    const GroundTruth truth = ground_truth(bench, alpha, -0.5);

    // two-implementation oracle agreement
    Eigen::VectorXd f1, f2;
    direct_objectives(bench, f1, f2);
    for (int i = 0; i < nx; ++i) {
      CHECK(std::abs(truth.f1(i) - f1(i)) <= 1e-12);
      CHECK(std::abs(truth.f2(i) - f2(i)) <= 1e-12);
    }

    // the scalarized optimum is nondominated for interior alpha
    CHECK(std::count(truth.pareto_set.begin(), truth.pareto_set.end(),
                     truth.x_star) == 1);
    CHECK(!truth.pareto_set.empty());

    // the true Pareto set passes its own epsilon check for any epsilon
    CHECK(epsilon_pareto_check(truth, truth.pareto_set, {0.0, 0.0}).ok);
    CHECK(epsilon_pareto_check(truth, truth.pareto_set,
                               {rng.uniform(0, 1), rng.uniform(0, 1)})
              .ok);
  }
}

TEST_CASE("selection baselines") {
  RngStream rng(66);
  CHECK(rs_select(1, rng) == 0);

  int counts[4] = {0, 0, 0, 0};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[rs_select(4, rng)];
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(counts[k] / static_cast<double>(draws) - 0.25) < 0.01);

  RngStream a(5), b(5);
  for (int i = 0; i < 50; ++i) CHECK(rs_select(10, a) == rs_select(10, b));

  // us_select: exhaustive scan agreement and Dirac reduction
  PointwiseBounds pointwise;
  pointwise.stddev.resize(4, 3);
  for (int i = 0; i < pointwise.stddev.size(); ++i)
    pointwise.stddev.data()[i] = rng.uniform(0, 1);
  pointwise.mean = Eigen::MatrixXd::Zero(4, 3);
  pointwise.lower = -pointwise.stddev;
  pointwise.upper = pointwise.stddev;
  EnvDistribution p;
  p.weights = (Eigen::VectorXd(3) << 0.2, 0.5, 0.3).finished();
  for (int j = 0; j < 3; ++j)
    p.support.push_back(Eigen::VectorXd::Constant(1, j));
  const int chosen = us_select(pointwise, p);
  int expected = 0;
  for (int i = 1; i < 4; ++i)
    if (pointwise.stddev.row(i).dot(p.weights) >
        pointwise.stddev.row(expected).dot(p.weights))
      expected = i;
  CHECK(chosen == expected);

  EnvDistribution dirac;
  dirac.weights = (Eigen::VectorXd(3) << 0.0, 0.0, 1.0).finished();
  dirac.support = p.support;
  int best_col = 0;
  for (int i = 1; i < 4; ++i)
    if (pointwise.stddev(i, 2) > pointwise.stddev(best_col, 2)) best_col = i;
  CHECK(us_select(pointwise, dirac) == best_col);

  // bqoucb / bovo
  RiskBoundTable table;
  table.f1_upper = (Eigen::VectorXd(2) << 3.0, 1.0).finished();
  table.f1_lower = Eigen::VectorXd::Zero(2);
  table.f2_upper = (Eigen::VectorXd(2) << -1.0, -0.2).finished();
  table.f2_lower = Eigen::VectorXd::Constant(2, -2.0);
  CHECK(bqoucb_select(table) == 0);
  CHECK(bovo_select(table) == 1);

  // definitional identity with mt_select at the extreme weights
  for (int trial = 0; trial < 50; ++trial) {
    RiskBoundTable t;
    t.f1_lower = Eigen::VectorXd::Zero(5);
    t.f1_upper.resize(5);
    t.f2_upper.resize(5);
    for (int i = 0; i < 5; ++i) {
      t.f1_upper(i) = rng.uniform(-1, 1);
      t.f2_upper(i) = rng.uniform(-2, 0);
    }
    t.f2_lower = (t.f2_upper.array() - 1.0).matrix();
    scalarized_bounds(t, 1.0);
    CHECK(mt_select(t) == bqoucb_select(t));
    scalarized_bounds(t, 0.0);
    CHECK(mt_select(t) == bovo_select(t));
  }
}

TEST_CASE("hypervolume") {
  const Eigen::Vector2d ref{0.0, 0.0};
  CHECK(hypervolume({{1.0, 1.0}}, ref) == doctest::Approx(1.0));
  CHECK(hypervolume({{1.0, 0.5}, {0.5, 1.0}}, ref) == doctest::Approx(0.75));
  CHECK(hypervolume({}, ref) == doctest::Approx(0.0));

  // permutation invariance and absorption of dominated points
  RngStream rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Eigen::Vector2d> points;
    const int n = 2 + rng.uniform_index(6);
    for (int i = 0; i < n; ++i)
      points.push_back({rng.uniform(0.1, 2), rng.uniform(0.1, 2)});
    const double base = hypervolume(points, ref);

    std::vector<Eigen::Vector2d> shuffled = points;
    for (int i = n - 1; i > 0; --i)
      std::swap(shuffled[i], shuffled[rng.uniform_index(i + 1)]);
    CHECK(hypervolume(shuffled, ref) == doctest::Approx(base).epsilon(1e-12));

    // add a point dominated by points[0]
    std::vector<Eigen::Vector2d> extended = points;
    extended.push_back(points[0] - Eigen::Vector2d{0.05, 0.05});
    CHECK(hypervolume(extended, ref) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("hypervolume gap") {
  Eigen::MatrixXd values(3, 2);
  // objectives: F1 = (0, 1, 2); F2 = (0, -1, -2) via value spreads
  values << 0.0, 0.0, 2.0, 0.0, 4.0, 0.0;
  const Benchmark bench =
      tabulated(values, Eigen::VectorXd::Constant(2, 0.5));
  const GroundTruth truth = ground_truth(bench, 0.5, -0.5);
  REQUIRE(truth.f1.isApprox((Eigen::VectorXd(3) << 0.0, 1.0, 2.0).finished()));
  REQUIRE(truth.f2.isApprox((Eigen::VectorXd(3) << 0.0, -1.0, -2.0).finished()));
  CHECK(truth.pareto_set.size() == 3);

  CHECK(hypervolume_gap(truth, truth.pareto_set, truth.reference) ==
        doctest::Approx(0.0));

  // keeping only the middle point: hand sweep with ref = (-1e-6, -2-1e-6)
  const double r1 = truth.reference(0), r2 = truth.reference(1);
  const double hv_full = (0.0 - r1) * (0.0 - r2) +
                         (1.0 - r1) * (-1.0 - r2) + (2.0 - r1) * (-2.0 - r2) -
                         (0.0 - r1) * (-1.0 - r2) - (1.0 - r1) * (-2.0 - r2);
  CHECK(truth.hypervolume == doctest::Approx(hv_full).epsilon(1e-9));
  const double hv_mid = (1.0 - r1) * (-1.0 - r2);
  CHECK(hypervolume_gap(truth, {1}, truth.reference) ==
        doctest::Approx(hv_full - hv_mid).epsilon(1e-9));

  CHECK_THROWS_AS(hypervolume_gap(truth, {1}, Eigen::Vector2d{10.0, 10.0}),
                  std::invalid_argument);

  // gap is nonnegative for arbitrary estimated sets
  RngStream rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> subset;
    for (int i = 0; i < 3; ++i)
      if (rng.uniform() < 0.6) subset.push_back(i);
    CHECK(hypervolume_gap(truth, subset, truth.reference) >= -1e-12);
  }
}

TEST_CASE("epsilon pareto check") {
  // three-point front with one far-off Pareto point missing from the
  // estimate: condition 2 must fail until epsilon covers the gap
  Eigen::MatrixXd values(3, 2);
  values << 0.0, 0.0, 2.0, 0.0, 10.0, 0.0;  // F1 = (0, 1, 5)
  const Benchmark bench =
      tabulated(values, Eigen::VectorXd::Constant(2, 0.5));
  const GroundTruth truth = ground_truth(bench, 0.5, -0.5);

  const EpsilonParetoReport missing =
      epsilon_pareto_check(truth, {0, 1}, {0.5, 0.5});
  CHECK(!missing.ok);
  CHECK(missing.violated_condition == 2);
  CHECK(missing.x == 2);

  // enlarging epsilon never flips a passing check to failing
  RngStream rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> subset;
    for (int i = 0; i < 3; ++i)
      if (rng.uniform() < 0.7) subset.push_back(i);
    const double e1 = rng.uniform(0, 6), e2 = rng.uniform(0, 3);
    const bool small = epsilon_pareto_check(truth, subset, {e1, e2}).ok;
    const bool big =
        epsilon_pareto_check(truth, subset, {e1 + rng.uniform(0, 3),
                                             e2 + rng.uniform(0, 3)})
            .ok;
    if (small) CHECK(big);
  }

  // a kept point beaten by more than epsilon in both coordinates violates
  // condition 1
  Eigen::MatrixXd v2(2, 2);
  v2 << 3.0, -3.0, 2.0, 0.0;  // F = (0, -3) and (1, -1)
  const GroundTruth t2 =
      ground_truth(tabulated(v2, Eigen::VectorXd::Constant(2, 0.5)), 0.5, -0.5);
  REQUIRE(t2.f2(0) == doctest::Approx(-3.0));
  const EpsilonParetoReport dominated =
      epsilon_pareto_check(t2, {0}, {0.5, 0.5});
  CHECK(!dominated.ok);
  CHECK(dominated.violated_condition == 1);
  CHECK(dominated.x == 0);
  CHECK(dominated.other == 1);
}
