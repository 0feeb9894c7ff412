#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mvabo/experiment.hpp"

namespace py = pybind11;
using namespace mvabo;

namespace {

KernelSpec make_kernel(const std::string& family,
                       const Eigen::VectorXd& lengthscales,
                       double signal_variance) {
  if (family == "isotropic-gaussian") {
    if (lengthscales.size() != 1)
      throw std::invalid_argument("isotropic kernel takes one lengthscale");
    return KernelSpec::isotropic(lengthscales(0), signal_variance);
  }
  if (family == "ard-gaussian")
    return KernelSpec::ard(lengthscales, signal_variance);
  throw std::invalid_argument("unknown kernel family: " + family);
}

}  // namespace

PYBIND11_MODULE(_mvabo, m) {
  m.doc() =
      "GP-based active learning over design and environment variables: "
      "confidence bounds on the environment mean and negative standard "
      "deviation, with multi-task, Pareto, and constrained decision loops.";

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init(&make_kernel), py::arg("family"), py::arg("lengthscales"),
           py::arg("signal_variance") = 1.0)
      .def_readonly("signal_variance", &KernelSpec::signal_variance)
      .def_readonly("lengthscales", &KernelSpec::lengthscales);

  py::class_<Observation>(m, "Observation")
      .def(py::init([](const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                       double y, int step) {
             Observation obs;
             obs.x = x;
             obs.w = w;
             obs.y = y;
             obs.step = step;
             return obs;
           }),
           py::arg("x"), py::arg("w"), py::arg("y"), py::arg("step") = 0)
      .def_readonly("x", &Observation::x)
      .def_readonly("w", &Observation::w)
      .def_readonly("y", &Observation::y)
      .def_readonly("step", &Observation::step);

  py::class_<GpPosterior>(m, "GpPosterior")
      .def(py::init<KernelSpec, double>(), py::arg("kernel"),
           py::arg("noise_variance"))
      .def("add", &GpPosterior::add)
      .def("updated", &GpPosterior::updated)
      .def("size", &GpPosterior::size)
      .def("log_det_term", &GpPosterior::log_det_term)
      .def("query",
           [](const GpPosterior& model, const Eigen::MatrixXd& z) {
             Eigen::VectorXd mean, variance;
             model.query_batch(z, mean, variance);
             return py::make_tuple(mean, variance);
           },
           py::arg("points"));

  m.def("kernel_eval", &kernel_eval);

  py::class_<BetaSchedule>(m, "BetaSchedule")
      .def(py::init([](double rkhs_bound, double delta, int delta_divisor) {
             BetaSchedule s;
             s.rkhs_bound = rkhs_bound;
             s.delta = delta;
             s.delta_divisor = delta_divisor;
             return s;
           }),
           py::arg("rkhs_bound") = 2.0, py::arg("delta") = 0.1,
           py::arg("delta_divisor") = 3);
  m.def("beta", &beta);

  py::class_<PointwiseBounds>(m, "PointwiseBounds")
      .def_readonly("mean", &PointwiseBounds::mean)
      .def_readonly("stddev", &PointwiseBounds::stddev)
      .def_readonly("lower", &PointwiseBounds::lower)
      .def_readonly("upper", &PointwiseBounds::upper)
      .def_readonly("beta", &PointwiseBounds::beta);
  m.def("build_joint_grid", &build_joint_grid, py::arg("design"),
        py::arg("env"), py::arg("additive") = false);
  m.def("pointwise_bounds", &pointwise_bounds, py::arg("model"),
        py::arg("beta"), py::arg("joint_grid"), py::arg("n_design"),
        py::arg("n_env"));

  py::class_<EnvDistribution>(m, "EnvDistribution")
      .def(py::init([](const std::vector<Eigen::VectorXd>& support,
                       const Eigen::VectorXd& weights) {
             EnvDistribution dist;
             dist.support = support;
             dist.weights = weights;
             dist.validate();
             return dist;
           }),
           py::arg("support"), py::arg("weights"))
      .def_readonly("support", &EnvDistribution::support)
      .def_readonly("weights", &EnvDistribution::weights);

  py::class_<RiskBoundTable>(m, "RiskBoundTable")
      .def_readonly("f1_lower", &RiskBoundTable::f1_lower)
      .def_readonly("f1_upper", &RiskBoundTable::f1_upper)
      .def_readonly("f2_lower", &RiskBoundTable::f2_lower)
      .def_readonly("f2_upper", &RiskBoundTable::f2_upper)
      .def_readonly("g_lower", &RiskBoundTable::g_lower)
      .def_readonly("g_upper", &RiskBoundTable::g_upper);
  m.def("make_risk_table", &make_risk_table, py::arg("pointwise"), py::arg("p"),
        py::arg("step") = 0);
  m.def("scalarized_bounds", &scalarized_bounds);
  m.def("rect_diameter", &rect_diameter);
  m.def("noisy_input_bounds", &noisy_input_bounds, py::arg("pointwise"),
        py::arg("noise_dist"), py::arg("step") = 0);

  py::class_<ParetoState>(m, "ParetoState")
      .def_readonly("pareto_hat", &ParetoState::pareto_hat)
      .def_readonly("potential", &ParetoState::potential)
      .def_readonly("uncertain", &ParetoState::uncertain)
      .def_readonly("terminated", &ParetoState::terminated);
  m.def("estimate_pareto", &estimate_pareto);
  m.def("mo_select", &mo_select);
  m.def("mo_terminated", &mo_terminated);
  m.def("mt_select", &mt_select);

  py::class_<ConstrainedState>(m, "ConstrainedState")
      .def_readonly("m_cons", &ConstrainedState::m_cons)
      .def_readonly("s_feasible", &ConstrainedState::s_feasible)
      .def_readonly("m_obj", &ConstrainedState::m_obj)
      .def_readonly("m_latent", &ConstrainedState::m_latent)
      .def_readonly("terminated", &ConstrainedState::terminated)
      .def_property_readonly("recommendation", [](const ConstrainedState& s) {
        return s.recommendation ? py::cast(*s.recommendation)
                                : py::none().cast<py::object>();
      });
  m.def("constrained_step", &constrained_step);

  m.def("simulator_env_select", &simulator_env_select, py::arg("model"),
        py::arg("x"), py::arg("env_grid"), py::arg("additive") = false);
  m.def("noisy_simulator_select", &noisy_simulator_select);

  py::class_<DiscretizedDesign>(m, "DiscretizedDesign")
      .def_readonly("grid", &DiscretizedDesign::grid)
      .def_readonly("epsilon_half", &DiscretizedDesign::epsilon_half)
      .def_readonly("tau", &DiscretizedDesign::tau)
      .def_readonly("segments_per_dim", &DiscretizedDesign::segments_per_dim);
  m.def("discretize_design_space", &discretize_design_space, py::arg("d1"),
        py::arg("epsilon"), py::arg("lipschitz_l"), py::arg("b_tilde"),
        py::arg("max_points") = 1000000);

  py::class_<Benchmark>(m, "Benchmark")
      .def_readonly("name", &Benchmark::name)
      .def_readonly("design_grid", &Benchmark::design_grid)
      .def_readonly("env_grid", &Benchmark::env_grid)
      .def_readonly("env_dist", &Benchmark::env_dist)
      .def("oracle",
           [](const Benchmark& bench, const Eigen::VectorXd& x,
              const Eigen::VectorXd& w) { return bench.oracle(x, w); });
  m.def("make_benchmark", &make_benchmark, py::arg("name"), py::arg("seed"),
        py::arg("overrides") = std::map<std::string, double>{});
  m.def("truncated_normal_weights", &truncated_normal_weights);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("f1", &GroundTruth::f1)
      .def_readonly("f2", &GroundTruth::f2)
      .def_readonly("g", &GroundTruth::g)
      .def_readonly("x_star", &GroundTruth::x_star)
      .def_readonly("pareto_set", &GroundTruth::pareto_set)
      .def_readonly("reference", &GroundTruth::reference)
      .def_readonly("hypervolume", &GroundTruth::hypervolume)
      .def_property_readonly("constrained_optimum", [](const GroundTruth& t) {
        return t.constrained_optimum ? py::cast(*t.constrained_optimum)
                                     : py::none().cast<py::object>();
      });
  m.def("ground_truth", &ground_truth, py::arg("benchmark"), py::arg("alpha"),
        py::arg("h"), py::arg("reference") = std::nullopt);
  m.def("regret", &regret);
  m.def("hypervolume", &hypervolume);
  m.def("hypervolume_gap", &hypervolume_gap);
  m.def("epsilon_pareto_check",
        [](const GroundTruth& truth, const std::vector<int>& estimated,
           const Eigen::Vector2d& epsilon) {
          const EpsilonParetoReport report =
              epsilon_pareto_check(truth, estimated, epsilon);
          return py::make_tuple(report.ok, report.message);
        });

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("step", &TraceRecord::step)
      .def_readonly("x_index", &TraceRecord::x_index)
      .def_readonly("w_index", &TraceRecord::w_index)
      .def_readonly("y", &TraceRecord::y)
      .def_readonly("recommendation", &TraceRecord::recommendation)
      .def_readonly("metric", &TraceRecord::metric)
      .def_readonly("pareto_size", &TraceRecord::pareto_size)
      .def_readonly("terminated", &TraceRecord::terminated);

  py::class_<Trace>(m, "Trace")
      .def_readonly("records", &Trace::records)
      .def_readonly("terminated", &Trace::terminated)
      .def_readonly("final_recommendation", &Trace::final_recommendation)
      .def_readonly("final_pareto", &Trace::final_pareto);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("benchmark", &ExperimentConfig::benchmark)
      .def_readonly("seeds", &ExperimentConfig::seeds)
      .def_readonly("output_dir", &ExperimentConfig::output_dir);
  m.def("parse_experiment_config", &parse_experiment_config);
  m.def("serialize_config", &serialize_config);
  m.def("run_single",
        [](const ExperimentConfig& config, std::uint64_t seed) {
          return run_single(config, seed);
        },
        py::arg("config"), py::arg("seed"));
  m.def("run_experiment",
        [](const ExperimentConfig& config, const std::string& output_dir) {
          ExperimentConfig local = config;
          if (!output_dir.empty()) local.output_dir = output_dir;
          const RunResult result = run_experiment(local);
          return py::make_tuple(result.trace_paths, result.summary_path,
                                result.errors);
        },
        py::arg("config"), py::arg("output_dir") = "");

  m.attr("__version__") = MVABO_VERSION;
}
