#include "mvabo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mvabo {
namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in(s);
  while (std::getline(in, current, sep)) parts.push_back(trim(current));
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for '" + key + "': " +
                                value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v))
    throw std::invalid_argument("config: expected integer for '" + key + "'");
  return static_cast<int>(v);
}

// Benchmark parameter keys forwarded to make_benchmark.
const std::set<std::string> kBenchmarkParamKeys = {
    "x_grid_points", "w_grid_points",  "anchor_points",   "noise_halfwidth",
    "customers",     "gamma_shape",    "gamma_scale",     "inventory_max",
    "inventory_stride", "env_samples",
};

Scenario default_scenario(Method method) {
  switch (method) {
    case Method::kMoMvaBo:
      return Scenario::kMultiObjective;
    case Method::kConstrainedMvaBo:
      return Scenario::kConstrained;
    default:
      return Scenario::kMultiTask;
  }
}

void check_method_scenario(Method method, Scenario scenario) {
  const bool ok = [&] {
    switch (method) {
      case Method::kMtMvaBo:
        return scenario == Scenario::kMultiTask;
      case Method::kMoMvaBo:
        return scenario == Scenario::kMultiObjective;
      case Method::kConstrainedMvaBo:
        return scenario == Scenario::kConstrained;
      case Method::kRandomSampling:
      case Method::kUncertaintySampling:
        return scenario != Scenario::kConstrained;
      default:  // the UCB baselines are multi-task estimators
        return scenario == Scenario::kMultiTask;
    }
  }();
  if (!ok)
    throw std::invalid_argument("config: method '" + to_string(method) +
                                "' cannot run the '" + to_string(scenario) +
                                "' scenario");
}

int default_refit_interval(const std::string& benchmark) {
  return benchmark.rfind("gp-sample", 0) == 0 ? 0 : 10;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kMtMvaBo: return "mt-mva-bo";
    case Method::kMoMvaBo: return "mo-mva-bo";
    case Method::kConstrainedMvaBo: return "constrained-mva-bo";
    case Method::kRandomSampling: return "rs";
    case Method::kUncertaintySampling: return "us";
    case Method::kBqoUcb: return "bqoucb";
    case Method::kBoVo: return "bo-vo";
    case Method::kAdaBqoUcb: return "ada-bqoucb";
    case Method::kAdaBoVo: return "ada-bo-vo";
  }
  return "?";
}

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kMultiTask: return "multi-task";
    case Scenario::kMultiObjective: return "multi-objective";
    case Scenario::kConstrained: return "constrained";
  }
  return "?";
}

std::string to_string(EnvironmentMode mode) {
  switch (mode) {
    case EnvironmentMode::kSampledKnownP: return "sampled-known-p";
    case EnvironmentMode::kSampledEmpiricalP: return "sampled-empirical-p";
    case EnvironmentMode::kSimulatorSelected: return "simulator-selected";
  }
  return "?";
}

std::string to_string(InputMode mode) {
  return mode == InputMode::kJoint ? "joint" : "noisy-input";
}

std::string to_string(RecommendationRule rule) {
  return rule == RecommendationRule::kPerStepBounds ? "per-step-bounds"
                                                    : "current-step-bounds";
}

Method method_from_string(const std::string& name) {
  for (const Method m :
       {Method::kMtMvaBo, Method::kMoMvaBo, Method::kConstrainedMvaBo,
        Method::kRandomSampling, Method::kUncertaintySampling, Method::kBqoUcb,
        Method::kBoVo, Method::kAdaBqoUcb, Method::kAdaBoVo})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("config: unknown method '" + name + "'");
}

Scenario scenario_from_string(const std::string& name) {
  for (const Scenario s : {Scenario::kMultiTask, Scenario::kMultiObjective,
                           Scenario::kConstrained})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("config: unknown scenario '" + name + "'");
}

EnvironmentMode environment_mode_from_string(const std::string& name) {
  for (const EnvironmentMode m :
       {EnvironmentMode::kSampledKnownP, EnvironmentMode::kSampledEmpiricalP,
        EnvironmentMode::kSimulatorSelected})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("config: unknown environment mode '" + name +
                              "'");
}

InputMode input_mode_from_string(const std::string& name) {
  for (const InputMode m : {InputMode::kJoint, InputMode::kNoisyInput})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("config: unknown input mode '" + name + "'");
}

RecommendationRule recommendation_rule_from_string(const std::string& name) {
  for (const RecommendationRule r : {RecommendationRule::kPerStepBounds,
                                     RecommendationRule::kCurrentStepBounds})
    if (to_string(r) == name) return r;
  throw std::invalid_argument("config: unknown recommendation rule '" + name +
                              "'");
}

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig config;
  bool have_scenario = false;
  bool have_refit = false;
  bool have_kernel_family = false;
  std::string kernel_family;
  std::vector<double> kernel_lengthscales;
  std::optional<double> kernel_signal_variance;

  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " +
                                  std::to_string(line_number) +
                                  " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: empty key or value on line " +
                                  std::to_string(line_number));

    if (key == "benchmark") {
      config.benchmark = value;
    } else if (key == "method") {
      config.method = method_from_string(value);
    } else if (key == "scenario") {
      config.scenario.scenario = scenario_from_string(value);
      have_scenario = true;
    } else if (key == "alpha") {
      config.scenario.alpha = parse_double(key, value);
    } else if (key == "epsilon1") {
      config.scenario.epsilon(0) = parse_double(key, value);
    } else if (key == "epsilon2") {
      config.scenario.epsilon(1) = parse_double(key, value);
    } else if (key == "h") {
      config.scenario.h = parse_double(key, value);
    } else if (key == "delta") {
      config.scenario.delta = parse_double(key, value);
    } else if (key == "rkhs_bound") {
      config.scenario.rkhs_bound = parse_double(key, value);
    } else if (key == "noise_variance") {
      config.scenario.noise_variance = parse_double(key, value);
    } else if (key == "budget") {
      config.scenario.budget = parse_int(key, value);
    } else if (key == "environment_mode") {
      config.scenario.environment_mode = environment_mode_from_string(value);
    } else if (key == "input_mode") {
      config.scenario.input_mode = input_mode_from_string(value);
    } else if (key == "recommendation_rule") {
      config.scenario.recommendation_rule =
          recommendation_rule_from_string(value);
    } else if (key == "refit_interval") {
      config.scenario.refit_interval = parse_int(key, value);
      have_refit = true;
    } else if (key == "seeds") {
      config.seeds.clear();
      for (const auto& part : split(value, ','))
        config.seeds.push_back(
            static_cast<std::uint64_t>(parse_double(key, part)));
      if (config.seeds.empty())
        throw std::invalid_argument("config: seeds must be nonempty");
    } else if (key == "output_dir") {
      config.output_dir = value;
    } else if (key == "workers") {
      config.workers = parse_int(key, value);
    } else if (key == "kernel_family") {
      kernel_family = value;
      have_kernel_family = true;
    } else if (key == "kernel_lengthscale") {
      kernel_lengthscales.clear();
      for (const auto& part : split(value, ','))
        kernel_lengthscales.push_back(parse_double(key, part));
    } else if (key == "kernel_signal_variance") {
      kernel_signal_variance = parse_double(key, value);
    } else if (kBenchmarkParamKeys.count(key)) {
      config.benchmark_params[key] = parse_double(key, value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  static const std::set<std::string> known_benchmarks = {
      "gp-sample", "gp-sample-noisy", "bird", "rosenbrock", "newsvendor"};
  if (!known_benchmarks.count(config.benchmark))
    throw std::invalid_argument("config: unknown benchmark '" +
                                config.benchmark + "'");

  if (!have_scenario) config.scenario.scenario = default_scenario(config.method);
  check_method_scenario(config.method, config.scenario.scenario);
  config.scenario.method = config.method;
  if (!have_refit)
    config.scenario.refit_interval = default_refit_interval(config.benchmark);

  if (have_kernel_family || !kernel_lengthscales.empty() ||
      kernel_signal_variance) {
    if (!have_kernel_family || kernel_lengthscales.empty())
      throw std::invalid_argument(
          "config: kernel overrides need kernel_family and "
          "kernel_lengthscale");
    const double signal = kernel_signal_variance.value_or(1.0);
    if (kernel_family == "isotropic-gaussian") {
      if (kernel_lengthscales.size() != 1)
        throw std::invalid_argument(
            "config: isotropic kernel takes one lengthscale");
      config.scenario.kernel = KernelSpec::isotropic(kernel_lengthscales[0],
                                                     signal);
    } else if (kernel_family == "ard-gaussian") {
      Eigen::VectorXd ls(kernel_lengthscales.size());
      for (size_t i = 0; i < kernel_lengthscales.size(); ++i)
        ls(static_cast<int>(i)) = kernel_lengthscales[i];
      config.scenario.kernel = KernelSpec::ard(ls, signal);
    } else {
      throw std::invalid_argument("config: unknown kernel family '" +
                                  kernel_family + "'");
    }
  }

  if (config.output_dir.empty()) {
    const char* root = std::getenv("MVABO_OUT_ROOT");
    config.output_dir = root ? root : "out";
  }
  return config;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "benchmark=" << config.benchmark
      << ";method=" << to_string(config.method)
      << ";scenario=" << to_string(config.scenario.scenario)
      << ";alpha=" << format_double(config.scenario.alpha)
      << ";epsilon1=" << format_double(config.scenario.epsilon(0))
      << ";epsilon2=" << format_double(config.scenario.epsilon(1))
      << ";h=" << format_double(config.scenario.h)
      << ";delta=" << format_double(config.scenario.delta)
      << ";rkhs_bound=" << format_double(config.scenario.rkhs_bound)
      << ";noise_variance=" << format_double(config.scenario.noise_variance)
      << ";budget=" << config.scenario.budget
      << ";environment_mode=" << to_string(config.scenario.environment_mode)
      << ";input_mode=" << to_string(config.scenario.input_mode)
      << ";recommendation_rule="
      << to_string(config.scenario.recommendation_rule)
      << ";refit_interval=" << config.scenario.refit_interval;
  if (config.scenario.kernel) {
    const KernelSpec& k = *config.scenario.kernel;
    out << ";kernel_family="
        << (k.family == KernelFamily::kIsotropicGaussian ? "isotropic-gaussian"
                                                         : "ard-gaussian")
        << ";kernel_signal_variance=" << format_double(k.signal_variance)
        << ";kernel_lengthscale=";
    for (int i = 0; i < k.lengthscales.size(); ++i)
      out << (i ? "," : "") << format_double(k.lengthscales(i));
  }
  for (const auto& [key, value] : config.benchmark_params)
    out << ";" << key << "=" << format_double(value);
  out << ";seeds=";
  for (size_t i = 0; i < config.seeds.size(); ++i)
    out << (i ? "," : "") << config.seeds[i];
  return out.str();
}

namespace {

const char* kTraceColumns =
    "step,x_index,w_index,y,recommendation,metric,pareto_size,"
    "potential_size,uncertain_size,terminated";

std::string trace_filename(const ExperimentConfig& config,
                           std::uint64_t seed) {
  return "trace_" + to_string(config.method) + "_" + config.benchmark +
         "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace

void write_trace(const std::string& path, const ExperimentConfig& config,
                 std::uint64_t seed, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trace: cannot open " + path);
  out << "# mvabo-trace-v1\n";
  out << "# method: " << to_string(config.method) << "\n";
  out << "# benchmark: " << config.benchmark << "\n";
  out << "# seed: " << seed << "\n";
  out << "# config: " << serialize_config(config) << "\n";
  out << kTraceColumns << "\n";
  for (const TraceRecord& r : trace.records) {
    out << r.step << ',' << r.x_index << ',' << r.w_index << ','
        << format_double(r.y) << ','
        << (r.recommendation >= 0 ? std::to_string(r.recommendation) : "")
        << ',' << format_double(r.metric) << ','
        << (r.pareto_size >= 0 ? std::to_string(r.pareto_size) : "") << ','
        << (r.potential_size >= 0 ? std::to_string(r.potential_size) : "")
        << ','
        << (r.uncertain_size >= 0 ? std::to_string(r.uncertain_size) : "")
        << ',' << (r.terminated ? 1 : 0) << "\n";
  }
}

LoadedTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_trace: cannot open " + path);
  LoadedTrace trace;
  std::string line;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.rfind("# method: ", 0) == 0) {
      trace.method = trim(line.substr(10));
    } else if (line.rfind("# benchmark: ", 0) == 0) {
      trace.benchmark = trim(line.substr(13));
    } else if (line.rfind("# seed: ", 0) == 0) {
      trace.seed = std::stoull(trim(line.substr(8)));
    } else if (!line.empty() && line[0] == '#') {
      continue;
    } else if (!header_done) {
      header_done = true;  // column header line
    } else if (!line.empty()) {
      const auto cells = split(line, ',');
      if (cells.size() != 10)
        throw std::runtime_error("load_trace: malformed row in " + path);
      TraceRecord r;
      r.step = std::stoi(cells[0]);
      r.x_index = std::stoi(cells[1]);
      r.w_index = std::stoi(cells[2]);
      r.y = std::stod(cells[3]);
      r.recommendation = cells[4].empty() ? -1 : std::stoi(cells[4]);
      r.metric = cells[5].empty()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : std::stod(cells[5]);
      r.pareto_size = cells[6].empty() ? -1 : std::stoi(cells[6]);
      r.potential_size = cells[7].empty() ? -1 : std::stoi(cells[7]);
      r.uncertain_size = cells[8].empty() ? -1 : std::stoi(cells[8]);
      r.terminated = cells[9] == "1";
      trace.records.push_back(r);
    }
  }
  return trace;
}

Summary aggregate(const std::vector<LoadedTrace>& traces) {
  if (traces.empty())
    throw std::invalid_argument("aggregate: need at least one trace");
  std::map<std::pair<std::string, std::string>, std::vector<const LoadedTrace*>>
      groups;
  for (const auto& trace : traces)
    groups[{trace.method, trace.benchmark}].push_back(&trace);

  Summary summary;
  for (const auto& [key, group] : groups) {
    size_t max_steps = 0;
    for (const auto* trace : group)
      max_steps = std::max(max_steps, trace->records.size());
    for (size_t s = 0; s < max_steps; ++s) {
      SummaryRow row;
      row.method = key.first;
      row.benchmark = key.second;
      row.step = static_cast<int>(s) + 1;
      std::vector<double> values;
      for (const auto* trace : group) {
        if (trace->records.empty()) continue;
        const bool padded = s >= trace->records.size();
        const TraceRecord& r =
            padded ? trace->records.back() : trace->records[s];
        if (padded) ++row.n_padded;
        if (std::isfinite(r.metric)) values.push_back(r.metric);
      }
      row.n = static_cast<int>(values.size());
      if (row.n == 0) {
        row.mean = row.se = row.lo = row.hi =
            std::numeric_limits<double>::quiet_NaN();
      } else {
        double total = 0.0;
        for (const double v : values) total += v;
        row.mean = total / row.n;
        double ss = 0.0;
        for (const double v : values) ss += (v - row.mean) * (v - row.mean);
        row.se = row.n > 1 ? std::sqrt(ss / (row.n - 1)) / std::sqrt(row.n)
                           : 0.0;
        row.lo = row.mean - 2.0 * row.se;
        row.hi = row.mean + 2.0 * row.se;
      }
      summary.rows.push_back(row);
    }
  }
  return summary;
}

namespace {
const char* kSummaryColumns = "method,benchmark,step,mean,se,lo,hi,n,n_padded";
}

void write_summary(const std::string& path, const Summary& summary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_summary: cannot open " + path);
  out << "# mvabo-summary-v1\n";
  for (const auto& line : summary.header) out << "# " << line << "\n";
  out << kSummaryColumns << "\n";
  for (const SummaryRow& row : summary.rows) {
    out << row.method << ',' << row.benchmark << ',' << row.step << ','
        << format_double(row.mean) << ',' << format_double(row.se) << ','
        << format_double(row.lo) << ',' << format_double(row.hi) << ','
        << row.n << ',' << row.n_padded << "\n";
  }
}

Summary load_summary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_summary: cannot open " + path);
  Summary summary;
  std::string line;
  bool saw_version = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      const std::string content = trim(line.substr(1));
      if (!saw_version) {
        if (content != "mvabo-summary-v1")
          throw std::runtime_error("load_summary: not a summary file");
        saw_version = true;
      } else {
        summary.header.push_back(content);
      }
    } else if (!header_done) {
      header_done = true;
    } else if (!line.empty()) {
      const auto cells = split(line, ',');
      if (cells.size() != 9)
        throw std::runtime_error("load_summary: malformed row");
      SummaryRow row;
      row.method = cells[0];
      row.benchmark = cells[1];
      row.step = std::stoi(cells[2]);
      const auto value = [](const std::string& s) {
        return s.empty() ? std::numeric_limits<double>::quiet_NaN()
                         : std::stod(s);
      };
      row.mean = value(cells[3]);
      row.se = value(cells[4]);
      row.lo = value(cells[5]);
      row.hi = value(cells[6]);
      row.n = std::stoi(cells[7]);
      row.n_padded = std::stoi(cells[8]);
      summary.rows.push_back(row);
    }
  }
  if (!saw_version) throw std::runtime_error("load_summary: not a summary file");
  return summary;
}

void emit_plot_data(const Summary& summary, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot_data: cannot open " + csv_path);
  out << "method,benchmark,step,mean,lo,hi\n";
  for (const SummaryRow& row : summary.rows)
    out << row.method << ',' << row.benchmark << ',' << row.step << ','
        << format_double(row.mean) << ',' << format_double(row.lo) << ','
        << format_double(row.hi) << "\n";
}

Trace run_single(const ExperimentConfig& config, std::uint64_t seed,
                 const StepObserver& observer) {
  const Benchmark benchmark = make_benchmark(
      config.benchmark, derive_seed(seed, 3), config.benchmark_params);
  const GroundTruth truth =
      ground_truth(benchmark, config.scenario.alpha, config.scenario.h);
  return run_scenario(config.scenario, benchmark, &truth, seed, observer);
}

RunResult run_experiment(const ExperimentConfig& config) {
  if (config.seeds.empty())
    throw std::invalid_argument("run_experiment: seeds must be nonempty");
  fs::create_directories(config.output_dir);

  RunResult result;
  result.trace_paths.resize(config.seeds.size());
  std::vector<std::string> errors(config.seeds.size());

  const int available = static_cast<int>(std::thread::hardware_concurrency());
  const int workers = std::max(
      1, std::min<int>(config.workers > 0 ? config.workers
                                          : std::max(1, available),
                       static_cast<int>(config.seeds.size())));

  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= config.seeds.size()) return;
      const std::uint64_t seed = config.seeds[i];
      try {
        const Trace trace = run_single(config, seed);
        const fs::path path =
            fs::path(config.output_dir) / trace_filename(config, seed);
        write_trace(path.string(), config, seed, trace);
        result.trace_paths[i] = path.string();
      } catch (const std::exception& error) {
        errors[i] = "seed " + std::to_string(seed) + ": " + error.what();
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }

  for (const auto& error : errors)
    if (!error.empty()) result.errors.push_back(error);

  std::vector<LoadedTrace> traces;
  for (const auto& path : result.trace_paths)
    if (!path.empty()) traces.push_back(load_trace(path));
  if (!traces.empty()) {
    Summary summary = aggregate(traces);
    summary.header.insert(summary.header.begin(),
                          "config: " + serialize_config(config));
    const fs::path path = fs::path(config.output_dir) / "summary.txt";
    write_summary(path.string(), summary);
    result.summary_path = path.string();
  }
  return result;
}

}  // namespace mvabo
