#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvabo/scenarios.hpp"

namespace mvabo {

/// Full run specification: benchmark, method, scenario parameters, seeds,
/// and output location. Produced by parse_experiment_config with every
/// default materialized.
struct ExperimentConfig {
  std::string benchmark = "gp-sample";
  Method method = Method::kMtMvaBo;
  ScenarioConfig scenario;
  std::map<std::string, double> benchmark_params;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir;
  int workers = 0;  // 0 = available parallelism
};

std::string to_string(Method method);
std::string to_string(Scenario scenario);
std::string to_string(EnvironmentMode mode);
std::string to_string(InputMode mode);
std::string to_string(RecommendationRule rule);

Method method_from_string(const std::string& name);
Scenario scenario_from_string(const std::string& name);
EnvironmentMode environment_mode_from_string(const std::string& name);
InputMode input_mode_from_string(const std::string& name);
RecommendationRule recommendation_rule_from_string(const std::string& name);

/// Parses the flat key=value config format (comma-separated arrays,
/// '#' comments). Unknown keys and malformed values are hard errors.
ExperimentConfig parse_experiment_config(const std::string& text);

/// Canonical single-line key=value form with all defaults materialized;
/// embedded in trace and summary headers.
std::string serialize_config(const ExperimentConfig& config);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

struct SummaryRow {
  std::string method;
  std::string benchmark;
  int step = 0;
  double mean = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;         // traces with a finite metric at this step
  int n_padded = 0;  // traces whose final metric was carried forward
};

struct Summary {
  std::vector<std::string> header;  // lines without the leading "# "
  std::vector<SummaryRow> rows;
};

struct LoadedTrace {
  std::string method;
  std::string benchmark;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
};

void write_trace(const std::string& path, const ExperimentConfig& config,
                 std::uint64_t seed, const Trace& trace);
LoadedTrace load_trace(const std::string& path);

/// Per-step mean and mean +- 2 * standard-error bands, grouped by
/// (method, benchmark). Shorter traces carry their final metric forward
/// and are counted in n_padded.
Summary aggregate(const std::vector<LoadedTrace>& traces);

void write_summary(const std::string& path, const Summary& summary);
Summary load_summary(const std::string& path);

/// Long-format plot table with columns method,benchmark,step,mean,lo,hi.
void emit_plot_data(const Summary& summary, const std::string& csv_path);

struct RunResult {
  std::vector<std::string> trace_paths;
  std::string summary_path;
  std::vector<std::string> errors;  // one entry per failed seed
};

/// Executes every seed (bounded worker pool), writes one trace per seed and
/// an aggregate summary. Identical config and seeds produce byte-identical
/// files.
RunResult run_experiment(const ExperimentConfig& config);

/// Single-seed run without file output; benchmark and ground truth are
/// built from the config exactly as run_experiment does.
Trace run_single(const ExperimentConfig& config, std::uint64_t seed,
                 const StepObserver& observer = {});

}  // namespace mvabo
