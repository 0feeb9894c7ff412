#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvabo/experiment.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int command_run(const std::string& config_path, const std::string& seeds,
                const std::string& out_dir, int workers) {
  mvabo::ExperimentConfig config =
      mvabo::parse_experiment_config(read_file(config_path));
  if (!seeds.empty()) {
    config.seeds.clear();
    std::istringstream in(seeds);
    std::string part;
    while (std::getline(in, part, ','))
      config.seeds.push_back(std::stoull(part));
  }
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (workers > 0) config.workers = workers;

  const mvabo::RunResult result = mvabo::run_experiment(config);
  for (const auto& path : result.trace_paths)
    if (!path.empty()) std::cout << "trace: " << path << "\n";
  if (!result.summary_path.empty())
    std::cout << "summary: " << result.summary_path << "\n";
  for (const auto& error : result.errors)
    std::cerr << "error: " << error << "\n";
  return result.errors.empty() ? 0 : 1;
}

int command_aggregate(const std::string& in_dir, const std::string& out_file) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("trace_", 0) == 0 &&
        entry.path().extension() == ".csv")
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    std::cerr << "error: no trace files under " << in_dir << "\n";
    return 1;
  }
  std::vector<mvabo::LoadedTrace> traces;
  traces.reserve(paths.size());
  for (const auto& path : paths) traces.push_back(mvabo::load_trace(path));
  mvabo::Summary summary = mvabo::aggregate(traces);
  summary.header.push_back("source: " + in_dir);
  mvabo::write_summary(out_file, summary);
  std::cout << "summary: " << out_file << "\n";
  return 0;
}

int command_emit_plot_data(const std::string& in_file,
                           const std::string& out_file) {
  const mvabo::Summary summary = mvabo::load_summary(in_file);
  mvabo::emit_plot_data(summary, out_file);
  std::cout << "plot-data: " << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-aware GP active learning over design and environment "
               "variables: multi-task, multi-objective, and constrained "
               "experiment runner"};
  app.set_version_flag("--version",
                       std::string("mvabo ") + MVABO_VERSION + " (" +
                           __DATE__ ")");
  app.require_subcommand(1);

  std::string config_path, seeds, out_dir, in_path, out_file;
  int workers = 0;

  CLI::App* run = app.add_subcommand("run", "Execute a configured experiment");
  run->add_option("--config", config_path, "Path to a key=value config file")
      ->required();
  run->add_option("--seeds", seeds, "Comma-separated seed override");
  run->add_option("--out", out_dir, "Output directory override");
  run->add_option("--workers", workers, "Worker pool size (default: cores)");

  CLI::App* agg = app.add_subcommand(
      "aggregate", "Aggregate a directory of trace files into a summary");
  agg->add_option("--in", in_path, "Directory containing trace_*.csv")
      ->required();
  agg->add_option("--out", out_file, "Summary output path")->required();

  CLI::App* plot = app.add_subcommand(
      "emit-plot-data", "Convert a summary into a long-format plot table");
  plot->add_option("--in", in_path, "Summary file")->required();
  plot->add_option("--out", out_file, "CSV output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return command_run(config_path, seeds, out_dir, workers);
    if (agg->parsed()) return command_aggregate(in_path, out_file);
    if (plot->parsed()) return command_emit_plot_data(in_path, out_file);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
