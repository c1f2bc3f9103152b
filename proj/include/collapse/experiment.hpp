#pragma once

#include "collapse/analytics.hpp"
#include "collapse/config.hpp"
#include "collapse/simulate.hpp"
#include "collapse/svg.hpp"
#include "collapse/table.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace collapse {

/// Everything one config produces, before anything touches the disk.
struct ExperimentRun {
  ExperimentConfig config;
  std::string config_hash;
  std::string run_id; // output.name + "-" + the 16 hex digits of the hash
  ProbVec p0;
  EnsembleSummary summary;
  analytics::BoundsReport bounds;
  ResultTable table;
};

/// Inputs for bounds_report derived from a config and its p^(0).
analytics::BoundsInputs bounds_inputs(const ExperimentConfig& cfg, const ProbVec& p0);

/// Runs the ensemble and evaluates the matching closed forms.
///
/// Per-generation metrics: sigma, sup_norm, l1_to_p0, l1_to_p1 (mean and
/// standard error), rho (collapsed fraction), plus S_m and for the fully
/// synthetic chain rho_lower and rho_upper. Run-level metrics have no
/// generation: S0, support, collapsed, uncollapsed, collapse_time_mean,
/// absorbed_frequency.<token>, and the bound values that apply.
ExperimentRun execute(const ExperimentConfig& cfg);

/// Closed forms only; no simulation.
ExperimentRun evaluate_bounds(const ExperimentConfig& cfg);

/// Panels for one run: sigma, l1_to_p1, rho or collapse-time histogram.
std::vector<svg::Panel> run_panels(const ExperimentRun& run);

/// Output files written so far; removed again unless commit() is called.
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path directory);
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet();

  void write(const std::string& file_name, std::string_view content);
  /// `<stem>.meta.json` with the creation time; the only output holding one.
  void write_metadata(const std::string& stem, const std::string& config_hash, const std::string& config_text);
  void commit() { committed_ = true; }
  const std::vector<std::filesystem::path>& files() const { return files_; }

private:
  std::filesystem::path directory_;
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

struct WrittenOutputs {
  ResultTable table;
  std::string run_id;
  std::string config_hash;
  std::vector<std::filesystem::path> files;
};

void write_table(OutputSet& out, const std::string& stem, const std::vector<OutputFormat>& formats,
                 const ResultTable& table, const std::string& config_hash, const std::string& config_text,
                 const svg::Figure* figure);

/// execute() followed by writing every requested format into
/// cfg.output.directory as <name>.<ext>. Reruns are byte-identical.
WrittenOutputs run_experiment(const ExperimentConfig& cfg);

/// evaluate_bounds() written as <name>-bounds.<ext>.
WrittenOutputs run_bounds(const ExperimentConfig& cfg);

struct FigureOptions {
  std::filesystem::path out_dir = "out";
  std::optional<int> replicates;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::vector<OutputFormat> formats{OutputFormat::csv, OutputFormat::svg};
};

inline constexpr int kFigureIds[] = {1, 2, 3, 5, 6};

/// Runs the canonical configuration of figure `id` and writes fig<id>.<ext>.
/// Throws UnknownFigure for ids outside kFigureIds.
WrittenOutputs reproduce_figure(int id, const FigureOptions& options);

/// Canonical configs behind the multi-run figures (2, 3, 5, 6).
std::vector<ExperimentConfig> figure_configs(int id, const FigureOptions& options);

struct BenchResult {
  unsigned threads = 1;
  double seconds = 0.0;
  double samples_per_second = 0.0;
  bool identical_to_single_thread = true;
};

/// Times a fixed fully synthetic ensemble at each thread count and checks
/// the summaries agree bit for bit.
std::vector<BenchResult> bench(const std::vector<unsigned>& thread_counts, int replicates, std::uint64_t seed);

} // namespace collapse
