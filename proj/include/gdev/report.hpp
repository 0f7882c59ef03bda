#pragma once

// Result persistence and plot-data emission.
//
// A results directory holds:
//   raw_latencies.csv         model,batch,threads,sweep,repetition,iteration,latency_ms
//   aggregates.csv            model,batch,threads,median_ms,p99_ms,stddev_ms,throughput_ips,n_samples
//   aggregates_per_sweep.csv  same columns with a leading sweep column
//   results.json              manifest, aggregates, failures, analysis
// Raw latencies carry 6 significant digits; aggregates are written with
// round-trip precision so re-reading them is exact.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdev/analysis.hpp"
#include "gdev/manifest.hpp"
#include "gdev/roofline.hpp"
#include "gdev/sweep.hpp"

namespace gdev::report {

struct AnalysisOptions {
  double epsilon = analysis::kDefaultSaturationEpsilon;
  double tau = roofline::kDefaultRidgeBand;
};

struct SaturationEntry {
  std::string model;
  int threads = 0;
  analysis::SaturationReport report;
};

struct CliffEntry {
  std::string model;
  int batch = 0;
  analysis::CliffReport report;
};

struct BatchRegressionEntry {
  std::string model;
  int threads = 0;
  analysis::BatchRegressionReport report;
};

struct TailEntry {
  ConfigKey key;
  double ratio = 1.0;
};

struct RooflineEntry {
  std::string model;
  std::string platform;
  roofline::RegimeVerdict verdict;
  double attainable_gflops = 0.0;
  double memory_bound_threshold_gb = 0.0;
  std::optional<roofline::Residency> residency;  // absent without weights/LLC sizes
};

struct AnalysisReport {
  AnalysisOptions options;
  std::vector<analysis::ThroughputCurve> throughput_curves;
  std::vector<analysis::SpeedupCurve> speedup_curves;
  std::vector<SaturationEntry> saturation;
  std::vector<CliffEntry> cliffs;
  std::vector<BatchRegressionEntry> batch_regressions;
  std::vector<analysis::GridCliffReport> grid_cliffs;
  std::vector<TailEntry> tails;
  std::vector<RooflineEntry> roofline;
};

AnalysisReport analyze(const std::vector<AggregatedResult>& aggregates,
                       const RunManifest& manifest, const AnalysisOptions& options = {});

nlohmann::json to_json(const AnalysisReport& report);
std::string format_text(const AnalysisReport& report);

// Rows = thread counts, columns = batch sizes, cells = median throughput.
// An absent cell is a configuration with no result.
struct HeatmapMatrix {
  std::string model;
  std::vector<int> threads;
  std::vector<int> batches;
  std::vector<std::vector<std::optional<double>>> cells;
};

// Axes come from `matrix` when given, else from the aggregates themselves.
// Throws UnknownModel.
HeatmapMatrix heatmap(const std::vector<AggregatedResult>& aggregates,
                      const std::string& model, const SweepMatrix* matrix = nullptr);

struct ResultFiles {
  std::filesystem::path raw_csv;
  std::filesystem::path aggregates_csv;
  std::filesystem::path per_sweep_csv;
  std::filesystem::path bundle_json;
};

// Throws EmptyInput for an empty dataset (nothing is written) and IoError.
ResultFiles write_dataset(const Dataset& dataset,
                          const std::vector<AggregatedResult>& aggregates,
                          const RunManifest& manifest, const AnalysisReport& analysis,
                          const std::filesystem::path& dir);

struct RawRow {
  ConfigKey key;
  int sweep = 0;
  int repetition = 0;
  int iteration = 0;
  double latency_ms = 0.0;
};

std::vector<RawRow> read_raw_csv(const std::filesystem::path& path);
std::vector<AggregatedResult> read_aggregates_csv(const std::filesystem::path& path);

struct ResultsDirectory {
  RunManifest manifest;
  std::vector<AggregatedResult> aggregates;
  std::vector<FailedConfig> failures;
};

ResultsDirectory load_results(const std::filesystem::path& dir);

// Writes throughput_vs_batch.csv, latency_vs_batch.csv,
// speedup_vs_threads.csv, median_vs_p99.csv, heatmap_<model>.csv and
// plots.json into `out_dir`. Returns the files written.
std::vector<std::filesystem::path> write_plot_data(const ResultsDirectory& results,
                                                   const std::filesystem::path& out_dir,
                                                   const AnalysisOptions& options = {});

// Writes `content` to a temp file beside `path` and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace gdev::report
