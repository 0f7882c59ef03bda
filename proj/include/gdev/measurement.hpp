#pragma once

// Core value types shared by the planner, the engine, statistics and
// reporting. Latencies are milliseconds (double) everywhere.

#include <chrono>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gdev {

inline constexpr int kDefaultWarmupIterations = 20;
inline constexpr int kDefaultMeasureIterations = 100;

// Experiment plan: models x batch sizes x thread counts, each configuration
// executed `repetitions` times per sweep and the whole sweep repeated
// `sweep_count` times.
struct SweepMatrix {
  std::vector<std::string> models;
  std::vector<int> batch_sizes;
  std::vector<int> thread_counts;
  int repetitions = 1;
  int sweep_count = 1;
  int warmup_iterations = kDefaultWarmupIterations;
  int measure_iterations = kDefaultMeasureIterations;

  // |M| * |B| * |T|
  std::size_t unique_configurations() const noexcept;
  // unique_configurations() * R * S
  std::size_t total_executions() const noexcept;

  bool operator==(const SweepMatrix&) const = default;
};

// Throws InvalidPlan naming the first violated invariant.
SweepMatrix validate_matrix(const SweepMatrix& matrix);

// Aggregation key: one (model, batch, threads) cell of the sweep.
struct ConfigKey {
  std::string model;
  int batch = 0;
  int threads = 0;

  auto operator<=>(const ConfigKey&) const = default;
  bool operator==(const ConfigKey&) const = default;
};

std::string to_string(const ConfigKey& key);

struct RunConfig {
  std::string model_id;
  int batch_size = 1;
  int threads = 1;
  int repetition_index = 1;  // 1-based
  int sweep_index = 1;       // 1-based
  std::optional<std::vector<int>> core_list;

  ConfigKey key() const { return {model_id, batch_size, threads}; }

  bool operator==(const RunConfig&) const = default;
};

// Throws InvalidPlan if batch/threads < 1 or core_list has duplicates or
// negative ids.
void validate_config(const RunConfig& config);

std::string describe(const RunConfig& config);

struct RunRecord {
  RunConfig config;
  std::vector<double> warmup_latencies_ms;  // diagnostics only, never aggregated
  std::vector<double> measured_latencies_ms;
  std::chrono::system_clock::time_point timestamp;  // wall-clock start
  std::chrono::steady_clock::time_point started;
  std::chrono::steady_clock::time_point finished;
};

struct AggregatedResult {
  ConfigKey key;
  double median_latency_ms = 0.0;
  double p99_latency_ms = 0.0;
  double stddev_ms = 0.0;
  double throughput_ips = 0.0;
  std::size_t n_samples = 0;

  bool operator==(const AggregatedResult&) const = default;
};

}  // namespace gdev
