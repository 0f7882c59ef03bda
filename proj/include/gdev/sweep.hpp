#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gdev/errors.hpp"
#include "gdev/measurement.hpp"
#include "gdev/workload.hpp"

namespace gdev {

inline constexpr std::chrono::duration<double> kDefaultIterationTimeout{600.0};

// Every execution of the sweep, in loop-nest order:
// sweep > model > threads > batch > repetition.
struct SweepPlan {
  SweepMatrix matrix;
  std::vector<RunConfig> configs;

  std::size_t unique_configurations() const;
};

// Pure function of the (validated) matrix. `core_list`, when given, is
// attached to every config.
SweepPlan plan_sweep(const SweepMatrix& matrix,
                     const std::optional<std::vector<int>>& core_list = std::nullopt);

struct ExecutionOptions {
  int warmup_iterations = kDefaultWarmupIterations;
  int measure_iterations = kDefaultMeasureIterations;
  std::chrono::duration<double> iteration_timeout = kDefaultIterationTimeout;
  bool continue_on_error = false;

  static ExecutionOptions from(const SweepMatrix& matrix);
};

// Runs the warm-up phase then the measurement phase. Throws Timeout if any
// pass exceeds the per-iteration ceiling, ProtocolError if the workload
// returns the wrong number of latencies, and lets WorkloadFailure through.
RunRecord execute_config(const RunConfig& config, Workload& workload,
                         const ExecutionOptions& options);

struct FailedConfig {
  std::size_t plan_index = 0;  // 0-based position in the plan
  RunConfig config;
  ErrorCode code = ErrorCode::WorkloadFailure;
  std::string message;
};

struct Dataset {
  std::vector<RunRecord> records;
  std::vector<FailedConfig> failures;
};

using ProgressCallback = std::function<void(std::size_t index, std::size_t total,
                                            const RunConfig& config)>;

// Executes the plan strictly sequentially. Without continue_on_error the
// first failure propagates; with it the config is listed in
// Dataset::failures and the sweep moves on.
Dataset execute_sweep(const SweepPlan& plan, WorkloadRuntime& runtime,
                      const ExecutionOptions& options,
                      const ProgressCallback& progress = {});

}  // namespace gdev
