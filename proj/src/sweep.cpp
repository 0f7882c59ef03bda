#include "gdev/sweep.hpp"

#include <set>

namespace gdev {

std::size_t SweepPlan::unique_configurations() const {
  std::set<ConfigKey> keys;
  for (const auto& c : configs) keys.insert(c.key());
  return keys.size();
}

SweepPlan plan_sweep(const SweepMatrix& matrix,
                     const std::optional<std::vector<int>>& core_list) {
  SweepPlan plan{validate_matrix(matrix), {}};
  plan.configs.reserve(matrix.total_executions());
  for (int sweep = 1; sweep <= matrix.sweep_count; ++sweep) {
    for (const auto& model : matrix.models) {
      for (int threads : matrix.thread_counts) {
        for (int batch : matrix.batch_sizes) {
          for (int rep = 1; rep <= matrix.repetitions; ++rep) {
            RunConfig c{model, batch, threads, rep, sweep, core_list};
            validate_config(c);
            plan.configs.push_back(std::move(c));
          }
        }
      }
    }
  }
  return plan;
}

ExecutionOptions ExecutionOptions::from(const SweepMatrix& matrix) {
  ExecutionOptions o;
  o.warmup_iterations = matrix.warmup_iterations;
  o.measure_iterations = matrix.measure_iterations;
  return o;
}

namespace {

std::vector<double> checked_phase(Workload& workload, int n, Phase phase,
                                  const ExecutionOptions& options) {
  auto values = workload.run_iterations(static_cast<std::size_t>(n), phase);
  if (values.size() != static_cast<std::size_t>(n)) {
    throw ProtocolError("count mismatch: requested " + std::to_string(n) + " " +
                        std::string(to_string(phase)) + " iterations, got " +
                        std::to_string(values.size()));
  }
  const double ceiling_ms = options.iteration_timeout.count() * 1000.0;
  for (double v : values) {
    if (!(v > 0.0)) throw WorkloadFailure("non-positive latency " + std::to_string(v));
    if (v > ceiling_ms) {
      throw Timeout("iteration took " + std::to_string(v) + " ms, ceiling is " +
                    std::to_string(ceiling_ms) + " ms");
    }
  }
  return values;
}

}  // namespace

RunRecord execute_config(const RunConfig& config, Workload& workload,
                         const ExecutionOptions& options) {
  validate_config(config);
  if (options.warmup_iterations < 0 || options.measure_iterations < 1) {
    throw InvalidPlan("need warmup >= 0 and measure >= 1 iterations");
  }
  RunRecord record;
  record.config = config;
  record.timestamp = std::chrono::system_clock::now();
  record.started = std::chrono::steady_clock::now();
  record.warmup_latencies_ms =
      checked_phase(workload, options.warmup_iterations, Phase::Warmup, options);
  record.measured_latencies_ms =
      checked_phase(workload, options.measure_iterations, Phase::Measure, options);
  record.finished = std::chrono::steady_clock::now();
  return record;
}

Dataset execute_sweep(const SweepPlan& plan, WorkloadRuntime& runtime,
                      const ExecutionOptions& options, const ProgressCallback& progress) {
  Dataset data;
  data.records.reserve(plan.configs.size());
  for (std::size_t i = 0; i < plan.configs.size(); ++i) {
    const auto& config = plan.configs[i];
    if (progress) progress(i, plan.configs.size(), config);
    try {
      auto workload = runtime.open(config);
      data.records.push_back(execute_config(config, *workload, options));
    } catch (const Error& e) {
      if (!options.continue_on_error) throw;
      data.failures.push_back({i, config, e.code(), e.what()});
    }
  }
  return data;
}

}  // namespace gdev
