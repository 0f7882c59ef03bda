#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gdev/measurement.hpp"

namespace gdev {

enum class Phase { Warmup, Measure };

std::string_view to_string(Phase phase) noexcept;

// A workload that has been prepared for one RunConfig (model, batch and
// thread count fixed). Each call runs n forward passes and returns one
// latency per pass, in execution order.
class Workload {
 public:
  virtual ~Workload() = default;
  virtual std::vector<double> run_iterations(std::size_t n, Phase phase) = 0;
};

// Produces a ready workload for a configuration. The engine opens exactly
// one workload per config and destroys it before opening the next.
class WorkloadRuntime {
 public:
  virtual ~WorkloadRuntime() = default;
  virtual std::unique_ptr<Workload> open(const RunConfig& config) = 0;
};

struct GemmDims {
  int m = 1;
  int k = 1;
  int n = 1;

  bool operator==(const GemmDims&) const = default;
};

struct WorkloadSpec {
  enum class Kind { BuiltinGemm, External };

  Kind kind = Kind::BuiltinGemm;
  std::string model_id;
  GemmDims dims;
  int element_bytes = 4;
  std::vector<std::string> command;  // argv, external only

  static WorkloadSpec builtin(std::string model_id, GemmDims dims);
  static WorkloadSpec external(std::string model_id, std::vector<std::string> command);

  // Throws InvalidWorkload.
  void validate() const;

  bool operator==(const WorkloadSpec&) const = default;
};

struct ExternalOptions {
  std::chrono::milliseconds handshake_timeout{30'000};
  // Ceiling per forward pass; a run of n passes may take n of these.
  std::chrono::duration<double> iteration_timeout{600.0};
};

// Maps model ids to workload specs. When a config carries a core list the
// calling thread is pinned to it before the workload is created, so GEMM
// workers and spawned children inherit the mask.
class SpecRuntime : public WorkloadRuntime {
 public:
  explicit SpecRuntime(std::map<std::string, WorkloadSpec> specs,
                       ExternalOptions external_options = {});

  std::unique_ptr<Workload> open(const RunConfig& config) override;

 private:
  std::map<std::string, WorkloadSpec> specs_;
  ExternalOptions external_options_;
};

}  // namespace gdev
