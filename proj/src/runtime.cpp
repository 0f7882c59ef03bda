#include "gdev/affinity.hpp"
#include "gdev/errors.hpp"
#include "gdev/external.hpp"
#include "gdev/gemm.hpp"
#include "gdev/workload.hpp"

namespace gdev {

std::string_view to_string(Phase phase) noexcept {
  return phase == Phase::Warmup ? "warmup" : "measure";
}

WorkloadSpec WorkloadSpec::builtin(std::string model_id, GemmDims dims) {
  WorkloadSpec s;
  s.kind = Kind::BuiltinGemm;
  s.model_id = std::move(model_id);
  s.dims = dims;
  return s;
}

WorkloadSpec WorkloadSpec::external(std::string model_id, std::vector<std::string> command) {
  WorkloadSpec s;
  s.kind = Kind::External;
  s.model_id = std::move(model_id);
  s.command = std::move(command);
  return s;
}

void WorkloadSpec::validate() const {
  if (kind == Kind::BuiltinGemm) {
    if (dims.m < 1 || dims.k < 1 || dims.n < 1) {
      throw InvalidWorkload("builtin GEMM dimensions must be >= 1");
    }
    // The kernel is FP32 only.
    if (element_bytes != 4) {
      throw InvalidWorkload("builtin GEMM supports 4-byte elements only, got " +
                            std::to_string(element_bytes));
    }
  } else if (command.empty() || command.front().empty()) {
    throw InvalidWorkload("external workload needs a command");
  }
}

SpecRuntime::SpecRuntime(std::map<std::string, WorkloadSpec> specs,
                         ExternalOptions external_options)
    : specs_(std::move(specs)), external_options_(external_options) {
  for (const auto& [id, spec] : specs_) spec.validate();
}

std::unique_ptr<Workload> SpecRuntime::open(const RunConfig& config) {
  validate_config(config);
  const auto it = specs_.find(config.model_id);
  if (it == specs_.end()) throw UnknownModel("no workload defined for model " + config.model_id);
  if (config.core_list) set_affinity(AffinityMask{*config.core_list});

  const WorkloadSpec& spec = it->second;
  if (spec.kind == WorkloadSpec::Kind::BuiltinGemm) {
    return std::make_unique<GemmWorkload>(spec.dims, config.batch_size, config.threads);
  }
  return spawn_external(spec, config, external_options_);
}

}  // namespace gdev
