#include "gdev/measurement.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "gdev/errors.hpp"

namespace gdev {

std::size_t SweepMatrix::unique_configurations() const noexcept {
  return models.size() * batch_sizes.size() * thread_counts.size();
}

std::size_t SweepMatrix::total_executions() const noexcept {
  if (repetitions < 1 || sweep_count < 1) return 0;
  return unique_configurations() * static_cast<std::size_t>(repetitions) *
         static_cast<std::size_t>(sweep_count);
}

namespace {

void check_positive_increasing(const std::vector<int>& values,
                               const char* what) {
  if (values.empty()) throw InvalidPlan(std::string("empty ") + what + " set");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 1) {
      throw InvalidPlan(std::string(what) + " set contains non-positive value " +
                        std::to_string(values[i]));
    }
    if (i > 0 && values[i] == values[i - 1]) {
      throw InvalidPlan(std::string(what) + " set contains duplicate " +
                        std::to_string(values[i]));
    }
    if (i > 0 && values[i] < values[i - 1]) {
      throw InvalidPlan(std::string(what) + " set not strictly increasing at " +
                        std::to_string(values[i - 1]) + ", " +
                        std::to_string(values[i]));
    }
  }
}

}  // namespace

SweepMatrix validate_matrix(const SweepMatrix& matrix) {
  if (matrix.models.empty()) throw InvalidPlan("empty model set");
  std::set<std::string> seen;
  for (const auto& m : matrix.models) {
    if (m.empty()) throw InvalidPlan("model set contains an empty identifier");
    if (!seen.insert(m).second) {
      throw InvalidPlan("model set contains duplicate " + m);
    }
  }
  check_positive_increasing(matrix.batch_sizes, "batch");
  check_positive_increasing(matrix.thread_counts, "thread");
  if (matrix.repetitions < 1) {
    throw InvalidPlan("repetitions must be >= 1, got " +
                      std::to_string(matrix.repetitions));
  }
  if (matrix.sweep_count < 1) {
    throw InvalidPlan("sweep_count must be >= 1, got " +
                      std::to_string(matrix.sweep_count));
  }
  if (matrix.warmup_iterations < 0) {
    throw InvalidPlan("warmup_iterations must be >= 0, got " +
                      std::to_string(matrix.warmup_iterations));
  }
  if (matrix.measure_iterations < 1) {
    throw InvalidPlan("measure_iterations must be >= 1, got " +
                      std::to_string(matrix.measure_iterations));
  }
  return matrix;
}

std::string to_string(const ConfigKey& key) {
  std::ostringstream os;
  os << key.model << " B=" << key.batch << " T=" << key.threads;
  return os.str();
}

void validate_config(const RunConfig& config) {
  if (config.model_id.empty()) throw InvalidPlan("config has empty model id");
  if (config.batch_size < 1) throw InvalidPlan("batch_size must be >= 1");
  if (config.threads < 1) throw InvalidPlan("threads must be >= 1");
  if (config.repetition_index < 1 || config.sweep_index < 1) {
    throw InvalidPlan("repetition and sweep indices are 1-based");
  }
  if (config.core_list) {
    std::set<int> ids;
    for (int id : *config.core_list) {
      if (id < 0) throw InvalidPlan("negative core id " + std::to_string(id));
      if (!ids.insert(id).second) {
        throw InvalidPlan("duplicate core id " + std::to_string(id));
      }
    }
  }
}

std::string describe(const RunConfig& config) {
  std::ostringstream os;
  os << to_string(config.key()) << " sweep=" << config.sweep_index
     << " rep=" << config.repetition_index;
  return os.str();
}

}  // namespace gdev
