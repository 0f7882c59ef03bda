#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gdev/affinity.hpp"
#include "gdev/measurement.hpp"
#include "gdev/roofline.hpp"
#include "gdev/workload.hpp"

namespace gdev {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct EnvironmentInfo {
  std::string host_name;
  int core_count = 0;
  std::string tool_version{kToolVersion};
  std::string affinity;  // applied mask, or "unpinned: <reason>"
};

EnvironmentInfo capture_environment();

struct RunManifest {
  std::string name;
  SweepMatrix matrix;
  std::map<std::string, WorkloadSpec> workloads;
  std::optional<AffinityMask> affinity;
  std::vector<roofline::PlatformRoofline> platforms;
  std::map<std::string, roofline::WorkloadProfile> profiles;
  double iteration_timeout_s = 600.0;
  std::string output_dir;
  EnvironmentInfo environment;

  // Explicit profile if given, else derived for builtin GEMM workloads.
  std::optional<roofline::WorkloadProfile> profile_for(const std::string& model) const;
};

// Throws ParseError (with line or field path) or ValidationError.
RunManifest load_manifest(const std::filesystem::path& path);
RunManifest parse_manifest(std::string_view text, const std::string& source = "<manifest>");
RunManifest manifest_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const RunManifest& manifest);

}  // namespace gdev
