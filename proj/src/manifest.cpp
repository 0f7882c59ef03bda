#include "gdev/manifest.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "gdev/errors.hpp"

namespace gdev {

using nlohmann::json;

namespace {

// Field accessors that report the JSON path of whatever went wrong.
const json& field(const json& obj, const std::string& path, const char* name) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw ParseError((path.empty() ? "" : path + ".") + name + ": missing required field");
  }
  return *it;
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path + ": expected a string");
  return v.get<std::string>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ParseError(path + ": integer out of range");
  }
  return static_cast<int>(x);
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  return v.get<double>();
}

std::vector<int> get_int_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(get_int(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

SweepMatrix parse_matrix(const json& m) {
  const std::string p = "matrix";
  SweepMatrix matrix;
  const auto& models = field(m, p, "models");
  if (!models.is_array()) throw ParseError(p + ".models: expected an array");
  for (std::size_t i = 0; i < models.size(); ++i) {
    matrix.models.push_back(get_string(models[i], p + ".models[" + std::to_string(i) + "]"));
  }
  matrix.batch_sizes = get_int_list(field(m, p, "batch_sizes"), p + ".batch_sizes");
  matrix.thread_counts = get_int_list(field(m, p, "thread_counts"), p + ".thread_counts");
  matrix.repetitions = get_int(field(m, p, "repetitions"), p + ".repetitions");
  matrix.sweep_count = get_int(field(m, p, "sweep_count"), p + ".sweep_count");
  if (m.contains("warmup_iterations")) {
    matrix.warmup_iterations = get_int(m["warmup_iterations"], p + ".warmup_iterations");
  }
  if (m.contains("measure_iterations")) {
    matrix.measure_iterations = get_int(m["measure_iterations"], p + ".measure_iterations");
  }
  return matrix;
}

WorkloadSpec parse_workload(const std::string& model, const json& w) {
  const std::string p = "workloads." + model;
  const auto kind = get_string(field(w, p, "kind"), p + ".kind");
  if (kind == "builtin-gemm") {
    GemmDims dims{get_int(field(w, p, "m"), p + ".m"), get_int(field(w, p, "k"), p + ".k"),
                  get_int(field(w, p, "n"), p + ".n")};
    auto spec = WorkloadSpec::builtin(model, dims);
    if (w.contains("element_bytes")) {
      spec.element_bytes = get_int(w["element_bytes"], p + ".element_bytes");
    }
    return spec;
  }
  if (kind == "external") {
    const auto& cmd = field(w, p, "command");
    if (!cmd.is_array()) throw ParseError(p + ".command: expected an array of strings");
    std::vector<std::string> argv;
    for (std::size_t i = 0; i < cmd.size(); ++i) {
      argv.push_back(get_string(cmd[i], p + ".command[" + std::to_string(i) + "]"));
    }
    return WorkloadSpec::external(model, std::move(argv));
  }
  throw ParseError(p + ".kind: unknown workload kind '" + kind + "'");
}

AffinityMask parse_affinity(const json& v) {
  try {
    if (v.is_string()) return AffinityMask::parse(v.get<std::string>());
    return AffinityMask{get_int_list(v, "affinity")};
  } catch (const InvalidCore& e) {
    throw ParseError(std::string("affinity: ") + e.what());
  }
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

void validate(RunManifest& manifest) {
  try {
    manifest.matrix = validate_matrix(manifest.matrix);
  } catch (const InvalidPlan& e) {
    throw ValidationError(std::string("matrix: ") + e.what());
  }
  for (const auto& model : manifest.matrix.models) {
    if (!manifest.workloads.count(model)) {
      throw ValidationError("model '" + model + "' has no workload definition");
    }
  }
  for (const auto& [model, spec] : manifest.workloads) {
    try {
      spec.validate();
    } catch (const InvalidWorkload& e) {
      throw ValidationError("workloads." + model + ": " + e.what());
    }
  }
  if (manifest.affinity) {
    auto& ids = manifest.affinity->core_ids;
    std::sort(ids.begin(), ids.end());
    if (ids.empty() || ids.front() < 0 || std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw ValidationError("affinity: core ids must be unique and non-negative");
    }
  }
  for (const auto& pl : manifest.platforms) {
    if (!(pl.pmax_gflops > 0.0) || !(pl.bmax_gbps > 0.0)) {
      throw ValidationError("platform '" + pl.name + "': pmax and bmax must be positive");
    }
  }
  for (const auto& [model, prof] : manifest.profiles) {
    if (!(prof.flops_per_image_g > 0.0) || !(prof.data_moved_per_image_gb > 0.0)) {
      throw ValidationError("profiles." + model + ": F and D must be positive");
    }
  }
  if (!(manifest.iteration_timeout_s > 0.0)) {
    throw ValidationError("iteration_timeout_s must be positive");
  }
}

}  // namespace

std::optional<roofline::WorkloadProfile> RunManifest::profile_for(const std::string& model) const {
  if (auto it = profiles.find(model); it != profiles.end()) return it->second;
  if (auto it = workloads.find(model);
      it != workloads.end() && it->second.kind == WorkloadSpec::Kind::BuiltinGemm) {
    const auto& d = it->second.dims;
    return roofline::gemm_profile(d.m, d.k, d.n, it->second.element_bytes);
  }
  return std::nullopt;
}

EnvironmentInfo capture_environment() {
  EnvironmentInfo env;
  char host[256] = {};
  if (gethostname(host, sizeof(host) - 1) == 0) env.host_name = host;
  env.core_count = static_cast<int>(std::thread::hardware_concurrency());
  return env;
}

RunManifest manifest_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("manifest root must be an object");
  RunManifest manifest;
  if (doc.contains("name")) manifest.name = get_string(doc["name"], "name");
  manifest.matrix = parse_matrix(field(doc, "", "matrix"));

  const auto& workloads = field(doc, "", "workloads");
  if (!workloads.is_object()) throw ParseError("workloads: expected an object");
  for (const auto& [model, w] : workloads.items()) {
    manifest.workloads.emplace(model, parse_workload(model, w));
  }
  if (doc.contains("affinity") && !doc["affinity"].is_null()) {
    manifest.affinity = parse_affinity(doc["affinity"]);
  }
  if (doc.contains("platforms")) {
    const auto& pls = doc["platforms"];
    if (!pls.is_array()) throw ParseError("platforms: expected an array");
    for (std::size_t i = 0; i < pls.size(); ++i) {
      const std::string p = "platforms[" + std::to_string(i) + "]";
      roofline::PlatformRoofline pl;
      pl.name = get_string(field(pls[i], p, "name"), p + ".name");
      pl.pmax_gflops = get_number(field(pls[i], p, "pmax_gflops"), p + ".pmax_gflops");
      pl.bmax_gbps = get_number(field(pls[i], p, "bmax_gbps"), p + ".bmax_gbps");
      if (pls[i].contains("llc_bytes")) {
        pl.llc_bytes = static_cast<std::uint64_t>(get_number(pls[i]["llc_bytes"], p + ".llc_bytes"));
      }
      manifest.platforms.push_back(std::move(pl));
    }
  }
  if (doc.contains("profiles")) {
    const auto& prs = doc["profiles"];
    if (!prs.is_object()) throw ParseError("profiles: expected an object");
    for (const auto& [model, pr] : prs.items()) {
      const std::string p = "profiles." + model;
      roofline::WorkloadProfile prof;
      prof.flops_per_image_g =
          get_number(field(pr, p, "flops_per_image_g"), p + ".flops_per_image_g");
      prof.data_moved_per_image_gb =
          get_number(field(pr, p, "data_moved_per_image_gb"), p + ".data_moved_per_image_gb");
      if (pr.contains("weights_bytes")) {
        prof.weights_bytes =
            static_cast<std::uint64_t>(get_number(pr["weights_bytes"], p + ".weights_bytes"));
      }
      manifest.profiles.emplace(model, prof);
    }
  }
  if (doc.contains("iteration_timeout_s")) {
    manifest.iteration_timeout_s = get_number(doc["iteration_timeout_s"], "iteration_timeout_s");
  }
  if (doc.contains("output_dir")) manifest.output_dir = get_string(doc["output_dir"], "output_dir");
  if (doc.contains("environment") && doc["environment"].is_object()) {
    const auto& e = doc["environment"];
    manifest.environment.host_name = e.value("host_name", std::string{});
    manifest.environment.core_count = e.value("core_count", 0);
    manifest.environment.tool_version = e.value("tool_version", std::string(kToolVersion));
    manifest.environment.affinity = e.value("affinity", std::string{});
  }
  validate(manifest);
  return manifest;
}

RunManifest parse_manifest(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":" + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  try {
    return manifest_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(source + ": " + e.what());
  }
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open manifest");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.string());
}

json to_json(const RunManifest& m) {
  json doc;
  doc["name"] = m.name;
  doc["matrix"] = {{"models", m.matrix.models},
                   {"batch_sizes", m.matrix.batch_sizes},
                   {"thread_counts", m.matrix.thread_counts},
                   {"repetitions", m.matrix.repetitions},
                   {"sweep_count", m.matrix.sweep_count},
                   {"warmup_iterations", m.matrix.warmup_iterations},
                   {"measure_iterations", m.matrix.measure_iterations}};
  doc["workloads"] = json::object();
  for (const auto& [model, w] : m.workloads) {
    if (w.kind == WorkloadSpec::Kind::BuiltinGemm) {
      doc["workloads"][model] = {{"kind", "builtin-gemm"},
                                 {"m", w.dims.m},
                                 {"k", w.dims.k},
                                 {"n", w.dims.n},
                                 {"element_bytes", w.element_bytes}};
    } else {
      doc["workloads"][model] = {{"kind", "external"}, {"command", w.command}};
    }
  }
  doc["affinity"] = m.affinity ? json(m.affinity->to_string()) : json(nullptr);
  doc["platforms"] = json::array();
  for (const auto& pl : m.platforms) {
    doc["platforms"].push_back({{"name", pl.name},
                                {"pmax_gflops", pl.pmax_gflops},
                                {"bmax_gbps", pl.bmax_gbps},
                                {"llc_bytes", pl.llc_bytes}});
  }
  doc["profiles"] = json::object();
  for (const auto& [model, pr] : m.profiles) {
    doc["profiles"][model] = {{"flops_per_image_g", pr.flops_per_image_g},
                              {"data_moved_per_image_gb", pr.data_moved_per_image_gb},
                              {"weights_bytes", pr.weights_bytes}};
  }
  doc["iteration_timeout_s"] = m.iteration_timeout_s;
  doc["output_dir"] = m.output_dir;
  doc["environment"] = {{"host_name", m.environment.host_name},
                        {"core_count", m.environment.core_count},
                        {"tool_version", m.environment.tool_version},
                        {"affinity", m.environment.affinity}};
  return doc;
}

}  // namespace gdev
