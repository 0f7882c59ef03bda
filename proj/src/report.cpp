#include "gdev/report.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gdev/errors.hpp"
#include "gdev/stats.hpp"

namespace gdev::report {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::string sig6(double v) { return fmt(v, 6); }
std::string exact(double v) { return fmt(v, 17); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path,
                                               const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != expected_header) {
    throw ParseError(path.string() + ":1: unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  const auto width = split_csv_line(expected_header).size();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != width) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(width) + " columns");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw ParseError("bad integer '" + s + "'");
  return v;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw ParseError("bad number '" + s + "'");
  return v;
}

constexpr const char* kRawHeader = "model,batch,threads,sweep,repetition,iteration,latency_ms";
constexpr const char* kAggHeader =
    "model,batch,threads,median_ms,p99_ms,stddev_ms,throughput_ips,n_samples";

std::string aggregate_row(const AggregatedResult& a) {
  return csv_field(a.key.model) + ',' + std::to_string(a.key.batch) + ',' +
         std::to_string(a.key.threads) + ',' + exact(a.median_latency_ms) + ',' +
         exact(a.p99_latency_ms) + ',' + exact(a.stddev_ms) + ',' + exact(a.throughput_ips) +
         ',' + std::to_string(a.n_samples);
}

json key_json(const ConfigKey& k) {
  return {{"model", k.model}, {"batch", k.batch}, {"threads", k.threads}};
}

json aggregate_json(const AggregatedResult& a) {
  json j = key_json(a.key);
  j["median_ms"] = a.median_latency_ms;
  j["p99_ms"] = a.p99_latency_ms;
  j["stddev_ms"] = a.stddev_ms;
  j["throughput_ips"] = a.throughput_ips;
  j["n_samples"] = a.n_samples;
  return j;
}

// Ordered distinct models, taking the manifest order first.
std::vector<std::string> models_in(const std::vector<AggregatedResult>& aggregates,
                                   const RunManifest& manifest) {
  std::set<std::string> present;
  for (const auto& a : aggregates) present.insert(a.key.model);
  std::vector<std::string> out;
  for (const auto& m : manifest.matrix.models) {
    if (present.erase(m)) out.push_back(m);
  }
  out.insert(out.end(), present.begin(), present.end());
  return out;
}

template <class F>
std::vector<int> distinct_sorted(const std::vector<AggregatedResult>& aggregates,
                                 const std::string& model, F proj) {
  std::set<int> s;
  for (const auto& a : aggregates) {
    if (a.key.model == model) s.insert(proj(a.key));
  }
  return {s.begin(), s.end()};
}

std::vector<AggregatedResult> select(const std::vector<AggregatedResult>& aggregates,
                                     const std::string& model, std::optional<int> batch,
                                     std::optional<int> threads) {
  std::vector<AggregatedResult> out;
  for (const auto& a : aggregates) {
    if (a.key.model != model) continue;
    if (batch && a.key.batch != *batch) continue;
    if (threads && a.key.threads != *threads) continue;
    out.push_back(a);
  }
  return out;
}

}  // namespace

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

AnalysisReport analyze(const std::vector<AggregatedResult>& aggregates,
                       const RunManifest& manifest, const AnalysisOptions& options) {
  AnalysisReport rep;
  rep.options = options;
  for (const auto& model : models_in(aggregates, manifest)) {
    const auto threads = distinct_sorted(aggregates, model, [](auto& k) { return k.threads; });
    const auto batches = distinct_sorted(aggregates, model, [](auto& k) { return k.batch; });

    for (int t : threads) {
      auto curve = analysis::throughput_curve(aggregates, model, t);
      if (curve.points.size() >= 2) {
        rep.saturation.push_back({model, t, analysis::detect_saturation(curve, options.epsilon)});
        rep.batch_regressions.push_back({model, t, analysis::detect_batch_regression(curve)});
      }
      rep.throughput_curves.push_back(std::move(curve));
    }
    for (int b : batches) {
      const auto group = select(aggregates, model, b, std::nullopt);
      const bool has_baseline = std::any_of(group.begin(), group.end(),
                                            [](auto& a) { return a.key.threads == 1; });
      if (has_baseline) rep.speedup_curves.push_back(analysis::speedup_curve(group));
      if (group.size() >= 2) rep.cliffs.push_back({model, b, analysis::detect_cliff(group)});
    }
    rep.grid_cliffs.push_back(analysis::detect_grid_cliff(aggregates, model));

    if (const auto profile = manifest.profile_for(model)) {
      for (const auto& pl : manifest.platforms) {
        RooflineEntry e;
        e.model = model;
        e.platform = pl.name;
        e.verdict = roofline::classify_regime(*profile, pl, options.tau);
        e.attainable_gflops = roofline::attainable(e.verdict.oi, pl);
        e.memory_bound_threshold_gb =
            roofline::memory_bound_threshold(profile->flops_per_image_g, e.verdict.ridge_oi);
        if (profile->weights_bytes > 0 && pl.llc_bytes > 0) {
          e.residency = roofline::cache_residency(profile->weights_bytes, pl.llc_bytes);
        }
        rep.roofline.push_back(std::move(e));
      }
    }
  }
  for (const auto& a : aggregates) {
    rep.tails.push_back({a.key, analysis::tail_amplification(a.median_latency_ms, a.p99_latency_ms)});
  }
  return rep;
}

json to_json(const AnalysisReport& r) {
  json j;
  j["options"] = {{"epsilon", r.options.epsilon}, {"tau", r.options.tau}};
  j["throughput_curves"] = json::array();
  for (const auto& c : r.throughput_curves) {
    json pts = json::array();
    for (const auto& p : c.points) {
      pts.push_back({{"batch", p.batch},
                     {"throughput_ips", p.throughput_ips},
                     {"median_ms", p.median_latency_ms}});
    }
    j["throughput_curves"].push_back({{"model", c.model}, {"threads", c.threads}, {"points", pts}});
  }
  j["speedup_curves"] = json::array();
  for (const auto& c : r.speedup_curves) {
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back({{"threads", p.threads}, {"speedup", p.speedup}});
    j["speedup_curves"].push_back({{"model", c.model}, {"batch", c.batch}, {"points", pts}});
  }
  j["saturation"] = json::array();
  for (const auto& s : r.saturation) {
    j["saturation"].push_back(
        {{"model", s.model},
         {"threads", s.threads},
         {"saturation_batch", s.report.saturation_batch ? json(*s.report.saturation_batch)
                                                        : json(nullptr)},
         {"threshold", s.report.threshold},
         {"gains", s.report.gains}});
  }
  j["cliffs"] = json::array();
  for (const auto& c : r.cliffs) {
    j["cliffs"].push_back({{"model", c.model},
                           {"batch", c.batch},
                           {"peak_threads", c.report.peak_threads},
                           {"peak_ips", c.report.peak_ips},
                           {"trough_threads", c.report.trough_threads},
                           {"trough_ips", c.report.trough_ips},
                           {"degradation", c.report.degradation},
                           {"cliff", c.report.cliff}});
  }
  j["batch_regressions"] = json::array();
  for (const auto& b : r.batch_regressions) {
    j["batch_regressions"].push_back({{"model", b.model},
                                      {"threads", b.threads},
                                      {"peak_batch", b.report.peak_batch},
                                      {"peak_ips", b.report.peak_ips},
                                      {"tail_batch", b.report.tail_batch},
                                      {"tail_ips", b.report.tail_ips},
                                      {"degradation", b.report.degradation},
                                      {"regressed", b.report.regressed}});
  }
  j["grid_cliffs"] = json::array();
  for (const auto& g : r.grid_cliffs) {
    j["grid_cliffs"].push_back({{"model", g.model},
                                {"peak", key_json(g.peak)},
                                {"peak_ips", g.peak_ips},
                                {"corner", key_json(g.corner)},
                                {"corner_ips", g.corner_ips},
                                {"degradation", g.degradation},
                                {"cliff", g.cliff}});
  }
  j["tail_ratios"] = json::array();
  for (const auto& t : r.tails) {
    json e = key_json(t.key);
    e["p99_over_median"] = t.ratio;
    j["tail_ratios"].push_back(e);
  }
  j["roofline"] = json::array();
  for (const auto& e : r.roofline) {
    j["roofline"].push_back(
        {{"model", e.model},
         {"platform", e.platform},
         {"oi", e.verdict.oi},
         {"ridge_oi", e.verdict.ridge_oi},
         {"regime", std::string(roofline::to_string(e.verdict.regime))},
         {"tau", e.verdict.tau},
         {"attainable_gflops", e.attainable_gflops},
         {"memory_bound_threshold_gb", e.memory_bound_threshold_gb},
         {"residency", e.residency ? json(std::string(roofline::to_string(*e.residency)))
                                   : json(nullptr)}});
  }
  return j;
}

std::string format_text(const AnalysisReport& r) {
  std::ostringstream os;
  for (const auto& c : r.throughput_curves) {
    os << "throughput model=" << c.model << " threads=" << c.threads << ":";
    for (const auto& p : c.points) os << " B=" << p.batch << ":" << sig6(p.throughput_ips);
    os << " ips\n";
  }
  for (const auto& c : r.speedup_curves) {
    os << "speedup model=" << c.model << " batch=" << c.batch << ":";
    for (const auto& p : c.points) os << " T=" << p.threads << ":" << sig6(p.speedup);
    os << "\n";
  }
  for (const auto& s : r.saturation) {
    os << "saturation model=" << s.model << " threads=" << s.threads << " saturation_batch=";
    if (s.report.saturation_batch) {
      os << *s.report.saturation_batch;
    } else {
      os << "none (not saturated in tested range)";
    }
    os << " epsilon=" << sig6(s.report.threshold) << "\n";
  }
  for (const auto& c : r.cliffs) {
    os << "cliff model=" << c.model << " batch=" << c.batch
       << " peak_threads=" << c.report.peak_threads << " peak_ips=" << sig6(c.report.peak_ips)
       << " trough_threads=" << c.report.trough_threads
       << " trough_ips=" << sig6(c.report.trough_ips)
       << " degradation=" << sig6(c.report.degradation) << (c.report.cliff ? " CLIFF" : "")
       << "\n";
  }
  for (const auto& b : r.batch_regressions) {
    os << "batch-regression model=" << b.model << " threads=" << b.threads
       << " peak_batch=" << b.report.peak_batch << " tail_batch=" << b.report.tail_batch
       << " degradation=" << sig6(b.report.degradation)
       << (b.report.regressed ? " REGRESSED" : "") << "\n";
  }
  for (const auto& g : r.grid_cliffs) {
    os << "grid model=" << g.model << " peak=(T=" << g.peak.threads << ",B=" << g.peak.batch
       << ") " << sig6(g.peak_ips) << " corner=(T=" << g.corner.threads
       << ",B=" << g.corner.batch << ") " << sig6(g.corner_ips)
       << " degradation=" << sig6(g.degradation) << (g.cliff ? " CLIFF" : "") << "\n";
  }
  for (const auto& t : r.tails) {
    os << "tail " << to_string(t.key) << " p99/median=" << sig6(t.ratio) << "\n";
  }
  for (const auto& e : r.roofline) {
    os << "roofline model=" << e.model << " platform=" << e.platform
       << " oi=" << sig6(e.verdict.oi) << " ridge=" << sig6(e.verdict.ridge_oi)
       << " regime=" << roofline::to_string(e.verdict.regime)
       << " attainable_gflops=" << sig6(e.attainable_gflops);
    if (e.residency) os << " weights=" << roofline::to_string(*e.residency);
    os << "\n";
  }
  return os.str();
}

HeatmapMatrix heatmap(const std::vector<AggregatedResult>& aggregates,
                      const std::string& model, const SweepMatrix* matrix) {
  const bool present = std::any_of(aggregates.begin(), aggregates.end(),
                                   [&](const auto& a) { return a.key.model == model; });
  if (!present) throw UnknownModel("no aggregates for model " + model);
  HeatmapMatrix hm;
  hm.model = model;
  if (matrix != nullptr) {
    hm.threads = matrix->thread_counts;
    hm.batches = matrix->batch_sizes;
  } else {
    hm.threads = distinct_sorted(aggregates, model, [](auto& k) { return k.threads; });
    hm.batches = distinct_sorted(aggregates, model, [](auto& k) { return k.batch; });
  }
  hm.cells.assign(hm.threads.size(), std::vector<std::optional<double>>(hm.batches.size()));
  for (const auto& a : aggregates) {
    if (a.key.model != model) continue;
    const auto ti = std::find(hm.threads.begin(), hm.threads.end(), a.key.threads);
    const auto bi = std::find(hm.batches.begin(), hm.batches.end(), a.key.batch);
    if (ti == hm.threads.end() || bi == hm.batches.end()) continue;
    hm.cells[ti - hm.threads.begin()][bi - hm.batches.begin()] = a.throughput_ips;
  }
  return hm;
}

ResultFiles write_dataset(const Dataset& dataset,
                          const std::vector<AggregatedResult>& aggregates,
                          const RunManifest& manifest, const AnalysisReport& analysis,
                          const fs::path& dir) {
  if (dataset.records.empty()) throw EmptyInput("dataset is empty; nothing written");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  ResultFiles files{dir / "raw_latencies.csv", dir / "aggregates.csv",
                    dir / "aggregates_per_sweep.csv", dir / "results.json"};

  std::string raw = std::string(kRawHeader) + '\n';
  for (const auto& r : dataset.records) {
    const std::string prefix = csv_field(r.config.model_id) + ',' +
                               std::to_string(r.config.batch_size) + ',' +
                               std::to_string(r.config.threads) + ',' +
                               std::to_string(r.config.sweep_index) + ',' +
                               std::to_string(r.config.repetition_index) + ',';
    for (std::size_t i = 0; i < r.measured_latencies_ms.size(); ++i) {
      raw += prefix + std::to_string(i + 1) + ',' + sig6(r.measured_latencies_ms[i]) + '\n';
    }
  }

  std::string agg = std::string(kAggHeader) + '\n';
  for (const auto& a : aggregates) agg += aggregate_row(a) + '\n';

  std::string per_sweep = std::string("sweep,") + kAggHeader + '\n';
  for (const auto& s : stats::aggregate_per_sweep(dataset.records)) {
    per_sweep += std::to_string(s.sweep_index) + ',' + aggregate_row(s.result) + '\n';
  }

  json bundle;
  bundle["manifest"] = to_json(manifest);
  bundle["aggregates"] = json::array();
  for (const auto& a : aggregates) bundle["aggregates"].push_back(aggregate_json(a));
  bundle["failures"] = json::array();
  for (const auto& f : dataset.failures) {
    bundle["failures"].push_back({{"plan_index", f.plan_index},
                                  {"model", f.config.model_id},
                                  {"batch", f.config.batch_size},
                                  {"threads", f.config.threads},
                                  {"sweep", f.config.sweep_index},
                                  {"repetition", f.config.repetition_index},
                                  {"error", std::string(error_name(f.code))},
                                  {"message", f.message}});
  }
  bundle["counts"] = {{"records", dataset.records.size()},
                      {"failures", dataset.failures.size()}};
  bundle["analysis"] = to_json(analysis);

  write_atomic(files.raw_csv, raw);
  write_atomic(files.aggregates_csv, agg);
  write_atomic(files.per_sweep_csv, per_sweep);
  write_atomic(files.bundle_json, bundle.dump(2) + '\n');
  return files;
}

std::vector<RawRow> read_raw_csv(const fs::path& path) {
  std::vector<RawRow> out;
  for (const auto& row : read_csv(path, kRawHeader)) {
    out.push_back({{row[0], to_int(row[1]), to_int(row[2])},
                   to_int(row[3]),
                   to_int(row[4]),
                   to_int(row[5]),
                   to_double(row[6])});
  }
  return out;
}

std::vector<AggregatedResult> read_aggregates_csv(const fs::path& path) {
  std::vector<AggregatedResult> out;
  for (const auto& row : read_csv(path, kAggHeader)) {
    AggregatedResult a;
    a.key = {row[0], to_int(row[1]), to_int(row[2])};
    a.median_latency_ms = to_double(row[3]);
    a.p99_latency_ms = to_double(row[4]);
    a.stddev_ms = to_double(row[5]);
    a.throughput_ips = to_double(row[6]);
    a.n_samples = std::stoull(row[7]);
    out.push_back(std::move(a));
  }
  return out;
}

ResultsDirectory load_results(const fs::path& dir) {
  const fs::path bundle_path = dir / "results.json";
  std::ifstream in(bundle_path);
  if (!in) throw IoError("cannot open " + bundle_path.string());
  json bundle;
  try {
    in >> bundle;
  } catch (const json::parse_error& e) {
    throw ParseError(bundle_path.string() + ": " + e.what());
  }
  if (!bundle.contains("manifest")) throw ParseError(bundle_path.string() + ": no manifest");

  ResultsDirectory res;
  res.manifest = manifest_from_json(bundle["manifest"]);
  res.aggregates = read_aggregates_csv(dir / "aggregates.csv");
  for (const auto& f : bundle.value("failures", json::array())) {
    FailedConfig fc;
    fc.plan_index = f.at("plan_index").get<std::size_t>();
    fc.config.model_id = f.at("model").get<std::string>();
    fc.config.batch_size = f.at("batch").get<int>();
    fc.config.threads = f.at("threads").get<int>();
    fc.config.sweep_index = f.at("sweep").get<int>();
    fc.config.repetition_index = f.at("repetition").get<int>();
    fc.message = f.value("message", std::string{});
    res.failures.push_back(std::move(fc));
  }
  return res;
}

std::vector<fs::path> write_plot_data(const ResultsDirectory& results, const fs::path& out_dir,
                                      const AnalysisOptions& options) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw IoError("cannot create plot directory " + out_dir.string());
  }
  const auto& aggs = results.aggregates;
  const auto rep = analyze(aggs, results.manifest, options);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_atomic(out_dir / name, content);
    written.push_back(out_dir / name);
  };

  std::string tvb = "model,threads,batch,throughput_ips,median_ms\n";
  std::string lvb = "model,threads,batch,median_ms,p99_ms\n";
  for (const auto& c : rep.throughput_curves) {
    for (const auto& p : c.points) {
      tvb += csv_field(c.model) + ',' + std::to_string(c.threads) + ',' +
             std::to_string(p.batch) + ',' + exact(p.throughput_ips) + ',' +
             exact(p.median_latency_ms) + '\n';
    }
  }
  // Latency rows in curve order so both files line up.
  for (const auto& c : rep.throughput_curves) {
    for (const auto& p : c.points) {
      for (const auto& a : aggs) {
        if (a.key == ConfigKey{c.model, p.batch, c.threads}) {
          lvb += csv_field(c.model) + ',' + std::to_string(c.threads) + ',' +
                 std::to_string(p.batch) + ',' + exact(a.median_latency_ms) + ',' +
                 exact(a.p99_latency_ms) + '\n';
        }
      }
    }
  }
  std::string svt = "model,batch,threads,speedup\n";
  for (const auto& c : rep.speedup_curves) {
    for (const auto& p : c.points) {
      svt += csv_field(c.model) + ',' + std::to_string(c.batch) + ',' +
             std::to_string(p.threads) + ',' + exact(p.speedup) + '\n';
    }
  }
  std::string mvp = "model,batch,threads,median_ms,p99_ms,tail_ratio\n";
  for (const auto& a : aggs) {
    mvp += csv_field(a.key.model) + ',' + std::to_string(a.key.batch) + ',' +
           std::to_string(a.key.threads) + ',' + exact(a.median_latency_ms) + ',' +
           exact(a.p99_latency_ms) + ',' +
           exact(analysis::tail_amplification(a.median_latency_ms, a.p99_latency_ms)) + '\n';
  }
  emit("throughput_vs_batch.csv", tvb);
  emit("latency_vs_batch.csv", lvb);
  emit("speedup_vs_threads.csv", svt);
  emit("median_vs_p99.csv", mvp);

  json plots = to_json(rep);
  plots["heatmaps"] = json::array();
  for (const auto& model : models_in(aggs, results.manifest)) {
    const auto hm = heatmap(aggs, model, &results.manifest.matrix);
    std::string csv = "threads\\batch";
    for (int b : hm.batches) csv += ',' + std::to_string(b);
    csv += '\n';
    json cells = json::array();
    for (std::size_t i = 0; i < hm.threads.size(); ++i) {
      csv += std::to_string(hm.threads[i]);
      json row = json::array();
      for (const auto& cell : hm.cells[i]) {
        csv += ',';
        if (cell) csv += exact(*cell);
        row.push_back(cell ? json(*cell) : json(nullptr));
      }
      csv += '\n';
      cells.push_back(row);
    }
    std::string safe = model;
    for (char& ch : safe) {
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
    }
    emit("heatmap_" + safe + ".csv", csv);
    plots["heatmaps"].push_back(
        {{"model", model}, {"threads", hm.threads}, {"batches", hm.batches}, {"cells", cells}});
  }
  emit("plots.json", plots.dump(2) + '\n');
  return written;
}

}  // namespace gdev::report
