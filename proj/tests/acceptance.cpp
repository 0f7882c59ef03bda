// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and time budgets are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdev/analysis.hpp"
#include "gdev/cli.hpp"
#include "gdev/external.hpp"
#include "gdev/gemm.hpp"
#include "gdev/manifest.hpp"
#include "gdev/report.hpp"
#include "gdev/roofline.hpp"
#include "gdev/stats.hpp"
#include "gdev/sweep.hpp"
#include "test_support.hpp"

using namespace gdev;
namespace fs = std::filesystem;

namespace {

constexpr double kStatsRelTol = 1e-9;
constexpr double kRatioTol = 0.05;
constexpr double kSpeedupTol = 0.01;
constexpr double kRidgeTol = 0.01;
constexpr double kPointTol = 0.001;  // 0.1 percentage point

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::fabs(got - want) <= tol)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: got %.6g, want %.6g +/- %g", what.c_str(), got, want, tol);
      failures.emplace_back(buf);
    }
  }
};

struct Criterion {
  std::string name;
  double budget_s;  // wall-clock limit, <= 0 for none
  std::function<void(Check&)> body;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ---- plan cardinality ------------------------------------------------------

void plan_cardinality(Check& c) {
  const auto dir = gdev::testing::source_dir() / "manifests";
  const auto legacy = plan_sweep(load_manifest(dir / "paper-legacy.json").matrix);
  c.expect(legacy.unique_configurations() == 40, "legacy unique != 40");
  c.expect(legacy.configs.size() == 1200, "legacy executions != 1200");
  const auto granite = plan_sweep(load_manifest(dir / "paper-granite.json").matrix);
  c.expect(granite.unique_configurations() == 120, "granite unique != 120");
  c.expect(granite.configs.size() == 3600, "granite executions != 3600");
}

// ---- statistics oracle -----------------------------------------------------

bool rel_close(double got, double want) {
  if (got == want) return true;
  return std::fabs(got - want) <= kStatsRelTol * std::max(std::fabs(want), 1e-300);
}

void statistics_oracle(Check& c) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> size(1, 500);
  std::uniform_real_distribution<double> pct(0.0005, 100.0);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = gdev::testing::random_samples(rng, size(rng));
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    const double want_median =
        n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    bool ok = rel_close(stats::median(v), want_median);

    for (double p : {pct(rng), 50.0, 99.0, 100.0}) {
      std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
      rank = std::clamp<std::size_t>(rank, 1, n);
      ok = ok && rel_close(stats::percentile(v, p), sorted[rank - 1]);
    }
    if (n >= 2) {
      long double mean = 0;
      for (double x : sorted) mean += x;
      mean /= n;
      long double ss = 0;
      for (double x : sorted) ss += (x - mean) * (x - mean);
      ok = ok && rel_close(stats::sample_stddev(v), static_cast<double>(std::sqrt(ss / (n - 1))));
    }
    if (!ok && ++bad <= 3) c.expect(false, "mismatch on trial " + std::to_string(trial));
  }
  c.expect(bad == 0, std::to_string(bad) + " of 1000 sets disagree with the oracle");
}

// ---- throughput identity ---------------------------------------------------

void throughput_identity(Check& c) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(0.01, 5000.0);
  std::uniform_int_distribution<int> batch(1, 512);
  std::vector<RunRecord> records;
  for (int i = 0; i < 2000; ++i) {
    RunRecord r;
    r.config = {"m", batch(rng), 1 + i % 8, 1, 1, std::nullopt};
    for (int k = 0; k < 5; ++k) r.measured_latencies_ms.push_back(lat(rng));
    records.push_back(r);
  }
  int bad = 0;
  for (const auto& a : stats::aggregate_all(records)) {
    const double lhs = a.throughput_ips * a.median_latency_ms;
    const double rhs = a.key.batch * 1000.0;
    const double ulp = std::nextafter(rhs, std::numeric_limits<double>::infinity()) - rhs;
    if (std::fabs(lhs - rhs) > ulp) ++bad;
  }
  c.expect(bad == 0, std::to_string(bad) + " aggregates break P*L = B*1000 by more than 1 ulp");

  // Ratios of reported throughputs, reproduced through the same arithmetic.
  auto ips_for = [](int b, double ips) { return analysis::throughput(b, b * 1000.0 / ips); };
  c.near(ips_for(8, 230.98) / ips_for(8, 7.33), 31.5, kRatioTol, "230.98/7.33");
  c.near(ips_for(16, 668.58) / ips_for(16, 20.08), 33.3, kRatioTol, "668.58/20.08");
}

// ---- speedup anchors -------------------------------------------------------

AggregatedResult at(const std::string& model, int batch, int threads, double median_ms) {
  AggregatedResult a;
  a.key = {model, batch, threads};
  a.median_latency_ms = a.p99_latency_ms = median_ms;
  a.throughput_ips = analysis::throughput(batch, median_ms);
  a.n_samples = 300;
  return a;
}

void speedup_anchors(Check& c) {
  const double base = 250.0;
  const std::vector<AggregatedResult> legacy{at("r50", 8, 1, base), at("r50", 8, 2, base / 1.9),
                                             at("r50", 8, 4, base / 3.28)};
  const auto lc = analysis::speedup_curve(legacy);
  c.expect(lc.points.front().threads == 1 && lc.points.front().speedup == 1.0, "legacy S(1) != 1");
  c.near(lc.points.back().speedup, 3.28, kSpeedupTol, "legacy S(4)");

  const std::vector<AggregatedResult> gnr{at("r50", 8, 48, base / 5.6), at("r50", 8, 1, base),
                                          at("r50", 8, 24, base / 12.37)};
  const auto gc = analysis::speedup_curve(gnr);
  c.expect(gc.points.size() == 3 && gc.points[0].speedup == 1.0, "granite S(1) != 1");
  c.near(gc.points[1].speedup, 12.37, kSpeedupTol, "granite S(24)");
  c.near(gc.points[2].speedup, 5.6, kSpeedupTol, "granite S(48)");
}

// ---- roofline table --------------------------------------------------------

void roofline_table(Check& c) {
  using roofline::Regime;
  const auto legacy = roofline::make_platform("legacy", 115, 32, 10ULL << 20);
  const auto gnr = roofline::make_platform("granite", 4000, 500, 144ULL << 20);
  c.near(legacy.ridge_oi(), 3.59, kRidgeTol, "legacy ridge");
  c.near(gnr.ridge_oi(), 8.00, kRidgeTol, "granite ridge");
  struct Row {
    double d;
    Regime legacy, gnr;
  };
  const Row rows[] = {{0.10, Regime::ComputeBound, Regime::ComputeBound},
                      {0.475, Regime::ComputeBound, Regime::Ridge},
                      {1.00, Regime::Ridge, Regime::MemoryBound},
                      {2.00, Regime::MemoryBound, Regime::MemoryBound},
                      {4.00, Regime::MemoryBound, Regime::MemoryBound}};
  int cells = 0;
  for (const auto& r : rows) {
    const roofline::WorkloadProfile p{3.8, r.d, 0};
    const auto vl = roofline::classify_regime(p, legacy, 0.10).regime;
    const auto vg = roofline::classify_regime(p, gnr, 0.10).regime;
    c.expect(vl == r.legacy, "legacy D=" + fmt("%g", r.d) + " -> " + std::string(to_string(vl)));
    c.expect(vg == r.gnr, "granite D=" + fmt("%g", r.d) + " -> " + std::string(to_string(vg)));
    cells += (vl == r.legacy) + (vg == r.gnr);
  }
  c.expect(cells == 10, std::to_string(cells) + "/10 cells reproduced");
}

// ---- cliff and saturation --------------------------------------------------

AggregatedResult with_ips(int batch, int threads, double ips) {
  return at("r50", batch, threads, batch * 1000.0 / ips);
}

void cliff_and_saturation(Check& c) {
  const std::vector<AggregatedResult> grid{with_ips(8, 1, 20.0),    with_ips(16, 1, 21.0),
                                           with_ips(8, 24, 230.98), with_ips(16, 24, 137.64),
                                           with_ips(8, 48, 116.24), with_ips(16, 48, 81.19)};
  std::vector<AggregatedResult> b8;
  std::copy_if(grid.begin(), grid.end(), std::back_inserter(b8),
               [](const auto& a) { return a.key.batch == 8; });
  const auto cliff = analysis::detect_cliff(b8);
  c.expect(cliff.peak_threads == 24 && cliff.trough_threads == 48, "cliff peak/trough threads");
  c.expect(cliff.cliff, "oversubscription not flagged");
  c.near(cliff.degradation, 0.497, kPointTol, "T=24 -> T=48 degradation");

  const auto curve = analysis::throughput_curve(grid, "r50", 24);
  const auto reg = analysis::detect_batch_regression(curve);
  c.expect(reg.peak_batch == 8 && reg.tail_batch == 16, "batch regression endpoints");
  c.near(reg.degradation, 0.404, kPointTol, "B=8 -> B=16 degradation");

  const auto g = analysis::detect_grid_cliff(grid, "r50");
  c.expect(g.peak == ConfigKey{"r50", 8, 24} && g.corner == ConfigKey{"r50", 16, 48},
           "grid peak/corner");
  c.near(g.degradation, 0.649, kPointTol, "combined trough degradation");

  std::vector<AggregatedResult> legacy;
  const int batches[] = {1, 2, 4, 8, 16};
  const double ips[] = {5.0, 9.8, 10.0, 10.01, 9.9};
  for (int i = 0; i < 5; ++i) legacy.push_back(with_ips(batches[i], 4, ips[i]));
  const auto sat = analysis::detect_saturation(analysis::throughput_curve(legacy, "r50", 4), 0.01);
  c.expect(sat.saturation_batch == 4, "saturation batch != 4");
}

// ---- GEMM correctness ------------------------------------------------------

void gemm_correctness(Check& c) {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> dim(1, 8), val(-9, 9), batch(1, 3), threads(1, 4);
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const GemmDims d{dim(rng), dim(rng), dim(rng)};
    GemmWorkload w(d, batch(rng), threads(rng));
    for (auto& x : w.weights()) x = static_cast<float>(val(rng));
    for (int img = 0; img < w.batch(); ++img) {
      for (auto& x : w.input(img)) x = static_cast<float>(val(rng));
    }
    w.iteration();
    const auto b = w.weights();
    for (int img = 0; img < w.batch() && bad == 0; ++img) {
      const auto a = w.input(img);
      const auto out = w.output(img);
      for (int i = 0; i < d.m; ++i) {
        for (int j = 0; j < d.n; ++j) {
          float sum = 0.0f;
          for (int p = 0; p < d.k; ++p) sum += a[i * d.k + p] * b[p * d.n + j];
          if (out[i * d.n + j] != sum) ++bad;
        }
      }
    }
  }
  c.expect(bad == 0, std::to_string(bad) + " mismatching elements");
  c.expect(flops_per_image({1240, 1240, 1240}) == 3'813'248'000ULL, "flops_per_image(1240^3)");
  c.near(flops_per_image({1240, 1240, 1240}) / 1e9, 3.813, 0.0005, "GFLOPs for 1240^3");
}

// ---- end-to-end desk run ---------------------------------------------------

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "gdev");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << err.str();
  return code;
}

void desk_run(Check& c) {
  gdev::testing::TempDir tmp;
  const auto dir = (tmp / "desk").string();
  const auto manifest = (gdev::testing::source_dir() / "manifests/desk-smoke.json").string();
  c.expect(cli({"-q", "--out", dir, "run", manifest}) == 0, "run failed");
  if (!c.failures.empty()) return;
  const auto raw = report::read_raw_csv(fs::path(dir) / "raw_latencies.csv");
  c.expect(raw.size() == 80, "raw rows = " + std::to_string(raw.size()) + ", want 80");
  const auto aggs = report::read_aggregates_csv(fs::path(dir) / "aggregates.csv");
  c.expect(aggs.size() == 4, "aggregate keys = " + std::to_string(aggs.size()) + ", want 4");
  std::string text;
  c.expect(cli({"analyze", dir}, &text) == 0, "analyze failed");
  c.expect(text.find("speedup model=gemm64") != std::string::npos, "analyze printed no speedup");
  c.expect(fs::exists(fs::path(dir) / "analysis.json"), "analysis.json missing");
  c.expect(cli({"report", dir}) == 0, "report failed");
  c.expect(fs::exists(fs::path(dir) / "plots" / "heatmap_gemm64.csv"), "heatmap missing");
}

// ---- protocol conformance --------------------------------------------------

WorkloadSpec mock(std::vector<std::string> extra) {
  std::vector<std::string> cmd{gdev::testing::mock_workload_path()};
  cmd.insert(cmd.end(), extra.begin(), extra.end());
  return WorkloadSpec::external("resnet50", std::move(cmd));
}

void protocol_conformance(Check& c) {
  const RunConfig config{"resnet50", 4, 2, 1, 1, std::nullopt};
  gdev::testing::TempDir tmp;
  const auto log = (tmp / "wire.jsonl").string();
  {
    auto w = spawn_external(mock({"--latency-ms", "3.25", "--log", log}), config);
    c.expect(w->run_iterations(5, Phase::Warmup).size() == 5, "warm-up count");
    const auto v = w->run_iterations(10, Phase::Measure);
    c.expect(v.size() == 10 && std::all_of(v.begin(), v.end(), [](double x) { return x == 3.25; }),
             "measured latencies");
    c.expect(w->shutdown() == 0, "child exit status");
  }
  std::ifstream in(log);
  std::vector<std::string> types;
  for (std::string line; std::getline(in, line);) {
    types.push_back(nlohmann::json::parse(line).at("type").get<std::string>());
  }
  c.expect(types == std::vector<std::string>{"init", "run", "run", "shutdown"},
           "wire sequence from the host side");

  auto expect_protocol_error = [&](const char* mode) {
    try {
      spawn_external(mock({"--mode", mode}), config)->run_iterations(8, Phase::Measure);
      c.expect(false, std::string(mode) + ": no error");
    } catch (const ProtocolError&) {
    } catch (const std::exception& e) {
      c.expect(false, std::string(mode) + ": wrong error " + e.what());
    }
  };
  expect_protocol_error("short-count");
  expect_protocol_error("unknown-type");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"plan cardinality (40/1200, 120/3600)", 1.0, plan_cardinality},
      {"statistics match brute-force oracle on 1000 sets", 10.0, statistics_oracle},
      {"throughput identity P*L = B*1000 and ratio checks", 1.0, throughput_identity},
      {"speedup anchors 3.28 / 12.37 / 5.6", 0.0, speedup_anchors},
      {"roofline ridges 3.59 / 8.00 and ten regime cells", 1.0, roofline_table},
      {"cliff 49.7% / 40.4% / 64.9% and saturation at B=4", 0.0, cliff_and_saturation},
      {"GEMM kernel equals naive oracle, flops(1240^3)", 0.0, gemm_correctness},
      {"end-to-end desk run, analyze and report", 60.0, desk_run},
      {"external protocol conformance with mock workload", 0.0, protocol_conformance},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.budget_s > 0 && secs > cr.budget_s) {
      check.failures.push_back("took " + fmt("%.2f", secs) + " s, budget " + fmt("%g", cr.budget_s) + " s");
    }
    const bool ok = check.failures.empty();
    failed += !ok;
    std::printf("[%s] %s (%.3f s)\n", ok ? "PASS" : "FAIL", cr.name.c_str(), secs);
    for (const auto& f : check.failures) std::printf("       %s\n", f.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
