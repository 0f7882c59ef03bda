#include "gdev/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "gdev/errors.hpp"

namespace gdev::analysis {

double throughput(int batch, double median_latency_ms) {
  if (!(median_latency_ms > 0.0) || !std::isfinite(median_latency_ms)) {
    throw NonpositiveLatency("median latency must be positive, got " +
                             std::to_string(median_latency_ms));
  }
  // B·1000 is exact for any int batch, leaving a single rounding in the quotient.
  return static_cast<double>(batch) * 1000.0 / median_latency_ms;
}

double degradation(double peak_ips, double value_ips) {
  if (!(peak_ips > 0.0)) throw NonpositiveInput("peak throughput must be positive");
  return (peak_ips - value_ips) / peak_ips;
}

ThroughputCurve throughput_curve(std::span<const AggregatedResult> results,
                                 const std::string& model, int threads) {
  ThroughputCurve curve{model, threads, {}};
  for (const auto& r : results) {
    if (r.key.model == model && r.key.threads == threads) {
      curve.points.push_back({r.key.batch, r.throughput_ips, r.median_latency_ms});
    }
  }
  if (curve.points.empty()) {
    throw UnknownModel("no results for " + model + " T=" + std::to_string(threads));
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const auto& a, const auto& b) { return a.batch < b.batch; });
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (curve.points[i].batch == curve.points[i - 1].batch) {
      throw KeyMismatch("duplicate batch " + std::to_string(curve.points[i].batch) +
                        " in throughput curve");
    }
  }
  return curve;
}

SpeedupCurve speedup_curve(std::span<const AggregatedResult> results) {
  if (results.empty()) throw MissingBaseline("no results for speedup curve");
  const auto& first = results.front().key;
  std::vector<const AggregatedResult*> sorted;
  const AggregatedResult* baseline = nullptr;
  for (const auto& r : results) {
    if (r.key.model != first.model || r.key.batch != first.batch) {
      throw KeyMismatch("speedup curve mixes " + to_string(first) + " and " +
                        to_string(r.key));
    }
    if (r.key.threads == 1) baseline = &r;
    sorted.push_back(&r);
  }
  if (baseline == nullptr) {
    throw MissingBaseline("no single-thread result for " + first.model +
                          " B=" + std::to_string(first.batch));
  }
  std::sort(sorted.begin(), sorted.end(),
            [](auto* a, auto* b) { return a->key.threads < b->key.threads; });

  SpeedupCurve curve{first.model, first.batch, {}};
  for (const auto* r : sorted) {
    if (!(r->median_latency_ms > 0.0)) {
      throw NonpositiveLatency("non-positive median for " + to_string(r->key));
    }
    const double s = r == baseline
                         ? 1.0
                         : baseline->median_latency_ms / r->median_latency_ms;
    curve.points.push_back({r->key.threads, s});
  }
  return curve;
}

SaturationReport detect_saturation(const ThroughputCurve& curve, double epsilon) {
  SaturationReport report;
  report.threshold = epsilon;
  const auto& pts = curve.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double gain = (pts[i + 1].throughput_ips - pts[i].throughput_ips) /
                        pts[i].throughput_ips;
    report.gains.push_back(gain);
    if (!report.saturation_batch && gain < epsilon) {
      report.saturation_batch = pts[i].batch;
    }
  }
  return report;
}

CliffReport detect_cliff(std::span<const ThreadThroughput> points) {
  if (points.empty()) throw EmptyInput("no thread points for cliff detection");
  std::vector<ThreadThroughput> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.threads < b.threads; });

  CliffReport report;
  auto peak = sorted.front();
  for (const auto& p : sorted) {
    if (p.throughput_ips > peak.throughput_ips) peak = p;
  }
  report.peak_threads = peak.threads;
  report.peak_ips = peak.throughput_ips;
  report.trough_threads = sorted.back().threads;
  report.trough_ips = sorted.back().throughput_ips;
  report.degradation = degradation(report.peak_ips, report.trough_ips);
  report.cliff = report.degradation > kCliffThreshold;
  return report;
}

CliffReport detect_cliff(std::span<const AggregatedResult> results) {
  std::vector<ThreadThroughput> points;
  for (const auto& r : results) {
    if (r.key.model != results.front().key.model ||
        r.key.batch != results.front().key.batch) {
      throw KeyMismatch("cliff detection mixes " + to_string(results.front().key) +
                        " and " + to_string(r.key));
    }
    points.push_back({r.key.threads, r.throughput_ips});
  }
  return detect_cliff(points);
}

BatchRegressionReport detect_batch_regression(const ThroughputCurve& curve) {
  if (curve.points.empty()) throw EmptyInput("empty throughput curve");
  BatchRegressionReport report;
  auto peak = curve.points.front();
  for (const auto& p : curve.points) {
    if (p.throughput_ips > peak.throughput_ips) peak = p;
  }
  report.peak_batch = peak.batch;
  report.peak_ips = peak.throughput_ips;
  report.tail_batch = curve.points.back().batch;
  report.tail_ips = curve.points.back().throughput_ips;
  report.degradation = degradation(report.peak_ips, report.tail_ips);
  report.regressed = report.degradation > kCliffThreshold;
  return report;
}

GridCliffReport detect_grid_cliff(std::span<const AggregatedResult> results,
                                  const std::string& model) {
  GridCliffReport report;
  report.model = model;
  const AggregatedResult* peak = nullptr;
  const AggregatedResult* corner = nullptr;
  for (const auto& r : results) {
    if (r.key.model != model) continue;
    // Ties go to fewer threads, then smaller batch.
    if (peak == nullptr || r.throughput_ips > peak->throughput_ips ||
        (r.throughput_ips == peak->throughput_ips &&
         std::pair(r.key.threads, r.key.batch) <
             std::pair(peak->key.threads, peak->key.batch))) {
      peak = &r;
    }
    if (corner == nullptr || std::pair(r.key.threads, r.key.batch) >
                                 std::pair(corner->key.threads, corner->key.batch)) {
      corner = &r;
    }
  }
  if (peak == nullptr) throw UnknownModel("no results for model " + model);
  report.peak = peak->key;
  report.peak_ips = peak->throughput_ips;
  report.corner = corner->key;
  report.corner_ips = corner->throughput_ips;
  report.degradation = degradation(report.peak_ips, report.corner_ips);
  report.cliff = report.degradation > kCliffThreshold;
  return report;
}

double tail_amplification(double median_ms, double p99_ms) {
  if (!(median_ms > 0.0)) throw NonpositiveLatency("median must be positive");
  if (p99_ms < median_ms) {
    throw OrderViolation("p99 " + std::to_string(p99_ms) + " below median " +
                         std::to_string(median_ms));
  }
  return p99_ms / median_ms;
}

}  // namespace gdev::analysis
