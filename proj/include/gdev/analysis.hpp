#pragma once

// Scaling metrics derived from aggregated results: throughput curves,
// thread speedup, batch saturation, oversubscription cliffs and tail ratios.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gdev/measurement.hpp"

namespace gdev::analysis {

inline constexpr double kDefaultSaturationEpsilon = 0.01;
inline constexpr double kCliffThreshold = 0.10;

// Images per second: batch / (median_latency_ms / 1000).
double throughput(int batch, double median_latency_ms);

// (peak - value) / peak. Negative when value exceeds peak.
double degradation(double peak_ips, double value_ips);

struct ThroughputPoint {
  int batch = 0;
  double throughput_ips = 0.0;
  double median_latency_ms = 0.0;
};

struct ThroughputCurve {
  std::string model;
  int threads = 0;
  std::vector<ThroughputPoint> points;  // strictly increasing batch
};

// Collects every result for (model, threads) ordered by batch size.
// Throws UnknownModel when nothing matches.
ThroughputCurve throughput_curve(std::span<const AggregatedResult> results,
                                 const std::string& model, int threads);

struct SpeedupPoint {
  int threads = 0;
  double speedup = 0.0;
};

struct SpeedupCurve {
  std::string model;
  int batch = 0;
  std::vector<SpeedupPoint> points;  // increasing thread count, S(1) == 1
};

// S(t) = L(1 thread) / L(t threads). All results must share (model, batch).
SpeedupCurve speedup_curve(std::span<const AggregatedResult> results);

struct SaturationReport {
  std::optional<int> saturation_batch;  // empty: not saturated in range
  double threshold = kDefaultSaturationEpsilon;
  std::vector<double> gains;  // (P[i+1] - P[i]) / P[i]
};

// Smallest B_i whose next step gains strictly less than epsilon.
SaturationReport detect_saturation(const ThroughputCurve& curve,
                                   double epsilon = kDefaultSaturationEpsilon);

struct ThreadThroughput {
  int threads = 0;
  double throughput_ips = 0.0;
};

struct CliffReport {
  int peak_threads = 0;
  double peak_ips = 0.0;
  int trough_threads = 0;  // the largest tested thread count
  double trough_ips = 0.0;
  double degradation = 0.0;
  bool cliff = false;  // degradation > kCliffThreshold
};

// Peak is the argmax throughput (smallest thread count on ties); the trough
// is the throughput at the largest tested thread count.
CliffReport detect_cliff(std::span<const ThreadThroughput> points);
CliffReport detect_cliff(std::span<const AggregatedResult> results);

// Batch-direction analogue of detect_cliff at a fixed thread count: peak
// over the curve versus the largest tested batch.
struct BatchRegressionReport {
  int peak_batch = 0;
  double peak_ips = 0.0;
  int tail_batch = 0;
  double tail_ips = 0.0;
  double degradation = 0.0;
  bool regressed = false;  // degradation > kCliffThreshold
};

BatchRegressionReport detect_batch_regression(const ThroughputCurve& curve);

// Whole-grid view for one model: best (threads, batch) cell against the
// corner with the most threads and the largest batch.
struct GridCliffReport {
  std::string model;
  ConfigKey peak;
  double peak_ips = 0.0;
  ConfigKey corner;
  double corner_ips = 0.0;
  double degradation = 0.0;
  bool cliff = false;
};

GridCliffReport detect_grid_cliff(std::span<const AggregatedResult> results,
                                  const std::string& model);

// p99 / median; throws OrderViolation if p99 < median.
double tail_amplification(double median_ms, double p99_ms);

}  // namespace gdev::analysis
