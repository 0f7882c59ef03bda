#include "gdev/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gdev/analysis.hpp"
#include "gdev/errors.hpp"

namespace gdev::stats {

namespace {

std::vector<double> sorted_copy(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("sample set is empty");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw EmptyInput("sample set contains a non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

}  // namespace

double median(std::span<const double> values) {
  const auto sorted = sorted_copy(values);
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

double percentile(std::span<const double> values, double p) {
  if (!(p > 0.0 && p <= 100.0)) {
    throw InvalidPercentile("percentile must lie in (0, 100], got " + std::to_string(p));
  }
  const auto sorted = sorted_copy(values);
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double mean(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("sample set is empty");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) {
    throw InsufficientSamples("sample standard deviation needs n >= 2, got " +
                              std::to_string(values.size()));
  }
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

AggregatedResult aggregate(std::span<const RunRecord> records) {
  if (records.empty()) throw EmptyInput("no records to aggregate");
  const ConfigKey key = records.front().config.key();
  std::vector<double> pooled;
  for (const auto& r : records) {
    if (r.config.key() != key) {
      throw KeyMismatch("record " + to_string(r.config.key()) +
                        " does not match " + to_string(key));
    }
    pooled.insert(pooled.end(), r.measured_latencies_ms.begin(),
                  r.measured_latencies_ms.end());
  }
  if (pooled.empty()) throw EmptyInput("records carry no measured latencies");

  AggregatedResult out;
  out.key = key;
  out.median_latency_ms = median(pooled);
  out.p99_latency_ms = percentile(pooled, 99.0);
  out.stddev_ms = pooled.size() >= 2 ? sample_stddev(pooled) : 0.0;
  out.throughput_ips = analysis::throughput(key.batch, out.median_latency_ms);
  out.n_samples = pooled.size();
  return out;
}

std::vector<AggregatedResult> aggregate_all(std::span<const RunRecord> records) {
  std::vector<ConfigKey> order;
  std::map<ConfigKey, std::vector<RunRecord>> groups;
  for (const auto& r : records) {
    auto [it, inserted] = groups.try_emplace(r.config.key());
    if (inserted) order.push_back(r.config.key());
    it->second.push_back(r);
  }
  std::vector<AggregatedResult> out;
  out.reserve(order.size());
  for (const auto& key : order) out.push_back(aggregate(groups.at(key)));
  return out;
}

std::vector<SweepAggregate> aggregate_per_sweep(std::span<const RunRecord> records) {
  using SweepKey = std::pair<int, ConfigKey>;
  std::vector<SweepKey> order;
  std::map<SweepKey, std::vector<RunRecord>> groups;
  for (const auto& r : records) {
    SweepKey k{r.config.sweep_index, r.config.key()};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(r);
  }
  std::vector<SweepAggregate> out;
  out.reserve(order.size());
  for (const auto& k : order) out.push_back({k.first, aggregate(groups.at(k))});
  return out;
}

}  // namespace gdev::stats
