#pragma once

#include <span>
#include <vector>

#include "gdev/measurement.hpp"

namespace gdev::stats {

// Middle order statistic; mean of the two central ones for even n.
double median(std::span<const double> values);

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
// p must lie in (0, 100].
double percentile(std::span<const double> values, double p);

// Bessel-corrected (n - 1) standard deviation. Requires n >= 2.
double sample_stddev(std::span<const double> values);

double mean(std::span<const double> values);

// Pools the measured latencies of every record (all sharing one key) into a
// single sample set. Warm-up latencies are ignored. A single pooled sample
// reports stddev 0.
AggregatedResult aggregate(std::span<const RunRecord> records);

// Groups records by key and aggregates each group. Output order follows the
// first appearance of each key in `records`.
std::vector<AggregatedResult> aggregate_all(std::span<const RunRecord> records);

struct SweepAggregate {
  int sweep_index = 1;
  AggregatedResult result;
};

// Same as aggregate_all but additionally split by sweep index.
std::vector<SweepAggregate> aggregate_per_sweep(std::span<const RunRecord> records);

}  // namespace gdev::stats
