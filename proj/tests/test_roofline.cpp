#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "gdev/errors.hpp"
#include "gdev/roofline.hpp"

using namespace gdev;
using namespace gdev::roofline;

namespace {

const PlatformRoofline kLegacy = make_platform("legacy", 115, 32, 10ULL << 20);
const PlatformRoofline kGranite = make_platform("granite", 4000, 500, 144ULL << 20);

WorkloadProfile resnet50(double data_gb) { return {3.8, data_gb, 100'000'000}; }

}  // namespace

TEST(RidgePoint, Examples) {
  EXPECT_NEAR(ridge_point(115, 32), 3.59, 0.005);
  EXPECT_EQ(ridge_point(4000, 500), 8.0);
  EXPECT_EQ(ridge_point(7.5, 7.5), 1.0);
  EXPECT_THROW(ridge_point(0, 1), NonpositiveInput);
  EXPECT_THROW(ridge_point(1, -1), NonpositiveInput);
}

TEST(Attainable, Examples) {
  EXPECT_NEAR(attainable(1.9, kLegacy), 60.8, 1e-9);
  EXPECT_EQ(attainable(std::numeric_limits<double>::infinity(), kLegacy), 115.0);
  EXPECT_EQ(attainable(1e12, kLegacy), 115.0);
  EXPECT_EQ(attainable(kGranite.ridge_oi(), kGranite), 4000.0);
  EXPECT_THROW(attainable(0.0, kLegacy), NonpositiveInput);
}

TEST(Attainable, MonotoneAndContinuous) {
  double prev = 0.0;
  for (double oi = 0.01; oi < 40.0; oi += 0.01) {
    const double p = attainable(oi, kLegacy);
    EXPECT_GE(p, prev);
    EXPECT_LE(p - prev, 0.01 * kLegacy.bmax_gbps + 1e-9);
    prev = p;
  }
}

TEST(Attainable, RidgeRecoversCrossover) {
  // Where the memory slope meets the compute roof.
  const auto ridge = ridge_point(kGranite.pmax_gflops, kGranite.bmax_gbps);
  EXPECT_DOUBLE_EQ(ridge * kGranite.bmax_gbps, kGranite.pmax_gflops);
  EXPECT_LT(attainable(ridge * 0.999, kGranite), kGranite.pmax_gflops);
}

TEST(ClassifyRegime, TableRows) {
  struct Row {
    double d;
    Regime legacy;
    Regime granite;
  };
  const Row rows[] = {
      {0.10, Regime::ComputeBound, Regime::ComputeBound},
      {0.475, Regime::ComputeBound, Regime::Ridge},
      {0.47, Regime::ComputeBound, Regime::Ridge},
      {1.00, Regime::Ridge, Regime::MemoryBound},
      {2.00, Regime::MemoryBound, Regime::MemoryBound},
      {4.00, Regime::MemoryBound, Regime::MemoryBound},
  };
  for (const auto& r : rows) {
    EXPECT_EQ(classify_regime(resnet50(r.d), kLegacy).regime, r.legacy) << "D=" << r.d;
    EXPECT_EQ(classify_regime(resnet50(r.d), kGranite).regime, r.granite) << "D=" << r.d;
  }
  const auto v = classify_regime(resnet50(1.0), kLegacy);
  EXPECT_DOUBLE_EQ(v.oi, 3.8);
  EXPECT_EQ(v.tau, 0.10);
}

TEST(ClassifyRegime, ScaleInvariant) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> f(0.1, 10.0), d(0.01, 5.0), k(0.001, 1000.0);
  for (int i = 0; i < 1000; ++i) {
    const WorkloadProfile p{f(rng), d(rng), 0};
    const double s = k(rng);
    const WorkloadProfile q{p.flops_per_image_g * s, p.data_moved_per_image_gb * s, 0};
    // Skip cases sitting within rounding of a band edge.
    const double oi = p.operational_intensity();
    const double ridge = kLegacy.ridge_oi();
    if (std::abs(oi - ridge * 0.9) < 1e-9 || std::abs(oi - ridge * 1.1) < 1e-9) continue;
    EXPECT_EQ(classify_regime(p, kLegacy).regime, classify_regime(q, kLegacy).regime);
  }
}

TEST(ClassifyRegime, Errors) {
  EXPECT_THROW(classify_regime({3.8, 0.0, 0}, kLegacy), NonpositiveInput);
  EXPECT_THROW(classify_regime({0.0, 1.0, 0}, kLegacy), NonpositiveInput);
}

TEST(MemoryBoundThreshold, Examples) {
  EXPECT_NEAR(memory_bound_threshold(3.8, 3.6), 1.056, 0.001);
  EXPECT_NEAR(memory_bound_threshold(3.8, 8.0), 0.475, 1e-12);
  EXPECT_EQ(memory_bound_threshold(2.5, 1.0), 2.5);
  EXPECT_THROW(memory_bound_threshold(3.8, 0.0), NonpositiveInput);
}

TEST(CacheResidency, Examples) {
  EXPECT_EQ(cache_residency(100'000'000, 10'000'000), Residency::Streaming);
  EXPECT_EQ(cache_residency(100'000'000, 144'000'000), Residency::Resident);
  EXPECT_EQ(cache_residency(4096, 4096), Residency::Resident);
}

TEST(GemmProfile, FlopsAndTraffic) {
  const auto p = gemm_profile(1240, 1240, 1240);
  EXPECT_NEAR(p.flops_per_image_g, 3.813248, 1e-9);
  EXPECT_NEAR(p.data_moved_per_image_gb, 4.0 * 3 * 1240.0 * 1240 / 1e9, 1e-12);
  EXPECT_EQ(p.weights_bytes, 4ULL * 1240 * 1240);
}
