#pragma once

// Back-of-the-envelope roofline estimator. Platform and workload numbers
// are user-supplied inputs, never measured here.
//
// Units: compute in GFLOP/s, bandwidth in GB/s, per-image work in GFLOPs,
// per-image traffic in GB, so operational intensity is FLOPs/byte.

#include <cstdint>
#include <string>
#include <string_view>

namespace gdev::roofline {

inline constexpr double kDefaultRidgeBand = 0.10;

struct PlatformRoofline {
  std::string name;
  double pmax_gflops = 0.0;
  double bmax_gbps = 0.0;
  std::uint64_t llc_bytes = 0;

  double ridge_oi() const;
};

PlatformRoofline make_platform(std::string name, double pmax_gflops,
                               double bmax_gbps, std::uint64_t llc_bytes = 0);

struct WorkloadProfile {
  double flops_per_image_g = 0.0;        // F
  double data_moved_per_image_gb = 0.0;  // D
  std::uint64_t weights_bytes = 0;

  double operational_intensity() const;  // F / D
};

enum class Regime { MemoryBound, Ridge, ComputeBound };
std::string_view to_string(Regime regime) noexcept;

struct RegimeVerdict {
  double oi = 0.0;
  double ridge_oi = 0.0;
  Regime regime = Regime::Ridge;
  double tau = kDefaultRidgeBand;
};

double ridge_point(double pmax_gflops, double bmax_gbps);

// min(pmax, oi * bmax)
double attainable(double oi, const PlatformRoofline& platform);

// Memory-bound below OI*(1 - tau), compute-bound above OI*(1 + tau), ridge
// in between (inclusive).
RegimeVerdict classify_regime(const WorkloadProfile& profile,
                              const PlatformRoofline& platform,
                              double tau = kDefaultRidgeBand);

// Per-image traffic (GB) above which the workload drops below the ridge.
double memory_bound_threshold(double flops_per_image_g, double ridge_oi);

enum class Residency { Resident, Streaming };
std::string_view to_string(Residency residency) noexcept;

Residency cache_residency(std::uint64_t weights_bytes, std::uint64_t llc_bytes);

// Profile for the built-in m x k x n FP32 GEMM: 2mkn FLOPs and the
// compulsory traffic of reading A and B and writing C once. B plays the
// role of the weights.
WorkloadProfile gemm_profile(int m, int k, int n, int element_bytes = 4);

}  // namespace gdev::roofline
