#include "gdev/roofline.hpp"

#include <algorithm>
#include <cmath>

#include "gdev/errors.hpp"

namespace gdev::roofline {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw NonpositiveInput(std::string(what) + " must be positive, got " +
                           std::to_string(v));
  }
}

}  // namespace

double PlatformRoofline::ridge_oi() const { return ridge_point(pmax_gflops, bmax_gbps); }

PlatformRoofline make_platform(std::string name, double pmax_gflops,
                               double bmax_gbps, std::uint64_t llc_bytes) {
  require_positive(pmax_gflops, "pmax_gflops");
  require_positive(bmax_gbps, "bmax_gbps");
  return {std::move(name), pmax_gflops, bmax_gbps, llc_bytes};
}

double WorkloadProfile::operational_intensity() const {
  require_positive(flops_per_image_g, "flops_per_image");
  require_positive(data_moved_per_image_gb, "data_moved_per_image");
  return flops_per_image_g / data_moved_per_image_gb;
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::MemoryBound: return "memory-bound";
    case Regime::Ridge: return "ridge";
    case Regime::ComputeBound: return "compute-bound";
  }
  return "unknown";
}

std::string_view to_string(Residency residency) noexcept {
  return residency == Residency::Resident ? "resident" : "streaming";
}

double ridge_point(double pmax_gflops, double bmax_gbps) {
  require_positive(pmax_gflops, "pmax_gflops");
  require_positive(bmax_gbps, "bmax_gbps");
  return pmax_gflops / bmax_gbps;
}

double attainable(double oi, const PlatformRoofline& platform) {
  if (!(oi > 0.0)) throw NonpositiveInput("operational intensity must be positive");
  require_positive(platform.pmax_gflops, "pmax_gflops");
  require_positive(platform.bmax_gbps, "bmax_gbps");
  if (std::isinf(oi)) return platform.pmax_gflops;
  return std::min(platform.pmax_gflops, oi * platform.bmax_gbps);
}

RegimeVerdict classify_regime(const WorkloadProfile& profile,
                              const PlatformRoofline& platform, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) {
    throw NonpositiveInput("ridge band must lie in [0, 1), got " + std::to_string(tau));
  }
  RegimeVerdict v;
  v.oi = profile.operational_intensity();
  v.ridge_oi = platform.ridge_oi();
  v.tau = tau;
  if (v.oi < v.ridge_oi * (1.0 - tau)) {
    v.regime = Regime::MemoryBound;
  } else if (v.oi > v.ridge_oi * (1.0 + tau)) {
    v.regime = Regime::ComputeBound;
  } else {
    v.regime = Regime::Ridge;
  }
  return v;
}

double memory_bound_threshold(double flops_per_image_g, double ridge_oi) {
  require_positive(flops_per_image_g, "flops_per_image");
  require_positive(ridge_oi, "ridge_oi");
  return flops_per_image_g / ridge_oi;
}

Residency cache_residency(std::uint64_t weights_bytes, std::uint64_t llc_bytes) {
  return weights_bytes <= llc_bytes ? Residency::Resident : Residency::Streaming;
}

WorkloadProfile gemm_profile(int m, int k, int n, int element_bytes) {
  if (m < 1 || k < 1 || n < 1 || element_bytes < 1) {
    throw NonpositiveInput("GEMM dimensions must be positive");
  }
  const double mm = m, kk = k, nn = n;
  WorkloadProfile p;
  p.flops_per_image_g = 2.0 * mm * kk * nn / 1e9;
  p.data_moved_per_image_gb = element_bytes * (mm * kk + kk * nn + mm * nn) / 1e9;
  p.weights_bytes = static_cast<std::uint64_t>(element_bytes) *
                    static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n);
  return p;
}

}  // namespace gdev::roofline
