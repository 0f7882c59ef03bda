#pragma once

// Built-in FP32 GEMM workload. One "image" is one m x k by k x n multiply;
// a forward pass of batch B runs B independent multiplies against a shared
// k x n operand (the "weights") split across a fixed number of workers.

#include <cstdint>
#include <span>
#include <vector>

#include "gdev/workload.hpp"

namespace gdev {

// 2 * m * k * n
std::uint64_t flops_per_image(const GemmDims& dims) noexcept;

// C[rows] = A[rows] * B for row-major operands, rows in [row_begin, row_end).
void gemm_rows(std::span<const float> a, std::span<const float> b,
               std::span<float> c, const GemmDims& dims, int row_begin,
               int row_end);

class GemmWorkload : public Workload {
 public:
  // Allocates all operands once; throws AllocationFailure when the working
  // set cannot be held in memory.
  GemmWorkload(GemmDims dims, int batch, int threads);

  // One forward pass; returns wall-clock milliseconds.
  double iteration();

  std::vector<double> run_iterations(std::size_t n, Phase phase) override;

  const GemmDims& dims() const { return dims_; }
  int batch() const { return batch_; }
  int threads() const { return threads_; }
  std::uint64_t flops_per_image() const { return gdev::flops_per_image(dims_); }

  std::span<float> input(int image);
  std::span<float> weights() { return b_; }
  std::span<const float> output(int image) const;

 private:
  GemmDims dims_;
  int batch_;
  int threads_;
  std::vector<float> a_;
  std::vector<float> b_;
  std::vector<float> c_;
};

// Convenience: prepare a workload for `spec` and time a single pass.
double gemm_iteration(const WorkloadSpec& spec, int batch, int threads);

}  // namespace gdev
