#include "gdev/gemm.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <new>
#include <random>
#include <thread>

#include "gdev/errors.hpp"

#ifdef __linux__
#include <unistd.h>
#endif

namespace gdev {

namespace {

constexpr int kRowBlock = 32;
constexpr int kDepthBlock = 256;
constexpr int kColBlock = 512;

std::uint64_t physical_memory_bytes() {
#ifdef __linux__
  const long pages = sysconf(_SC_PHYS_PAGES);
  const long page = sysconf(_SC_PAGE_SIZE);
  if (pages > 0 && page > 0) {
    return static_cast<std::uint64_t>(pages) * static_cast<std::uint64_t>(page);
  }
#endif
  return std::numeric_limits<std::uint64_t>::max();
}

std::size_t checked_product(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    throw AllocationFailure("GEMM operand size overflows");
  }
  return static_cast<std::size_t>(a * b);
}

}  // namespace

std::uint64_t flops_per_image(const GemmDims& dims) noexcept {
  return 2ULL * static_cast<std::uint64_t>(dims.m) *
         static_cast<std::uint64_t>(dims.k) * static_cast<std::uint64_t>(dims.n);
}

void gemm_rows(std::span<const float> a, std::span<const float> b,
               std::span<float> c, const GemmDims& dims, int row_begin,
               int row_end) {
  const int k = dims.k;
  const int n = dims.n;
  std::fill(c.begin() + static_cast<std::ptrdiff_t>(row_begin) * n,
            c.begin() + static_cast<std::ptrdiff_t>(row_end) * n, 0.0f);
  for (int kk = 0; kk < k; kk += kDepthBlock) {
    const int k_end = std::min(k, kk + kDepthBlock);
    for (int jj = 0; jj < n; jj += kColBlock) {
      const int j_end = std::min(n, jj + kColBlock);
      for (int i = row_begin; i < row_end; ++i) {
        const float* a_row = a.data() + static_cast<std::ptrdiff_t>(i) * k;
        float* c_row = c.data() + static_cast<std::ptrdiff_t>(i) * n;
        for (int p = kk; p < k_end; ++p) {
          const float a_ip = a_row[p];
          const float* b_row = b.data() + static_cast<std::ptrdiff_t>(p) * n;
          for (int j = jj; j < j_end; ++j) c_row[j] += a_ip * b_row[j];
        }
      }
    }
  }
}

GemmWorkload::GemmWorkload(GemmDims dims, int batch, int threads)
    : dims_(dims), batch_(batch), threads_(threads) {
  if (dims.m < 1 || dims.k < 1 || dims.n < 1) {
    throw InvalidWorkload("GEMM dimensions must be >= 1");
  }
  if (batch < 1 || threads < 1) throw InvalidWorkload("batch and threads must be >= 1");

  const std::size_t a_elems = checked_product(checked_product(batch, dims.m), dims.k);
  const std::size_t b_elems = checked_product(dims.k, dims.n);
  const std::size_t c_elems = checked_product(checked_product(batch, dims.m), dims.n);
  const std::uint64_t bytes =
      (static_cast<std::uint64_t>(a_elems) + b_elems + c_elems) * sizeof(float);
  if (bytes > physical_memory_bytes()) {
    throw AllocationFailure("GEMM working set of " + std::to_string(bytes) +
                            " bytes exceeds physical memory");
  }
  try {
    a_.resize(a_elems);
    b_.resize(b_elems);
    c_.resize(c_elems);
  } catch (const std::bad_alloc&) {
    throw AllocationFailure("cannot allocate GEMM working set of " +
                            std::to_string(bytes) + " bytes");
  }
  std::mt19937 rng(0x5eed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (auto& v : a_) v = dist(rng);
  for (auto& v : b_) v = dist(rng);
}

std::span<float> GemmWorkload::input(int image) {
  const std::size_t len = static_cast<std::size_t>(dims_.m) * dims_.k;
  return std::span<float>(a_).subspan(static_cast<std::size_t>(image) * len, len);
}

std::span<const float> GemmWorkload::output(int image) const {
  const std::size_t len = static_cast<std::size_t>(dims_.m) * dims_.n;
  return std::span<const float>(c_).subspan(static_cast<std::size_t>(image) * len, len);
}

double GemmWorkload::iteration() {
  // Work units are (image, row block) pairs dealt out in contiguous ranges.
  const int blocks_per_image = (dims_.m + kRowBlock - 1) / kRowBlock;
  const long total_units = static_cast<long>(blocks_per_image) * batch_;
  const std::size_t a_len = static_cast<std::size_t>(dims_.m) * dims_.k;
  const std::size_t c_len = static_cast<std::size_t>(dims_.m) * dims_.n;

  auto work = [&](long begin, long end) {
    for (long u = begin; u < end; ++u) {
      const int image = static_cast<int>(u / blocks_per_image);
      const int block = static_cast<int>(u % blocks_per_image);
      const int row_begin = block * kRowBlock;
      const int row_end = std::min(dims_.m, row_begin + kRowBlock);
      gemm_rows(std::span<const float>(a_).subspan(image * a_len, a_len), b_,
                std::span<float>(c_).subspan(image * c_len, c_len), dims_,
                row_begin, row_end);
    }
  };

  const auto start = std::chrono::steady_clock::now();
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads_);
    for (int t = 0; t < threads_; ++t) {
      const long begin = total_units * t / threads_;
      const long end = total_units * (t + 1) / threads_;
      workers.emplace_back(work, begin, end);
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

std::vector<double> GemmWorkload::run_iterations(std::size_t n, Phase) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(iteration());
  return out;
}

double gemm_iteration(const WorkloadSpec& spec, int batch, int threads) {
  spec.validate();
  if (spec.kind != WorkloadSpec::Kind::BuiltinGemm) {
    throw InvalidWorkload("gemm_iteration needs a builtin-gemm spec");
  }
  GemmWorkload w(spec.dims, batch, threads);
  return w.iteration();
}

}  // namespace gdev
