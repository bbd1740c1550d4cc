#pragma once

// Data-parallel reductions used by the divergence features, the
// meta-gradient degree pullback and the Jaccard pruner.
//
// Every kernel has a scalar reference implementation; AVX2 (x86-64,
// selected at runtime from CPUID) and NEON (aarch64) variants must agree
// with it up to summation-order rounding. The active table is chosen once
// per process; set GSAN_KERNELS=scalar|avx2|neon to override.

#include <cstddef>
#include <span>
#include <string_view>

namespace gsan::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct MinMaxSums {
  double min_sum = 0.0;  // sum_i min(max(a_i,0), max(b_i,0))
  double max_sum = 0.0;  // sum_i max(max(a_i,0), max(b_i,0))
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* x, const double* y, std::size_t n) noexcept;
  double (*sum)(const double* x, std::size_t n) noexcept;
  MinMaxSums (*minmax_sums)(const double* a, const double* b, std::size_t n) noexcept;
};

bool supported(Isa isa) noexcept;
std::string_view name(Isa isa) noexcept;

// Table for a specific ISA; throws InvalidArgument if the CPU lacks it.
const KernelTable& table(Isa isa);

// The dispatched table (best supported ISA unless overridden).
const KernelTable& active() noexcept;

inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return active().dot(x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline double sum(std::span<const double> x) noexcept {
  return active().sum(x.data(), x.size());
}

inline MinMaxSums minmax_sums(std::span<const double> a, std::span<const double> b) noexcept {
  return active().minmax_sums(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

namespace detail {
extern const KernelTable kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace gsan::kernels
