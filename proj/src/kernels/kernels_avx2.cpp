// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include "gsan/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>

namespace gsan::kernels {
namespace {

inline double hsum(__m256d v) noexcept {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* x, const double* y, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_avx2(const double* x, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

MinMaxSums minmax_sums_avx2(const double* a, const double* b, std::size_t n) noexcept {
  const __m256d zero = _mm256_setzero_pd();
  __m256d lo = zero;
  __m256d hi = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pa = _mm256_max_pd(_mm256_loadu_pd(a + i), zero);
    const __m256d pb = _mm256_max_pd(_mm256_loadu_pd(b + i), zero);
    lo = _mm256_add_pd(lo, _mm256_min_pd(pa, pb));
    hi = _mm256_add_pd(hi, _mm256_max_pd(pa, pb));
  }
  MinMaxSums out{hsum(lo), hsum(hi)};
  for (; i < n; ++i) {
    const double pa = std::max(a[i], 0.0);
    const double pb = std::max(b[i], 0.0);
    out.min_sum += std::min(pa, pb);
    out.max_sum += std::max(pa, pb);
  }
  return out;
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::Avx2, &dot_avx2, &sum_avx2, &minmax_sums_avx2};
}  // namespace detail

}  // namespace gsan::kernels

#endif
