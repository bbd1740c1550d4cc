#include "gsan/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>

namespace gsan::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_neon(const double* x, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(x + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(x + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

MinMaxSums minmax_sums_neon(const double* a, const double* b, std::size_t n) noexcept {
  const float64x2_t zero = vdupq_n_f64(0.0);
  float64x2_t lo = zero;
  float64x2_t hi = zero;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t pa = vmaxq_f64(vld1q_f64(a + i), zero);
    const float64x2_t pb = vmaxq_f64(vld1q_f64(b + i), zero);
    lo = vaddq_f64(lo, vminq_f64(pa, pb));
    hi = vaddq_f64(hi, vmaxq_f64(pa, pb));
  }
  MinMaxSums out{vaddvq_f64(lo), vaddvq_f64(hi)};
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
const KernelTable kNeonTable{Isa::Neon, &dot_neon, &sum_neon, &minmax_sums_neon};
}  // namespace detail

}  // namespace gsan::kernels

#endif
