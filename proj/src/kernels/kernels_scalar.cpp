#include "gsan/kernels.hpp"

#include <algorithm>

namespace gsan::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

MinMaxSums minmax_sums_scalar(const double* a, const double* b, std::size_t n) noexcept {
  MinMaxSums out;
  for (std::size_t i = 0; i < n; ++i) {
    const double pa = std::max(a[i], 0.0);
    const double pb = std::max(b[i], 0.0);
    out.min_sum += std::min(pa, pb);
    out.max_sum += std::max(pa, pb);
  }
  return out;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::Scalar, &dot_scalar, &sum_scalar, &minmax_sums_scalar};
}  // namespace detail

}  // namespace gsan::kernels
