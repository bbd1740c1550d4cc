#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gsan/kernels.hpp"

using namespace gsan::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

double loop_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

}  // namespace

TEST(Kernels, ScalarMatchesLoops) {
  std::mt19937_64 rng(1);
  const auto& k = table(Isa::Scalar);
  for (std::size_t n : {0u, 1u, 3u, 8u, 17u, 100u}) {
    auto a = random_vec(n, rng);
    auto b = random_vec(n, rng);
    EXPECT_NEAR(k.dot(a.data(), b.data(), n), loop_dot(a, b), 1e-12);
    double mn = 0, mx = 0, s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::max(a[i], 0.0), y = std::max(b[i], 0.0);
      mn += std::min(x, y);
      mx += std::max(x, y);
      s += a[i];
    }
    auto mm = k.minmax_sums(a.data(), b.data(), n);
    EXPECT_NEAR(mm.min_sum, mn, 1e-12);
    EXPECT_NEAR(mm.max_sum, mx, 1e-12);
    EXPECT_NEAR(k.sum(a.data(), n), s, 1e-12);
  }
}

TEST(Kernels, VectorVariantsAgreeWithScalar) {
  std::mt19937_64 rng(2);
  const auto& ref = table(Isa::Scalar);
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (!supported(isa)) continue;
    const auto& k = table(isa);
    EXPECT_EQ(k.isa, isa);
    for (std::size_t n = 0; n < 70; ++n) {
      auto a = random_vec(n, rng);
      auto b = random_vec(n, rng);
      const double tol = 1e-12 * (1.0 + static_cast<double>(n));
      EXPECT_NEAR(k.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), tol) << name(isa) << " n=" << n;
      EXPECT_NEAR(k.sum(a.data(), n), ref.sum(a.data(), n), tol);
      auto m1 = k.minmax_sums(a.data(), b.data(), n);
      auto m0 = ref.minmax_sums(a.data(), b.data(), n);
      EXPECT_NEAR(m1.min_sum, m0.min_sum, tol);
      EXPECT_NEAR(m1.max_sum, m0.max_sum, tol);
    }
  }
}

TEST(Kernels, UnalignedOffsets) {
  std::mt19937_64 rng(3);
  auto a = random_vec(53, rng);
  auto b = random_vec(53, rng);
  const auto& ref = table(Isa::Scalar);
  const auto& k = active();
  for (std::size_t off = 0; off < 4; ++off) {
    const std::size_t n = a.size() - off;
    EXPECT_NEAR(k.dot(a.data() + off, b.data() + off, n), ref.dot(a.data() + off, b.data() + off, n), 1e-11);
  }
}

TEST(Kernels, UnsupportedIsaThrows) {
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (!supported(isa)) EXPECT_ANY_THROW(table(isa));
  }
  EXPECT_TRUE(supported(Isa::Scalar));
  EXPECT_EQ(name(Isa::Scalar), "scalar");
}
