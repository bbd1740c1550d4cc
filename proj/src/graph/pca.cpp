#include "gsan/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "gsan/errors.hpp"

namespace gsan {

namespace {

void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
  }
  if (v(arg) < 0.0) v = -v;
}

}  // namespace

PcaResult pca(const Matrix& x, int k) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (k < 0 || k > d) {
    throw DimensionError("pca: k=" + std::to_string(k) + " exceeds feature dimension " + std::to_string(d));
  }
  if (n == 0) throw DimensionError("pca: empty input");

  PcaResult out;
  out.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - out.mean.transpose();
  const double scale = 1.0 / static_cast<double>(n);
  out.components = Matrix::Zero(d, k);

  if (d <= n) {
    const Matrix cov = scale * (centered.transpose() * centered);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    // Ascending order from Eigen; flip to descending.
    out.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
    for (int c = 0; c < k; ++c) out.components.col(c) = solver.eigenvectors().col(d - 1 - c);
  } else {
    const Matrix gram = scale * (centered * centered.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    out.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
    for (int c = 0; c < k && c < n; ++c) {
      const double lambda = out.eigenvalues(c);
      if (lambda <= 1e-14 * std::max(1.0, out.eigenvalues(0))) continue;
      Vector v = centered.transpose() * solver.eigenvectors().col(n - 1 - c);
      out.components.col(c) = v / v.norm();
    }
  }

  for (int c = 0; c < k; ++c) {
    if (out.components.col(c).squaredNorm() > 0.0) fix_sign(out.components.col(c));
  }
  out.scores = centered * out.components;
  return out;
}

}  // namespace gsan
