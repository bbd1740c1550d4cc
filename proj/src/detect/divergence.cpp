#include "gsan/divergence.hpp"

#include <cmath>

#include "gsan/errors.hpp"
#include "gsan/kernels.hpp"
#include "gsan/linear_gnn.hpp"

namespace gsan {

Matrix soft_class_prob(const Matrix& logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidTemperature("temperature must be positive and finite");
  }
  return row_softmax(logits / temperature);
}

namespace {

Matrix floored_log(const Matrix& s) {
  return s.cwiseMax(kProbFloor).array().log().matrix();
}

// Σ_j A_ij B_ij for every row i, with A symmetric so row i of A is column i.
Vector masked_rowsum(const Matrix& a, const Matrix& b) {
  const Matrix bt = b.transpose();
  const auto& k = kernels::active();
  const auto n = static_cast<std::size_t>(a.rows());
  Vector out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) out(i) = k.dot(a.col(i).data(), bt.col(i).data(), n);
  return out;
}

}  // namespace

Matrix pairwise_kl(const Matrix& s) {
  const Matrix logs = floored_log(s);
  const Matrix cross = s * logs.transpose();  // (i,j) = Σ_c S_ic ln S_jc
  Matrix kl = (-cross).colwise() + cross.diagonal();
  kl.diagonal().setZero();
  return kl;
}

Proximity proximity_metrics(const Matrix& div, const Matrix& adjacency) {
  const Vector d = adjacency.rowwise().sum();
  const Vector s1 = masked_rowsum(adjacency, div);
  const Vector s2 = masked_rowsum(adjacency, adjacency * div);
  Proximity p;
  p.prox1 = Vector::Zero(d.size());
  p.prox2 = Vector::Zero(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) > 0.0) p.prox1(i) = s1(i) / d(i);
    if (d(i) > 1.0) p.prox2(i) = s2(i) / (d(i) * (d(i) - 1.0));
  }
  return p;
}

Vector js_divergence(const Matrix& s, const Matrix& adjacency) {
  const Eigen::Index n = s.rows();
  const Vector d = adjacency.rowwise().sum();
  const Matrix logs = floored_log(s);
  Vector out = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(d(i) > 0.0)) continue;
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) == 0.0) continue;
      double js = 0.0;
      for (Eigen::Index c = 0; c < s.cols(); ++c) {
        const double m = 0.5 * (s(i, c) + s(j, c));
        const double lm = std::log(std::max(m, kProbFloor));
        js += 0.5 * s(i, c) * (logs(i, c) - lm) + 0.5 * s(j, c) * (logs(j, c) - lm);
      }
      total += adjacency(i, j) * js;
    }
    out(i) = total / d(i);
  }
  return out;
}

}  // namespace gsan
