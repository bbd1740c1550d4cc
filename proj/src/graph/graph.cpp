#include "gsan/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsan/errors.hpp"

namespace gsan {

Edge::Edge(int a, int b) {
  if (a == b) throw InvalidArgument("self-loop (" + std::to_string(a) + "," + std::to_string(b) + ")");
  if (a < 0 || b < 0) throw InvalidArgument("negative node index");
  u = std::min(a, b);
  v = std::max(a, b);
}

void check_edges(const EdgeSet& edges, int n) {
  for (const Edge& e : edges) {
    if (e.v >= n) {
      throw InvalidArgument("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") out of range for n=" + std::to_string(n));
    }
  }
}

std::size_t intersection_size(const EdgeSet& a, const EdgeSet& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

EdgeSet set_union(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

EdgeSet set_intersection(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

void check_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw ConsistencyError("adjacency is not square");
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (a(j, j) != 0.0) throw ConsistencyError("adjacency has a self-loop at " + std::to_string(j));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = a(i, j);
      if (x != 0.0 && x != 1.0) throw ConsistencyError("adjacency entry is not 0/1");
      if (x != a(j, i)) throw ConsistencyError("adjacency is not symmetric");
    }
  }
}

namespace {

std::vector<Edge> extract_edges(const Matrix& a) {
  std::vector<Edge> out;
  const int n = static_cast<int>(a.rows());
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (a(u, v) != 0.0) out.emplace_back(u, v);
    }
  }
  return out;
}

void check_split(const Split& s, int n) {
  if (s.train.empty()) throw ConsistencyError("split: train set is empty");
  if (s.val.empty()) throw ConsistencyError("split: val set is empty");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (int i : *part) {
      if (i < 0 || i >= n) throw ConsistencyError("split: node " + std::to_string(i) + " out of range");
      if (seen[static_cast<std::size_t>(i)]) {
        throw ConsistencyError("split: node " + std::to_string(i) + " appears twice");
      }
      seen[static_cast<std::size_t>(i)] = 1;
    }
  }
}

}  // namespace

GraphBundle::GraphBundle(Matrix adjacency, std::optional<Matrix> features,
                         std::optional<std::vector<int>> labels, int num_classes, Split split)
    : adjacency_(std::move(adjacency)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      split_(std::move(split)) {
  check_adjacency(adjacency_);
  const int nn = n();
  if (num_classes_ < 1) throw ConsistencyError("num_classes must be >= 1");
  if (features_ && features_->rows() != nn) {
    throw ConsistencyError("features have " + std::to_string(features_->rows()) + " rows, expected " +
                           std::to_string(nn));
  }
  if (features_ && !features_->allFinite()) throw ConsistencyError("features contain non-finite values");
  if (labels_) {
    if (static_cast<int>(labels_->size()) != nn) throw ConsistencyError("labels length differs from n");
    for (int y : *labels_) {
      if (y < 0 || y >= num_classes_) throw ConsistencyError("label " + std::to_string(y) + " out of range");
    }
  }
  check_split(split_, nn);
  edge_list_ = extract_edges(adjacency_);
}

const Matrix& GraphBundle::features() const {
  if (!features_) throw MissingFeatures("bundle has no node features");
  return *features_;
}

const std::vector<int>& GraphBundle::labels() const {
  if (!labels_) throw InvalidArgument("bundle has no labels");
  return *labels_;
}

GraphBundle GraphBundle::with_adjacency(Matrix adjacency) const {
  return GraphBundle(std::move(adjacency), features_, labels_, num_classes_, split_);
}

Matrix GraphBundle::model_features() const {
  if (features_) return *features_;
  return Matrix::Identity(n(), n());
}

bool operator==(const GraphBundle& a, const GraphBundle& b) {
  if (a.n() != b.n() || a.num_classes_ != b.num_classes_) return false;
  if (a.adjacency_ != b.adjacency_) return false;
  if (a.features_.has_value() != b.features_.has_value()) return false;
  if (a.features_ && (a.features_->cols() != b.features_->cols() || *a.features_ != *b.features_)) return false;
  if (a.labels_ != b.labels_) return false;
  return a.split_.train == b.split_.train && a.split_.val == b.split_.val && a.split_.test == b.split_.test;
}

Matrix adjacency_from_edges(int n, const EdgeSet& edges) {
  check_edges(edges, n);
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : edges) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

Vector degrees(const Matrix& adjacency) { return adjacency.rowwise().sum(); }

SparseMatrix to_sparse(const Matrix& adjacency) { return adjacency.sparseView(); }

Matrix normalize_adjacency(const Matrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  const Vector inv_sqrt = (degrees(adjacency).array() + 1.0).rsqrt().matrix();
  Matrix out = adjacency + Matrix::Identity(n, n);
  out = inv_sqrt.asDiagonal() * out * inv_sqrt.asDiagonal();
  return out;
}

Matrix laplacian(const Matrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  const Vector deg = degrees(adjacency);
  Vector inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  Matrix out = -adjacency;
  out.diagonal() += deg;
  return inv_sqrt.asDiagonal() * out * inv_sqrt.asDiagonal();
}

double smoothness(const Matrix& features, const Matrix& lap) {
  if (lap.rows() != features.rows() || lap.cols() != features.rows()) {
    throw DimensionError("smoothness: Laplacian and features disagree on n");
  }
  return (features.transpose() * lap * features).trace();
}

Matrix apply_edits(const Matrix& adjacency, const EdgeSet& deletions, const EdgeSet& insertions) {
  const int n = static_cast<int>(adjacency.rows());
  check_edges(deletions, n);
  check_edges(insertions, n);
  Matrix out = adjacency;
  for (const Edge& e : deletions) {
    if (out(e.u, e.v) == 0.0) {
      throw EditConflict("deleting non-edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    }
    out(e.u, e.v) = 0.0;
    out(e.v, e.u) = 0.0;
  }
  for (const Edge& e : insertions) {
    if (adjacency(e.u, e.v) != 0.0 || out(e.u, e.v) != 0.0) {
      throw EditConflict("inserting existing edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    }
    out(e.u, e.v) = 1.0;
    out(e.v, e.u) = 1.0;
  }
  return out;
}

}  // namespace gsan
