#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <vector>

namespace gsan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Undirected edge stored canonically with u < v.
struct Edge {
  int u = 0;
  int v = 0;

  Edge() = default;
  // Canonicalizes the pair; throws InvalidArgument on a self-loop or negative index.
  Edge(int a, int b);

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using EdgeSet = std::set<Edge>;

// Throws InvalidArgument if any endpoint is >= n.
void check_edges(const EdgeSet& edges, int n);

std::size_t intersection_size(const EdgeSet& a, const EdgeSet& b);
EdgeSet set_union(const EdgeSet& a, const EdgeSet& b);
EdgeSet set_intersection(const EdgeSet& a, const EdgeSet& b);

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// The attacker's edit set attached to a poisoned bundle.
struct PoisonRecord {
  EdgeSet inserted;
  EdgeSet deleted;

  // S_atk: every pair the attacker flipped.
  EdgeSet all() const { return set_union(inserted, deleted); }
  std::size_t size() const { return inserted.size() + deleted.size(); }
};

// Undirected graph with optional node attributes, labels and a node split.
// Invariants are checked on construction; the object is immutable afterwards.
class GraphBundle {
 public:
  GraphBundle(Matrix adjacency, std::optional<Matrix> features,
              std::optional<std::vector<int>> labels, int num_classes, Split split);

  int n() const noexcept { return static_cast<int>(adjacency_.rows()); }
  int num_classes() const noexcept { return num_classes_; }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  bool has_features() const noexcept { return features_.has_value(); }
  const Matrix& features() const;  // throws MissingFeatures
  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::vector<int>& labels() const;  // throws InvalidArgument
  const Split& split() const noexcept { return split_; }

  // Sorted canonical edge list, kept alongside the dense matrix.
  const std::vector<Edge>& edge_list() const noexcept { return edge_list_; }
  EdgeSet edges() const { return EdgeSet(edge_list_.begin(), edge_list_.end()); }
  std::size_t edge_count() const noexcept { return edge_list_.size(); }
  bool has_edge(int u, int v) const { return adjacency_(u, v) != 0.0; }

  // Same nodes/features/labels/split, different topology.
  GraphBundle with_adjacency(Matrix adjacency) const;

  // Feature matrix for model input: the attributes, or the identity when absent.
  Matrix model_features() const;

  friend bool operator==(const GraphBundle& a, const GraphBundle& b);

 private:
  Matrix adjacency_;
  std::optional<Matrix> features_;
  std::optional<std::vector<int>> labels_;
  int num_classes_;
  Split split_;
  std::vector<Edge> edge_list_;
};

// Builds a symmetric 0/1 matrix from an edge set.
Matrix adjacency_from_edges(int n, const EdgeSet& edges);

Vector degrees(const Matrix& adjacency);

SparseMatrix to_sparse(const Matrix& adjacency);

// D̃^{-1/2}(A+I)D̃^{-1/2}.
Matrix normalize_adjacency(const Matrix& adjacency);

// D^{-1/2}(D-A)D^{-1/2}, with 1/sqrt(0) taken as 0 for isolated nodes.
Matrix laplacian(const Matrix& adjacency);

// Tr(XᵀLX).
double smoothness(const Matrix& features, const Matrix& laplacian);

// Removes `deletions` and adds `insertions`. Throws EditConflict if a
// deletion is not an edge or an insertion already is one.
Matrix apply_edits(const Matrix& adjacency, const EdgeSet& deletions, const EdgeSet& insertions);

// Throws ConsistencyError unless A is square, symmetric, 0/1 with zero diagonal.
void check_adjacency(const Matrix& adjacency);

}  // namespace gsan
