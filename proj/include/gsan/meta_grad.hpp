#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsan/graph.hpp"
#include "gsan/linear_gnn.hpp"

namespace gsan {

enum class GradMode { FirstOrder, Unrolled };

struct OuterLossConfig {
  double eta = 1e-4;  // attribute-smoother weight
  int budget = 1;     // B
  GradMode mode = GradMode::FirstOrder;
  int unroll_steps = 10;   // K for GradMode::Unrolled
  double unroll_lr = 0.1;  // plain-gradient step size of the unrolled inner steps

  void validate() const;  // throws InvalidArgument
};

std::string mode_label(const OuterLossConfig& cfg);  // "first_order" or "unrolled(K)"

struct LambdaPair {
  double lambda_val = 1.0;
  double lambda_test = 0.0;
};

// λ_val = 1 − t/B, λ_test = t/B. Throws OutOfRange unless 0 <= t <= B.
LambdaPair lambda_schedule(int t, int budget);

// The supervised part of the outer loss: node lists with their targets
// (true labels on validation nodes, frozen pseudo-labels on test nodes).
struct OuterTerms {
  std::vector<int> val_nodes;
  std::vector<int> val_targets;
  std::vector<int> test_nodes;
  std::vector<int> test_targets;
  LambdaPair lambdas;
};

// Restricts val/test to `focus` and takes pseudo-labels from the argmax of
// `gnn`. Throws EmptyFocus if both restricted sets are empty.
OuterTerms make_outer_terms(const GraphBundle& bundle, const TrainedGnn& gnn, const std::vector<int>& focus,
                            const LambdaPair& lambdas);

// −λ_val Σ ln S[i,y_i] − λ_test Σ ln S[i,ŷ_i] + η Tr(XᵀLX), evaluated on a
// possibly continuous adjacency with W held fixed.
double outer_loss_at(const Matrix& adjacency, const Matrix& x, const Matrix& w, const OuterTerms& terms, double eta);

double outer_loss(const TrainedGnn& gnn, const GraphBundle& bundle, const std::vector<int>& focus,
                  const LambdaPair& lambdas, double eta);

// Inner-training context the unrolled mode differentiates through.
struct InnerProblem {
  const std::vector<int>* labels = nullptr;
  const std::vector<int>* train = nullptr;
  double weight_decay = 0.0;
};

// Symmetrized ∂L/∂A. FirstOrder holds `w` fixed; Unrolled runs
// cfg.unroll_steps plain gradient steps from `w` and differentiates through
// them (K = 0 is the first-order result). Throws NonFinite.
Matrix meta_gradient_at(const Matrix& adjacency, const Matrix& x, const Matrix& w, const OuterTerms& terms,
                        const OuterLossConfig& cfg, const InnerProblem& inner);

Matrix meta_gradient(const GraphBundle& bundle, const TrainedGnn& gnn, const OuterLossConfig& cfg,
                     const LambdaPair& lambdas, const std::vector<int>& focus, double weight_decay);

// Weights after `steps` plain gradient steps on the inner objective.
Matrix unroll_weights(const Matrix& propagated, const Matrix& w0, const InnerProblem& inner, int steps, double lr);

// Zeroes entries whose endpoints are both normal.
Matrix mask_gradient(const Matrix& g, const std::vector<int>& normals);

// Existing edges with at least one endpoint in `victims`.
std::vector<Edge> candidate_edges(const std::vector<Edge>& edges, const std::vector<int>& victims, int n);

struct EdgeChoice {
  Edge edge;
  double gradient = 0.0;
};

// Candidate with the largest strictly positive gradient; ties go to the
// lexicographically smallest pair. nullopt when no candidate is positive.
std::optional<EdgeChoice> select_edge(const Matrix& g, const std::vector<Edge>& candidates);

struct GradientTraceRow {
  int step = 0;
  Edge edge;
  double gradient = 0.0;
  double lambda_val = 0.0;
};
void write_gradient_trace_csv(std::ostream& out, const std::vector<GradientTraceRow>& rows);

}  // namespace gsan
