#pragma once

#include <cstdint>

#include "gsan/graph.hpp"

namespace gsan {

struct LinkPredConfig {
  int hidden = 16;
  int embed = 16;
  int epochs = 200;
  int refresh_epochs = 50;  // when continuing from a previous step's model
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

// Two-layer scorer H₂ = ReLU(F W₁ + b₁) W₂ + b₂ with H₃ = σ(H₂H₂ᵀ).
struct LinkPredModel {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  double gamma = 1.0;  // (N² − |E|)/|E|
  double tau_lp = 0.5;
  bool degenerate_threshold = false;
};

// (N² − |E|)/|E| with |E| the undirected edge count. Throws InvalidArgument if |E| = 0.
double reweight_gamma(int n, std::size_t edges);

Matrix linkpred_embed(const LinkPredModel& model, const Matrix& input);
Matrix linkpred_scores(const LinkPredModel& model, const Matrix& input);

// Mean over off-diagonal pairs of −[γ A ln H₃ + (1−A) ln(1−H₃)], with gradient.
struct LinkPredGradient {
  double loss = 0.0;
  Matrix w1, w2;
  Vector b1, b2;
};
LinkPredGradient linkpred_loss_gradient(const LinkPredModel& model, const Matrix& input, const Matrix& adjacency);

// Trains the scorer and sets tau_lp with gmean_threshold. Throws NonFinite.
LinkPredModel linkpred_train(const Matrix& input, const Matrix& adjacency, const LinkPredConfig& cfg);

// Warm start: continues from `init` for cfg.refresh_epochs (fresh Adam state).
LinkPredModel linkpred_train(const Matrix& input, const Matrix& adjacency, const LinkPredConfig& cfg,
                             const LinkPredModel& init);

struct GmeanResult {
  double tau = 0.5;
  double gmean = 0.0;
  bool degenerate = false;
};

// G-mean of the rule "score >= τ means edge", over edges and non-edges.
double gmean_at(const std::vector<double>& edge_scores, const std::vector<double>& non_edge_scores, double tau);

// Maximizes the G-mean over the sorted unique scores u_1 < ... < u_k and
// returns the midpoint of the optimal interval (u_{j−1}, u_j], or u_1 when
// j = 1. Degenerate when k = 1 or the best G-mean is 0. Non-edge scores are
// subsampled to 10·|E| (deterministic in `seed`) when there are more.
GmeanResult gmean_threshold(const Matrix& scores, const Matrix& adjacency, std::uint64_t seed = 0);
GmeanResult gmean_threshold(const std::vector<double>& edge_scores, const std::vector<double>& non_edge_scores);

}  // namespace gsan
