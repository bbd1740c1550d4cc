#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gsan/graph.hpp"

namespace gsan {

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  double init_scale = 0.1;

  // Throws InvalidArgument unless epochs > 0, learning_rate > 0,
  // weight_decay >= 0 and init_scale >= 0.
  void validate() const;
};

// Two-layer linearized GNN S = softmax(Â²XW).
struct TrainedGnn {
  Matrix weights;     // W, d×C
  Matrix propagated;  // Â²X, n×d
  Matrix logits;      // Z = Â²XW
  Matrix probs;       // row-softmax(Z)
  double initial_train_nll = 0.0;
  double final_train_nll = 0.0;
};

// Row-wise softmax with max subtraction.
Matrix row_softmax(const Matrix& logits);

// Â(ÂX) for an already normalized Â.
Matrix propagate(const Matrix& normalized, const Matrix& x);

struct ForwardResult {
  Matrix logits;
  Matrix probs;
};
ForwardResult forward(const Matrix& adjacency, const Matrix& x, const Matrix& w);

// Mean negative log-likelihood of `labels` over `nodes`.
double mean_nll(const Matrix& probs, const std::vector<int>& labels, const std::vector<int>& nodes);

// Inner objective mean_nll(train) + wd/2 ||W||² and its gradient in W.
struct Objective {
  double value = 0.0;
  Matrix grad;
};
Objective train_objective(const Matrix& propagated, const Matrix& w, const std::vector<int>& labels,
                          const std::vector<int>& train, double weight_decay);

// Adam on the inner objective. Throws NonFinite if the loss diverges.
TrainedGnn train_on_propagated(const Matrix& propagated, const std::vector<int>& labels,
                               const std::vector<int>& train, int num_classes, const TrainConfig& cfg);
TrainedGnn train_inner(const GraphBundle& bundle, const TrainConfig& cfg);

// Row argmax, ties to the smallest class index.
std::vector<int> predict(const Matrix& probs);
// Throws EmptySubset on an empty subset, OutOfRange on a bad index.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth, const std::vector<int>& subset);

// Checkpoint: a JSON header line {"d":..,"C":..,"seed":..} followed by d
// CSV rows of C shortest-round-trip reals.
void save_weights(const std::filesystem::path& file, const Matrix& w, std::uint64_t seed);
Matrix load_weights(const std::filesystem::path& file, std::uint64_t* seed = nullptr);

}  // namespace gsan
