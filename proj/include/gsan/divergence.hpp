#pragma once

#include "gsan/graph.hpp"

namespace gsan {

inline constexpr double kProbFloor = 1e-12;

// Row-softmax of Z/T. Throws InvalidTemperature unless T > 0.
Matrix soft_class_prob(const Matrix& logits, double temperature);

// (i,j) = Σ_c S_ic ln(S_ic / S_jc), probabilities floored at kProbFloor
// inside the logarithms; zero diagonal.
Matrix pairwise_kl(const Matrix& s);

struct Proximity {
  Vector prox1;  // mean KL from a node to its neighbors; 0 when isolated
  Vector prox2;  // mean KL over ordered neighbor pairs; 0 when degree < 2
};

// prox1 = rowsum(A⊙Div)/D, prox2 = rowsum(A⊙(A·Div))/(D(D−1)).
Proximity proximity_metrics(const Matrix& div, const Matrix& adjacency);

// Mean Jensen–Shannon divergence between a node and its neighbors; 0 when isolated.
Vector js_divergence(const Matrix& s, const Matrix& adjacency);

}  // namespace gsan
