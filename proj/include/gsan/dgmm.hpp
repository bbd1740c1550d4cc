#pragma once

#include <cstdint>
#include <vector>

#include "gsan/graph.hpp"

namespace gsan {

struct DgmmConfig {
  int components = 2;  // K, normally the class count
  int hidden = 10;
  int epochs = 200;
  double learning_rate = 1e-3;
  double reg_eps = 1e-6;
  std::uint64_t seed = 0;
};

// Estimation network (one ReLU hidden layer, softmax membership head) plus
// the Gaussian mixture statistics it induces on the training rows.
struct DgmmModel {
  Matrix w1;  // m×hidden
  Vector b1;
  Matrix w2;  // hidden×K
  Vector b2;
  Vector phi;                // K mixture weights
  std::vector<Vector> mu;    // K means
  std::vector<Matrix> sigma; // K covariances, unregularized
  double reg_eps = 1e-6;
  double initial_mean_energy = 0.0;
  double final_mean_energy = 0.0;

  int components() const { return static_cast<int>(phi.size()); }
};

// Membership probabilities γ (rows sum to 1).
Matrix dgmm_membership(const DgmmModel& model, const Matrix& m);

struct GmmStats {
  Vector phi;
  std::vector<Vector> mu;
  std::vector<Matrix> sigma;
};
// φ_k = mean γ_ik, μ_k and Σ_k the γ-weighted mean and covariance.
GmmStats gmm_statistics(const Matrix& m, const Matrix& gamma);

// E(z) = −log Σ_k φ_k N(z; μ_k, Σ_k + reg_eps·I). Throws SingularCovariance.
Vector dgmm_energy(const DgmmModel& model, const Matrix& m);

// Mean energy of `m` under the statistics the network induces on `m`,
// and its gradient in (w1, b1, w2, b2).
struct DgmmGradient {
  double loss = 0.0;
  Matrix w1, w2;
  Vector b1, b2;
};
DgmmGradient dgmm_loss_gradient(const DgmmModel& model, const Matrix& m);

// Adam on the mean energy. Throws NonFinite / SingularCovariance.
DgmmModel dgmm_train(const Matrix& m, const DgmmConfig& cfg);

// Linear-interpolation quantile (numpy's default); q in [0,1].
double quantile(std::vector<double> values, double q);

struct ThresholdState {
  double kappa = 0.0;
  double beta = 0.3;
  double tau = 0.6;
  int step = 0;
};

// κ₀ = τ-quantile of the step-0 energies. Throws InvalidArgument unless
// τ ∈ (0,1) and β ∈ [0,1].
ThresholdState init_threshold(const Vector& energies, double tau, double beta);

// κ_t = β α_t + (1−β) κ_{t−1}, α_t the τ-quantile of `energies`.
ThresholdState adaptive_threshold(const ThresholdState& state, const Vector& energies);

}  // namespace gsan
