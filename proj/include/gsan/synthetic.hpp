#pragma once

#include <cstdint>
#include <random>

#include "gsan/graph.hpp"

namespace gsan {

// Stochastic block model with Gaussian class-conditional attributes.
// Class c owns the feature dimensions j with j % C == c; its mean is
// `feature_signal` there and 0 elsewhere, with unit-variance noise. The
// defaults are the desk-scale fixture: features weak enough that the
// topology carries the classification, so structural poisoning hurts.
struct SbmConfig {
  int n = 200;
  int num_classes = 2;
  double p_in = 0.2;
  double p_out = 0.02;
  int feature_dim = 8;
  double feature_signal = 0.2;
  double train_fraction = 0.1;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
};

GraphBundle make_sbm(const SbmConfig& cfg);

// Random train/val/test split; the rest after train and val goes to test.
Split random_split(int n, double train_fraction, double val_fraction, std::mt19937_64& rng);

}  // namespace gsan
