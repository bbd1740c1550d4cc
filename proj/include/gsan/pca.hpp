#pragma once

#include "gsan/graph.hpp"

namespace gsan {

struct PcaResult {
  Matrix scores;       // n×k projections of the centered data
  Matrix components;   // d×k unit loadings, largest-|entry| of each column positive
  Vector eigenvalues;  // all min(n,d) covariance eigenvalues, descending (covariance = XcᵀXc/n)
  Vector mean;         // column means
};

// Top-k principal components of mean-centered X. Uses the d×d covariance
// when d <= n and the n×n Gram matrix otherwise. Throws DimensionError if k > d.
PcaResult pca(const Matrix& x, int k);

inline Matrix pca_reduce(const Matrix& x, int k) { return pca(x, k).scores; }

}  // namespace gsan
