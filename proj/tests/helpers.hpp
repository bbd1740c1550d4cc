#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "gsan/graph.hpp"

namespace gsan::testing {

inline Matrix random_adjacency(int n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  Matrix a = Matrix::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (coin(rng)) a(u, v) = a(v, u) = 1.0;
    }
  }
  return a;
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gsan_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace gsan::testing
