#include "gsan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsan/errors.hpp"

namespace gsan {

Split random_split(int n, double train_fraction, double val_fraction, std::mt19937_64& rng) {
  if (train_fraction <= 0.0 || val_fraction <= 0.0 || train_fraction + val_fraction > 1.0) {
    throw InvalidArgument("split fractions must be positive and sum to at most 1");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::max(1L, std::lround(train_fraction * n)));
  const auto n_val = static_cast<std::size_t>(std::max(1L, std::lround(val_fraction * n)));
  if (n_train + n_val > order.size()) throw InvalidArgument("graph too small for the requested split");
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

GraphBundle make_sbm(const SbmConfig& cfg) {
  if (cfg.n < 4 || cfg.num_classes < 2 || cfg.num_classes > cfg.n) throw InvalidArgument("make_sbm: bad n / classes");
  if (cfg.p_in < 0 || cfg.p_in > 1 || cfg.p_out < 0 || cfg.p_out > 1) throw InvalidArgument("make_sbm: bad probabilities");
  if (cfg.feature_dim < cfg.num_classes) throw InvalidArgument("make_sbm: feature_dim < num_classes");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<int> labels(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>((static_cast<long long>(i) * cfg.num_classes) / cfg.n);

  Matrix a = Matrix::Zero(cfg.n, cfg.n);
  for (int u = 0; u < cfg.n; ++u) {
    for (int v = u + 1; v < cfg.n; ++v) {
      const double p = labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)] ? cfg.p_in : cfg.p_out;
      if (unif(rng) < p) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
      }
    }
  }

  Matrix x(cfg.n, cfg.feature_dim);
  for (int i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < cfg.feature_dim; ++j) {
      const double mean = (j % cfg.num_classes == labels[static_cast<std::size_t>(i)]) ? cfg.feature_signal : 0.0;
      x(i, j) = mean + normal(rng);
    }
  }

  Split split = random_split(cfg.n, cfg.train_fraction, cfg.val_fraction, rng);
  return GraphBundle(std::move(a), std::move(x), std::move(labels), cfg.num_classes, std::move(split));
}

}  // namespace gsan
