#include "gsan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsan/errors.hpp"

namespace gsan {

namespace {

void require_attack(const EdgeSet& s_atk) {
  if (s_atk.empty()) throw EmptyAttackSet("the attack edit set is empty");
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double esr(const EdgeSet& s_atk, const EdgeSet& s_san) {
  require_attack(s_atk);
  const auto inter = static_cast<double>(intersection_size(s_atk, s_san));
  return inter / (static_cast<double>(s_atk.size() + s_san.size()) - inter);
}

double f1(const EdgeSet& s_atk, const EdgeSet& s_san) {
  require_attack(s_atk);
  const auto inter = static_cast<double>(intersection_size(s_atk, s_san));
  return 2.0 * inter / static_cast<double>(s_atk.size() + s_san.size());
}

double cr(const EdgeSet& s_atk, const EdgeSet& s_san) {
  require_attack(s_atk);
  return static_cast<double>(intersection_size(s_atk, s_san)) / static_cast<double>(s_atk.size());
}

nlohmann::json MetricsReport::to_json() const {
  return {{"esr", esr}, {"f1", f1}, {"cr", cr}, {"r_asb", r_asb}, {"accuracy_before", accuracy_before},
          {"accuracy_after", accuracy_after}, {"seeds", seeds}, {"config", config}};
}

double mean_test_accuracy(const GraphBundle& bundle, const TrainConfig& cfg, int seeds) {
  if (seeds < 1) throw InvalidArgument("need at least one evaluation seed");
  const Matrix p = propagate(normalize_adjacency(bundle.adjacency()), bundle.model_features());
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    TrainConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(s);
    const TrainedGnn gnn = train_on_propagated(p, bundle.labels(), bundle.split().train, bundle.num_classes(), c);
    total += accuracy(predict(gnn.probs), bundle.labels(), bundle.split().test);
  }
  return total / seeds;
}

MetricsReport sanitation_metrics(const PoisonRecord& record, const EdgeSet& s_san, std::size_t poisoned_edges) {
  const EdgeSet s_atk = record.all();
  MetricsReport r;
  r.esr = esr(s_atk, s_san);
  r.f1 = f1(s_atk, s_san);
  r.cr = cr(s_atk, s_san);
  r.r_asb = poisoned_edges ? static_cast<double>(s_san.size()) / static_cast<double>(poisoned_edges) : 0.0;
  return r;
}

MetricsReport evaluate_defense(const GraphBundle& poisoned, const GraphBundle& sanitized, const PoisonRecord& record,
                               const EdgeSet& s_san, int seeds, const TrainConfig& cfg) {
  if (poisoned.n() != sanitized.n()) throw BundleMismatch("poisoned and sanitized bundles differ in size");
  MetricsReport r = sanitation_metrics(record, s_san, poisoned.edge_count());
  r.accuracy_before = mean_test_accuracy(poisoned, cfg, seeds);
  r.accuracy_after = mean_test_accuracy(sanitized, cfg, seeds);
  r.seeds = seeds;
  r.config = {{"epochs", cfg.epochs}, {"learning_rate", cfg.learning_rate}, {"weight_decay", cfg.weight_decay},
              {"init_scale", cfg.init_scale}, {"base_seed", cfg.seed}};
  return r;
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("regression needs two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InvalidArgument("regression on constant x");
  return sxy / sxx;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman needs two or more paired points");
  return pearson(ranks(x), ranks(y));
}

}  // namespace gsan
