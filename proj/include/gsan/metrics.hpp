#pragma once

#include <vector>

#include <json.hpp>

#include "gsan/graph.hpp"
#include "gsan/linear_gnn.hpp"

namespace gsan {

// |A∩S| / |A∪S|. Throws EmptyAttackSet.
double esr(const EdgeSet& s_atk, const EdgeSet& s_san);
// 2|A∩S| / (|A| + |S|).
double f1(const EdgeSet& s_atk, const EdgeSet& s_san);
// |A∩S| / |A|.
double cr(const EdgeSet& s_atk, const EdgeSet& s_san);

struct MetricsReport {
  double esr = 0.0;
  double f1 = 0.0;
  double cr = 0.0;
  double r_asb = 0.0;  // |S_san| / |E(poisoned)|
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  int seeds = 0;
  nlohmann::json config;

  nlohmann::json to_json() const;
};

// Mean test accuracy over training seeds 0..seeds−1 (base seed offset from cfg).
double mean_test_accuracy(const GraphBundle& bundle, const TrainConfig& cfg, int seeds);

// Accuracy before/after over `seeds` trainings with the same config, plus
// the sanitation metrics of `s_san` against the attack record.
MetricsReport evaluate_defense(const GraphBundle& poisoned, const GraphBundle& sanitized, const PoisonRecord& record,
                               const EdgeSet& s_san, int seeds, const TrainConfig& cfg = {});

// Sanitation metrics only (accuracy fields left 0).
MetricsReport sanitation_metrics(const PoisonRecord& record, const EdgeSet& s_san, std::size_t poisoned_edges);

// Least-squares slope of y on x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);
// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gsan
