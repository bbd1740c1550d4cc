#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsan/detectors.hpp"
#include "gsan/dgmm.hpp"
#include "gsan/graph.hpp"
#include "gsan/linear_gnn.hpp"
#include "gsan/linkpred.hpp"
#include "gsan/meta_grad.hpp"

namespace gsan {

enum class DetectorKind { ClassDiv, LinkPred, None };

struct SanitizerConfig {
  DetectorKind detector = DetectorKind::ClassDiv;
  int budget = 1;  // B
  double temperature = 2.0;
  double beta = 0.3;
  double tau = 0.6;
  double eta = 1e-4;
  TrainConfig train;
  GradMode meta_mode = GradMode::FirstOrder;
  int unroll_steps = 10;
  double unroll_lr = 0.1;
  DgmmConfig dgmm;  // components <= 0 means "use the class count"
  LinkPredConfig linkpred;
  bool adaptive_lambda = true;     // off: λ_val ≡ 1
  bool normal_focus = true;        // off: loss over every val/test node
  bool universal_victims = false;  // LinkPred victim rule
  bool use_attributes = true;      // detector features from X when present
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidArgument
  nlohmann::json to_json() const;
};

// Reads the known keys of `params` over the defaults; unknown keys throw
// SpecError at `path`.
SanitizerConfig sanitizer_config_from_json(const nlohmann::json& params, const std::string& path = "");

struct StepRecord {
  int step = 0;
  std::optional<Edge> edge;  // empty on early stop
  double gradient = 0.0;
  double lambda_val = 1.0;
  double outer_loss = 0.0;
  double threshold = 0.0;
  std::vector<int> victims;
  bool no_victims_fallback = false;  // empty victim set: all edges were candidates
  bool focus_fallback = false;       // empty loss focus: all nodes were used
  bool degenerate_threshold = false;
};

struct SanitationResult {
  std::string method;
  std::vector<Edge> deleted;  // in deletion order
  std::vector<StepRecord> trace;
  GraphBundle sanitized;
  bool early_stopped = false;
  nlohmann::json config;

  EdgeSet deleted_set() const { return EdgeSet(deleted.begin(), deleted.end()); }
};

// Algorithm: per step, retrain the GNN, detect victims, take the masked
// meta-gradient and delete the best candidate edge incident to a victim.
SanitationResult focused_cleaner(const GraphBundle& poisoned, const SanitizerConfig& cfg);

// Same loop with a caller-supplied detector in place of cfg.detector's
// (cfg.detector still names the method and selects the focus rule).
using VictimOracle = std::function<DetectorOutput(const GraphBundle& current, const TrainedGnn& gnn, int step)>;
SanitationResult focused_cleaner(const GraphBundle& poisoned, const SanitizerConfig& cfg, const VictimOracle& detect);

// Same loop with every node a victim and no normal-pair mask.
SanitationResult gasoline_d(const GraphBundle& poisoned, SanitizerConfig cfg);

// Weighted Jaccard similarity Σ min(a⁺,b⁺) / Σ max(a⁺,b⁺); 1 when both are zero.
double weighted_jaccard(const Matrix& x, int u, int v);

// Deletes edges with similarity below `threshold`, or, with `budget`, the
// threshold whose deletion count is closest to the budget. Throws MissingFeatures.
SanitationResult jaccard_prune(const GraphBundle& poisoned, std::optional<double> threshold, std::optional<int> budget);

// Deletes the `budget` lowest-scored edges of one link predictor trained on
// the poisoned graph.
SanitationResult linkpred_only(const GraphBundle& poisoned, const SanitizerConfig& cfg);

enum class EnsembleMode { Union, Intersection };
// Throws BundleMismatch unless both results sanitize `poisoned`.
SanitationResult ensemble(const GraphBundle& poisoned, const SanitationResult& a, const SanitationResult& b,
                          EnsembleMode mode);

// Writes result.json plus the sanitized bundle files into `dir`.
void save_result(const SanitationResult& result, const std::filesystem::path& dir);
nlohmann::json result_to_json(const SanitationResult& result);
// Reads `dir/result.json` (or a result.json path) and the bundle next to it.
SanitationResult load_result(const std::filesystem::path& path);
// Only the deletion list of a result.json.
std::vector<Edge> load_deleted_edges(const std::filesystem::path& path);

// Every sanitizer's invariant: output = input minus deletions.
Matrix replay_deletions(const Matrix& adjacency, const std::vector<Edge>& deleted);

}  // namespace gsan
