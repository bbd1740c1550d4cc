#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gsan/graph.hpp"
#include "gsan/linear_gnn.hpp"
#include "gsan/poisoner.hpp"
#include "gsan/sanitizer.hpp"
#include "gsan/synthetic.hpp"

namespace gsan {

// Sanitizer names shared by the CLI and experiment specs:
// cld, lp, gasoline-d, jaccard, lp-only.
bool is_sanitizer_method(const std::string& method);

// Runs `method` with budget B = ⌈r_asb·|E|⌉ (r_asb ∈ (0,1]). Throws InvalidArgument.
SanitationResult run_sanitizer(const std::string& method, const GraphBundle& poisoned, double r_asb,
                               const SanitizerConfig& cfg);

int sanitation_budget(const GraphBundle& poisoned, double r_asb);

// Accuracy while deleting the attacker's insertions one at a time, in the
// attack's order. Points every `stride` deletions, plus the last.
struct PruningPoint {
  int deleted = 0;
  double accuracy = 0.0;
};
std::vector<PruningPoint> sequential_pruning(const GraphBundle& poisoned, const std::vector<Edge>& insertion_order,
                                             int stride, int eval_seeds, const TrainConfig& cfg = {});

// One mixed_prune_fixture draw per (p, repetition).
struct MixedPoint {
  double p = 0.0;
  int repetition = 0;
  double esr = 0.0;
  double accuracy = 0.0;
};
std::vector<MixedPoint> mixed_pruning(const GraphBundle& poisoned, const PoisonRecord& record,
                                      const std::vector<double>& grid, int repetitions, int eval_seeds,
                                      const TrainConfig& cfg = {});

// Mean accuracy per grid value, in grid order.
std::vector<double> mean_accuracy_by_p(const std::vector<MixedPoint>& points, const std::vector<double>& grid);

struct SanitizerSpec {
  std::string method;
  std::string label;
  SanitizerConfig config;
  nlohmann::json params;
};

struct ExperimentSpec {
  std::variant<std::filesystem::path, SbmConfig> dataset;
  std::string attack_method = "mettack";  // mettack | random
  std::vector<double> powers;
  std::vector<std::uint64_t> seeds;
  std::vector<SanitizerSpec> sanitizers;
  std::vector<double> r_asb;
  int eval_seeds = 5;
  TrainConfig train;
  bool sanitation = true;
  bool sequential_pruning = false;
  bool mixed_pruning = false;
  int sequential_stride = 0;  // 0: ⌈|inserted|/10⌉
  std::vector<double> mixed_grid;
  int mixed_repetitions = 10;
  int workers = 1;
  std::filesystem::path output_dir;
  nlohmann::json source;  // the spec as read, echoed into the summary
};

// Validates and fills defaults. Relative paths resolve against `base_dir`.
// Every problem is a SpecError carrying the JSON pointer of the field.
ExperimentSpec parse_experiment_spec(const nlohmann::json& spec, const std::filesystem::path& base_dir);

// Runs the grid and writes sanitation.csv, sequential_pruning.csv,
// mixed_pruning.csv (as requested) and summary.json into spec.output_dir.
// Output is byte-identical for identical specs, whatever the worker count.
// Returns the summary.
nlohmann::json run_experiment(const ExperimentSpec& spec);
nlohmann::json run_experiment(const std::filesystem::path& spec_file);

}  // namespace gsan
