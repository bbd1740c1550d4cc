#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gsan/graph.hpp"
#include "gsan/linear_gnn.hpp"
#include "gsan/sanitizer.hpp"

namespace gsan {

struct AttackConfig {
  double power = 0.1;  // budget = ⌈power·|E|⌉
  bool self_training = true;
  TrainConfig train;
  std::uint64_t seed = 0;

  void validate() const;  // power ∈ (0, 0.5]
};

int attack_budget(const GraphBundle& clean, double power);

struct AttackStep {
  Edge edge;
  bool inserted = false;
  double score = 0.0;        // G_uv·(1 − 2A_uv)
  double loss_before = 0.0;  // attack loss with the step's weights held fixed
  double loss_after = 0.0;
};

struct PoisonResult {
  GraphBundle poisoned;
  PoisonRecord record;
  std::vector<AttackStep> trace;
};

// Greedy meta-gradient attack maximizing the cross-entropy of self-training
// pseudo-labels on unlabeled nodes. One flip per step; a pair is flipped at
// most once; the GNN is retrained after every flip.
PoisonResult mettack_like(const GraphBundle& clean, const AttackConfig& cfg);

// Uniform random flips of distinct pairs.
PoisonResult random_attack(const GraphBundle& clean, const AttackConfig& cfg);

// Deletes ⌈p·B⌉ uniformly sampled attacker insertions plus B − ⌈p·B⌉
// random non-adversarial edges. B defaults to |inserted|. Throws
// InsufficientAdversarialEdges / InvalidArgument.
SanitationResult mixed_prune_fixture(const GraphBundle& poisoned, const PoisonRecord& record, double p,
                                     std::uint64_t seed, std::optional<int> budget = std::nullopt);

}  // namespace gsan
