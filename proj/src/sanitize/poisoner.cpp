#include "gsan/poisoner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gsan/errors.hpp"
#include "gsan/meta_grad.hpp"

namespace gsan {

void AttackConfig::validate() const {
  if (!(power > 0.0 && power <= 0.5)) throw InvalidArgument("attack power must lie in (0, 0.5]");
  train.validate();
}

int attack_budget(const GraphBundle& clean, double power) {
  return static_cast<int>(std::ceil(power * static_cast<double>(clean.edge_count()) - 1e-9));
}

namespace {

PoisonResult finish(const GraphBundle& clean, PoisonRecord record, std::vector<AttackStep> trace) {
  GraphBundle poisoned = clean.with_adjacency(apply_edits(clean.adjacency(), record.deleted, record.inserted));
  return PoisonResult{std::move(poisoned), std::move(record), std::move(trace)};
}

}  // namespace

PoisonResult mettack_like(const GraphBundle& clean, const AttackConfig& cfg) {
  cfg.validate();
  const int n = clean.n();
  const int budget = attack_budget(clean, cfg.power);
  const auto& labels = clean.labels();
  const Matrix x = clean.model_features();

  // Unlabeled nodes carry the self-training pseudo-labels of a model
  // trained on the clean graph; train nodes keep their labels.
  const TrainedGnn clean_model = train_inner(clean, cfg.train);
  const std::vector<int> pseudo = predict(clean_model.probs);
  std::vector<char> is_train(static_cast<std::size_t>(n), 0);
  for (int i : clean.split().train) is_train[static_cast<std::size_t>(i)] = 1;
  OuterTerms terms;
  terms.lambdas = {1.0, 0.0};
  for (int i = 0; i < n; ++i) {
    if (is_train[static_cast<std::size_t>(i)]) continue;
    terms.val_nodes.push_back(i);
    terms.val_targets.push_back(cfg.self_training ? pseudo[static_cast<std::size_t>(i)] : labels[static_cast<std::size_t>(i)]);
  }
  if (terms.val_nodes.empty()) throw EmptyFocus("no unlabeled nodes to attack");

  OuterLossConfig oc;
  oc.eta = 0.0;
  Matrix a = clean.adjacency();
  Matrix flipped = Matrix::Zero(n, n);
  PoisonRecord record;
  std::vector<AttackStep> trace;
  for (int step = 0; step < budget; ++step) {
    const Matrix p = propagate(normalize_adjacency(a), x);
    const TrainedGnn gnn = train_on_propagated(p, labels, clean.split().train, clean.num_classes(), cfg.train);
    const Matrix g = meta_gradient_at(a, x, gnn.weights, terms, oc, {});
    AttackStep best;
    double best_score = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (flipped(u, v) != 0.0) continue;
        const double s = g(u, v) * (1.0 - 2.0 * a(u, v));
        if (s > best_score) {
          best_score = s;
          best.edge = Edge(u, v);
          found = true;
        }
      }
    }
    if (!found) throw InvalidArgument("attack budget exceeds the number of node pairs");
    const Edge e = best.edge;
    best.inserted = a(e.u, e.v) == 0.0;
    best.score = best_score;
    best.loss_before = outer_loss_at(a, x, gnn.weights, terms, 0.0);
    a(e.u, e.v) = a(e.v, e.u) = best.inserted ? 1.0 : 0.0;
    flipped(e.u, e.v) = 1.0;
    best.loss_after = outer_loss_at(a, x, gnn.weights, terms, 0.0);
    (best.inserted ? record.inserted : record.deleted).insert(e);
    trace.push_back(best);
  }
  return finish(clean, std::move(record), std::move(trace));
}

PoisonResult random_attack(const GraphBundle& clean, const AttackConfig& cfg) {
  cfg.validate();
  const int n = clean.n();
  const int budget = attack_budget(clean, cfg.power);
  const long long pairs = static_cast<long long>(n) * (n - 1) / 2;
  if (budget > pairs) throw InvalidArgument("attack budget exceeds the number of node pairs");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> node(0, n - 1);
  PoisonRecord record;
  std::vector<AttackStep> trace;
  EdgeSet seen;
  while (static_cast<int>(seen.size()) < budget) {
    const int u = node(rng), v = node(rng);
    if (u == v) continue;
    const Edge e(u, v);
    if (!seen.insert(e).second) continue;
    AttackStep s;
    s.edge = e;
    s.inserted = !clean.has_edge(e.u, e.v);
    (s.inserted ? record.inserted : record.deleted).insert(e);
    trace.push_back(s);
  }
  return finish(clean, std::move(record), std::move(trace));
}

SanitationResult mixed_prune_fixture(const GraphBundle& poisoned, const PoisonRecord& record, double p,
                                     std::uint64_t seed, std::optional<int> budget) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0,1]");
  const int b = budget.value_or(static_cast<int>(record.inserted.size()));
  if (b < 0) throw InvalidArgument("negative budget");
  const int n_adv = static_cast<int>(std::ceil(p * b - 1e-9));
  if (n_adv > static_cast<int>(record.inserted.size())) {
    throw InsufficientAdversarialEdges("need " + std::to_string(n_adv) + " adversarial insertions, have " +
                                       std::to_string(record.inserted.size()));
  }
  std::vector<Edge> adversarial(record.inserted.begin(), record.inserted.end());
  std::vector<Edge> normal;
  for (const Edge& e : poisoned.edge_list())
    if (!record.inserted.count(e)) normal.push_back(e);
  if (b - n_adv > static_cast<int>(normal.size())) throw InvalidArgument("not enough normal edges to prune");
  std::mt19937_64 rng(seed);
  std::shuffle(adversarial.begin(), adversarial.end(), rng);
  std::shuffle(normal.begin(), normal.end(), rng);
  std::vector<Edge> deleted(adversarial.begin(), adversarial.begin() + n_adv);
  deleted.insert(deleted.end(), normal.begin(), normal.begin() + (b - n_adv));
  Matrix a = replay_deletions(poisoned.adjacency(), deleted);
  SanitationResult r{"mixed_prune", std::move(deleted), {}, poisoned.with_adjacency(std::move(a)), false,
                     {{"p", p}, {"budget", b}, {"seed", seed}}};
  return r;
}

}  // namespace gsan
