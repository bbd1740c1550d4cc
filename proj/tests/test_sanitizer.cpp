#include <gtest/gtest.h>

#include <cmath>

#include "gsan/errors.hpp"
#include "gsan/poisoner.hpp"
#include "gsan/sanitizer.hpp"
#include "gsan/synthetic.hpp"
#include "helpers.hpp"

namespace gsan {
namespace {

GraphBundle small_sbm(std::uint64_t seed = 0) {
  SbmConfig sc;
  sc.n = 40;
  sc.feature_signal = 1.0;
  sc.seed = seed;
  return make_sbm(sc);
}

// Detector that reports a fixed victim set.
VictimOracle fixed_victims(std::vector<int> victims, int n) {
  return [victims, n](const GraphBundle&, const TrainedGnn&, int) {
    DetectorOutput d;
    d.victims = victims;
    for (int i = 0; i < n; ++i) {
      if (std::find(victims.begin(), victims.end(), i) == victims.end()) d.normals.push_back(i);
    }
    return d;
  };
}

void expect_deletion_only(const GraphBundle& poisoned, const SanitationResult& r) {
  EXPECT_EQ(r.sanitized.adjacency(), replay_deletions(poisoned.adjacency(), r.deleted));
  EXPECT_EQ(r.deleted_set().size(), r.deleted.size());
  for (const Edge& e : r.deleted) EXPECT_TRUE(poisoned.has_edge(e.u, e.v));
}

// Two 5-cliques (classes 0 and 1) with class-indicator features and one
// planted cross-class edge (0,5).
GraphBundle planted_cliques() {
  Matrix a = Matrix::Zero(10, 10);
  for (int c = 0; c < 2; ++c)
    for (int i = 5 * c; i < 5 * c + 5; ++i)
      for (int j = i + 1; j < 5 * c + 5; ++j) a(i, j) = a(j, i) = 1;
  a(0, 5) = a(5, 0) = 1;
  Matrix x = Matrix::Zero(10, 2);
  std::vector<int> y(10);
  for (int i = 0; i < 10; ++i) {
    y[static_cast<std::size_t>(i)] = i / 5;
    x(i, i / 5) = 1.0;
  }
  return GraphBundle(a, x, y, 2, Split{{2, 7}, {1, 6}, {3, 4, 8, 9}});
}

TEST(FocusedCleaner, PerfectDetectorDeletesPlantedEdge) {
  const GraphBundle poisoned = planted_cliques();
  SanitizerConfig cfg;
  cfg.budget = 1;
  const SanitationResult r = focused_cleaner(poisoned, cfg, fixed_victims({0, 5}, poisoned.n()));
  ASSERT_EQ(r.deleted.size(), 1u);
  EXPECT_EQ(r.deleted[0], Edge(0, 5));
  EXPECT_EQ(r.trace[0].victims, (std::vector<int>{0, 5}));
}

TEST(FocusedCleaner, ZeroBudgetRejected) {
  SanitizerConfig cfg;
  cfg.budget = 0;
  EXPECT_THROW(focused_cleaner(small_sbm(), cfg), InvalidArgument);
}

class PoisonedFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    AttackConfig ac;
    ac.seed = 4;
    result_ = new PoisonResult(mettack_like(small_sbm(4), ac));
  }
  static void TearDownTestSuite() { delete result_; }
  static const GraphBundle& poisoned() { return result_->poisoned; }
  static PoisonResult* result_;
};
PoisonResult* PoisonedFixture::result_ = nullptr;

TEST_F(PoisonedFixture, ClassDivRunIsDeletionOnlyAndFocused) {
  SanitizerConfig cfg;
  cfg.budget = 8;
  const SanitationResult r = focused_cleaner(poisoned(), cfg);
  EXPECT_EQ(r.method, "focusedcleaner_cld");
  EXPECT_EQ(r.deleted.size(), 8u);
  expect_deletion_only(poisoned(), r);
  ASSERT_EQ(r.trace.size(), 8u);
  for (std::size_t t = 0; t < r.trace.size(); ++t) {
    const StepRecord& s = r.trace[t];
    ASSERT_TRUE(s.edge.has_value());
    EXPECT_EQ(*s.edge, r.deleted[t]);
    const auto& vic = s.victims;
    EXPECT_TRUE(std::find(vic.begin(), vic.end(), s.edge->u) != vic.end() ||
                std::find(vic.begin(), vic.end(), s.edge->v) != vic.end());
  }
}

TEST_F(PoisonedFixture, LinkPredRunIsDeletionOnly) {
  SanitizerConfig cfg;
  cfg.detector = DetectorKind::LinkPred;
  cfg.budget = 5;
  cfg.linkpred.epochs = 60;
  cfg.linkpred.refresh_epochs = 10;
  const SanitationResult r = focused_cleaner(poisoned(), cfg);
  EXPECT_EQ(r.method, "focusedcleaner_lp");
  EXPECT_EQ(r.deleted.size(), 5u);
  expect_deletion_only(poisoned(), r);
}

TEST_F(PoisonedFixture, GasolineEqualsAllVictimCleaner) {
  SanitizerConfig cfg;
  cfg.budget = 6;
  const SanitationResult g = gasoline_d(poisoned(), cfg);
  std::vector<int> all(static_cast<std::size_t>(poisoned().n()));
  std::iota(all.begin(), all.end(), 0);
  const SanitationResult f = focused_cleaner(poisoned(), cfg, fixed_victims(all, poisoned().n()));
  EXPECT_EQ(g.deleted, f.deleted);
  EXPECT_EQ(g.method, "gasoline_d");
  for (const StepRecord& s : g.trace) EXPECT_FALSE(s.focus_fallback);
}

TEST_F(PoisonedFixture, EmptyVictimSetFallsBack) {
  SanitizerConfig cfg;
  cfg.budget = 2;
  const SanitationResult r = focused_cleaner(poisoned(), cfg, fixed_victims({}, poisoned().n()));
  ASSERT_EQ(r.trace.size(), 2u);
  for (const StepRecord& s : r.trace) EXPECT_TRUE(s.no_victims_fallback);
  EXPECT_EQ(r.deleted.size(), 2u);
}

TEST_F(PoisonedFixture, RunsAreDeterministic) {
  SanitizerConfig cfg;
  cfg.budget = 4;
  cfg.seed = 3;
  EXPECT_EQ(focused_cleaner(poisoned(), cfg).deleted, focused_cleaner(poisoned(), cfg).deleted);
  cfg.linkpred.epochs = 50;
  EXPECT_EQ(linkpred_only(poisoned(), cfg).deleted, linkpred_only(poisoned(), cfg).deleted);
}

TEST_F(PoisonedFixture, LinkPredOnlyDeletesLowestScores) {
  SanitizerConfig cfg;
  cfg.budget = static_cast<int>(poisoned().edge_count());
  cfg.linkpred.epochs = 30;
  const SanitationResult r = linkpred_only(poisoned(), cfg);
  EXPECT_EQ(r.deleted.size(), poisoned().edge_count());
  EXPECT_EQ(r.sanitized.edge_count(), 0u);
}

TEST_F(PoisonedFixture, ResultRoundTrip) {
  SanitizerConfig cfg;
  cfg.budget = 3;
  const SanitationResult r = focused_cleaner(poisoned(), cfg);
  const auto dir = testing::scratch_dir("result_rt");
  save_result(r, dir);
  const SanitationResult back = load_result(dir);
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.deleted, r.deleted);
  EXPECT_EQ(back.sanitized, r.sanitized);
  EXPECT_EQ(back.config, r.config);
  ASSERT_EQ(back.trace.size(), r.trace.size());
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    EXPECT_EQ(back.trace[i].gradient, r.trace[i].gradient);
    EXPECT_EQ(back.trace[i].victims, r.trace[i].victims);
  }
  EXPECT_EQ(load_deleted_edges(dir / "result.json"), r.deleted);
}

TEST_F(PoisonedFixture, EnsembleIdentities) {
  SanitizerConfig cfg;
  cfg.budget = 5;
  const SanitationResult a = focused_cleaner(poisoned(), cfg);
  const SanitationResult b = jaccard_prune(poisoned(), std::nullopt, 5);
  const SanitationResult same_u = ensemble(poisoned(), a, a, EnsembleMode::Union);
  const SanitationResult same_i = ensemble(poisoned(), a, a, EnsembleMode::Intersection);
  EXPECT_EQ(same_u.deleted_set(), a.deleted_set());
  EXPECT_EQ(same_i.deleted_set(), a.deleted_set());

  const SanitationResult u = ensemble(poisoned(), a, b, EnsembleMode::Union);
  const SanitationResult i = ensemble(poisoned(), a, b, EnsembleMode::Intersection);
  const std::size_t overlap = intersection_size(a.deleted_set(), b.deleted_set());
  EXPECT_EQ(u.deleted.size(), a.deleted.size() + b.deleted.size() - overlap);
  EXPECT_EQ(i.deleted.size(), overlap);
  expect_deletion_only(poisoned(), u);
  expect_deletion_only(poisoned(), i);
}

TEST(Ensemble, DisjointIntersectionIsEmpty) {
  const GraphBundle g = small_sbm();
  const auto& edges = g.edge_list();
  const Matrix a_adj = replay_deletions(g.adjacency(), {edges[0]});
  const Matrix b_adj = replay_deletions(g.adjacency(), {edges[1]});
  SanitationResult a{"x", {edges[0]}, {}, g.with_adjacency(a_adj), false, {}};
  SanitationResult b{"y", {edges[1]}, {}, g.with_adjacency(b_adj), false, {}};
  EXPECT_TRUE(ensemble(g, a, b, EnsembleMode::Intersection).deleted.empty());
  EXPECT_EQ(ensemble(g, a, b, EnsembleMode::Union).deleted.size(), 2u);
  SanitationResult bad = a;
  bad.sanitized = g;
  EXPECT_THROW(ensemble(g, bad, b, EnsembleMode::Union), BundleMismatch);
}

TEST(Jaccard, IdenticalAndDisjointFeatures) {
  Matrix x(3, 4);
  x << 1, 0, 2, 0,
       1, 0, 2, 0,
       0, 3, 0, 1;
  EXPECT_EQ(weighted_jaccard(x, 0, 1), 1.0);
  EXPECT_EQ(weighted_jaccard(x, 0, 2), 0.0);
  Matrix y(2, 2);
  y << 1, 3, 2, 1;
  EXPECT_DOUBLE_EQ(weighted_jaccard(y, 0, 1), 2.0 / 5.0);
  EXPECT_EQ(weighted_jaccard(Matrix::Zero(2, 3), 0, 1), 1.0);
}

TEST(Jaccard, PrunesOnlyDissimilarEdges) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = a(0, 2) = a(2, 0) = 1;
  Matrix x(3, 4);
  x << 1, 0, 2, 0,
       1, 0, 2, 0,
       0, 3, 0, 1;
  const GraphBundle g(a, x, std::vector<int>{0, 0, 1}, 2, Split{{0}, {1}, {2}});
  const SanitationResult r = jaccard_prune(g, 0.5, std::nullopt);
  ASSERT_EQ(r.deleted.size(), 1u);
  EXPECT_EQ(r.deleted[0], Edge(0, 2));
  EXPECT_EQ(jaccard_prune(g, std::nullopt, 1).deleted, r.deleted);
}

TEST(Jaccard, BudgetTuningWithinTwoPercent) {
  SbmConfig sc;
  sc.feature_signal = 0.5;
  const GraphBundle g = make_sbm(sc);
  for (double ratio : {0.05, 0.1, 0.2}) {
    const int target = static_cast<int>(std::ceil(ratio * static_cast<double>(g.edge_count())));
    const SanitationResult r = jaccard_prune(g, std::nullopt, target);
    EXPECT_LE(std::abs(static_cast<double>(r.deleted.size()) - target), 0.02 * target + 1e-9) << ratio;
    expect_deletion_only(g, r);
  }
}

TEST(Jaccard, NeedsFeatures) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = a(1, 0) = 1;
  const GraphBundle g(a, std::nullopt, std::vector<int>{0, 1}, 2, Split{{0}, {1}, {}});
  EXPECT_THROW(jaccard_prune(g, 0.5, std::nullopt), MissingFeatures);
}

TEST(SanitizerConfig, JsonKeysAndUnknownKey) {
  const SanitizerConfig c = sanitizer_config_from_json(
      nlohmann::json{{"temperature", 3.0}, {"tau", 0.7}, {"normal_focus", false}, {"lp_refresh_epochs", 7}}, "/s/0");
  EXPECT_EQ(c.temperature, 3.0);
  EXPECT_EQ(c.tau, 0.7);
  EXPECT_FALSE(c.normal_focus);
  EXPECT_EQ(c.linkpred.refresh_epochs, 7);
  try {
    sanitizer_config_from_json(nlohmann::json{{"temprature", 1.0}}, "/sanitizers/2/params");
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_NE(e.path().find("/sanitizers/2/params"), std::string::npos);
  }
}

TEST(Replay, ConflictingDeletionThrows) {
  const GraphBundle g = small_sbm();
  int u = 0, v = 1;
  while (g.has_edge(u, v)) ++v;
  EXPECT_THROW(replay_deletions(g.adjacency(), {Edge(u, v)}), EditConflict);
}

}  // namespace
}  // namespace gsan
