#include <gtest/gtest.h>

#include <cmath>

#include "gsan/bundle_io.hpp"
#include "gsan/errors.hpp"
#include "gsan/metrics.hpp"
#include "gsan/poisoner.hpp"
#include "gsan/synthetic.hpp"
#include "helpers.hpp"

namespace gsan {
namespace {

// One 10% attack on the default SBM fixture, shared by the suite.
class SbmAttack : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    clean_ = new GraphBundle(make_sbm(SbmConfig{}));
    AttackConfig ac;
    result_ = new PoisonResult(mettack_like(*clean_, ac));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete clean_;
  }
  static GraphBundle* clean_;
  static PoisonResult* result_;
};
GraphBundle* SbmAttack::clean_ = nullptr;
PoisonResult* SbmAttack::result_ = nullptr;

TEST_F(SbmAttack, SpendsExactBudget) {
  const int b = attack_budget(*clean_, 0.1);
  EXPECT_EQ(b, static_cast<int>(std::ceil(0.1 * static_cast<double>(clean_->edge_count()))));
  EXPECT_EQ(static_cast<int>(result_->record.size()), b);
  EXPECT_EQ(static_cast<int>(result_->trace.size()), b);
}

TEST_F(SbmAttack, RecordMatchesGraphDifference) {
  EXPECT_EQ(result_->poisoned.adjacency(),
            apply_edits(clean_->adjacency(), result_->record.deleted, result_->record.inserted));
  EdgeSet seen;
  for (const AttackStep& s : result_->trace) EXPECT_TRUE(seen.insert(s.edge).second);
}

TEST_F(SbmAttack, InsertionsMostlyCrossClass) {
  const auto& y = clean_->labels();
  int cross = 0;
  for (const Edge& e : result_->record.inserted) cross += y[e.u] != y[e.v];
  ASSERT_FALSE(result_->record.inserted.empty());
  EXPECT_GE(cross, 0.8 * static_cast<double>(result_->record.inserted.size()));
}

TEST_F(SbmAttack, DegradesAccuracy) {
  const double before = mean_test_accuracy(*clean_, {}, 5);
  const double after = mean_test_accuracy(result_->poisoned, {}, 5);
  EXPECT_GE(before - after, 0.05) << before << " -> " << after;
}

TEST_F(SbmAttack, AttackLossRarelyDecreases) {
  int ok = 0;
  for (const AttackStep& s : result_->trace) ok += s.loss_after >= s.loss_before;
  EXPECT_GE(ok, 0.9 * static_cast<double>(result_->trace.size()));
}

TEST_F(SbmAttack, FlipScoreMatchesDirection) {
  for (const AttackStep& s : result_->trace) {
    EXPECT_EQ(s.inserted, !clean_->has_edge(s.edge.u, s.edge.v));
  }
}

TEST_F(SbmAttack, RecordRoundTrip) {
  const auto dir = testing::scratch_dir("poison_rt");
  save_poison(result_->record, dir / "poison.json");
  const PoisonRecord back = load_poison(dir / "poison.json");
  EXPECT_EQ(back.inserted, result_->record.inserted);
  EXPECT_EQ(back.deleted, result_->record.deleted);
}

TEST_F(SbmAttack, MixedPruneEndpoints) {
  const SanitationResult none = mixed_prune_fixture(result_->poisoned, result_->record, 0.0, 3);
  EXPECT_EQ(esr(result_->record.all(), none.deleted_set()), 0.0);
  EXPECT_EQ(none.deleted.size(), result_->record.inserted.size());

  const SanitationResult all = mixed_prune_fixture(result_->poisoned, result_->record, 1.0, 3);
  const EdgeSet s = all.deleted_set();
  for (const Edge& e : s) EXPECT_TRUE(result_->record.inserted.count(e));
  EXPECT_DOUBLE_EQ(esr(result_->record.all(), s),
                   static_cast<double>(s.size()) / static_cast<double>(set_union(result_->record.all(), s).size()));
}

TEST_F(SbmAttack, MixedPruneEsrIncreasesWithP) {
  double prev = -1.0;
  for (int k = 0; k <= 10; ++k) {
    const double p = k / 10.0;
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SanitationResult r = mixed_prune_fixture(result_->poisoned, result_->record, p, seed);
      mean += esr(result_->record.all(), r.deleted_set()) / 10.0;
    }
    EXPECT_GT(mean, prev) << "p=" << p;
    prev = mean;
  }
}

TEST(Poisoner, BudgetFiveOnSmallGraph) {
  SbmConfig sc;
  sc.n = 40;
  const GraphBundle clean = make_sbm(sc);
  AttackConfig ac;
  ac.power = 5.0 / static_cast<double>(clean.edge_count());
  ASSERT_EQ(attack_budget(clean, ac.power), 5);
  const PoisonResult r = mettack_like(clean, ac);
  EXPECT_EQ(r.record.size(), 5u);
  const PoisonResult again = mettack_like(clean, ac);
  EXPECT_EQ(again.record.inserted, r.record.inserted);
  EXPECT_EQ(again.record.deleted, r.record.deleted);
}

TEST(Poisoner, PowerOutOfRangeRejected) {
  const GraphBundle clean = make_sbm(SbmConfig{.n = 30});
  AttackConfig ac;
  ac.power = 0.0;
  EXPECT_THROW(mettack_like(clean, ac), InvalidArgument);
  ac.power = 0.6;
  EXPECT_THROW(random_attack(clean, ac), InvalidArgument);
}

TEST(Poisoner, RandomAttackDeterministic) {
  const GraphBundle clean = make_sbm(SbmConfig{.n = 50});
  AttackConfig ac;
  ac.seed = 9;
  const PoisonResult a = random_attack(clean, ac), b = random_attack(clean, ac);
  EXPECT_EQ(a.record.inserted, b.record.inserted);
  EXPECT_EQ(a.record.deleted, b.record.deleted);
  EXPECT_EQ(static_cast<int>(a.record.size()), attack_budget(clean, 0.1));
  ac.seed = 10;
  const PoisonResult c = random_attack(clean, ac);
  EXPECT_NE(a.record.all(), c.record.all());
}

TEST(Poisoner, MixedPruneNeedsEnoughInsertions) {
  const GraphBundle clean = make_sbm(SbmConfig{.n = 40});
  AttackConfig ac;
  ac.seed = 2;
  const PoisonResult r = random_attack(clean, ac);
  EXPECT_THROW(mixed_prune_fixture(r.poisoned, r.record, 1.0, 0, static_cast<int>(r.record.inserted.size()) + 1),
               InsufficientAdversarialEdges);
  EXPECT_THROW(mixed_prune_fixture(r.poisoned, r.record, 1.5, 0), InvalidArgument);
}

}  // namespace
}  // namespace gsan
