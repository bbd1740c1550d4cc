#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "gsan/bundle_io.hpp"
#include "gsan/errors.hpp"
#include "gsan/experiment.hpp"
#include "gsan/metrics.hpp"
#include "gsan/text.hpp"
#include "helpers.hpp"

namespace gsan {
namespace {

nlohmann::json small_spec(const std::string& out, int workers) {
  return {
      {"dataset", {{"sbm", {{"n", 40}, {"feature_signal", 0.5}}}}},
      {"attack", {{"method", "mettack"}, {"powers", {0.1}}, {"seeds", {0, 1}}}},
      {"sanitizers",
       {{{"method", "jaccard"}},
        {{"method", "gasoline-d"}},
        {{"method", "cld"}, {"label", "cld-nofocus"}, {"params", {{"normal_focus", false}}}}}},
      {"r_asb", {0.05}},
      {"eval_seeds", 2},
      {"outputs", {"sanitation", "sequential_pruning", "mixed_pruning"}},
      {"mixed_grid", {0.0, 0.5, 1.0}},
      {"mixed_repetitions", 2},
      {"workers", workers},
      {"output_dir", out},
  };
}

std::string read(const std::filesystem::path& p) { return text::read_file(p.string()); }

TEST(Experiment, ByteIdenticalAcrossWorkerCounts) {
  const auto dir = testing::scratch_dir("experiment_det");
  run_experiment(parse_experiment_spec(small_spec("one", 1), dir));
  run_experiment(parse_experiment_spec(small_spec("three", 3), dir));
  for (const char* f : {"sanitation.csv", "sequential_pruning.csv", "mixed_pruning.csv"}) {
    const std::string a = read(dir / "one" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, read(dir / "three" / f)) << f;
  }
  // The summary echoes the spec, which differs in "workers" and "output_dir" only.
  nlohmann::json s1 = nlohmann::json::parse(read(dir / "one" / "summary.json"));
  nlohmann::json s3 = nlohmann::json::parse(read(dir / "three" / "summary.json"));
  s1.erase("spec");
  s3.erase("spec");
  EXPECT_EQ(s1, s3);
}

TEST(Experiment, CsvReparsesToSummaryValues) {
  const auto dir = testing::scratch_dir("experiment_csv");
  const nlohmann::json summary = run_experiment(parse_experiment_spec(small_spec("out", 2), dir));
  const std::string csv = read(dir / "out" / "sanitation.csv");
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(csv);
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 1u + 2u * 3u);
  EXPECT_EQ(text::split(lines[0], ',').size(), 14u);
  // Mean ESR of the jaccard rows equals the summary aggregate exactly.
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = text::split(lines[i], ',');
    if (f[2] != "jaccard") continue;
    double v = 0.0;
    ASSERT_TRUE(text::parse_double(f[8], v));
    sum += v;
    ++n;
  }
  ASSERT_EQ(n, 2);
  EXPECT_EQ(sum / n, summary["sanitation"][0]["mean_esr"].get<double>());
  EXPECT_EQ(summary["sanitation"][2]["sanitizer"], "cld-nofocus");
}

TEST(Experiment, FileDatasetAndRunFromSpecFile) {
  const auto dir = testing::scratch_dir("experiment_file");
  SbmConfig sc;
  sc.n = 30;
  save_bundle(make_sbm(sc), dir / "bundle");
  const nlohmann::json spec = {{"dataset", "bundle"},
                               {"attack", {{"method", "random"}, {"powers", {0.1}}, {"seeds", {3}}}},
                               {"sanitizers", {{{"method", "lp-only"}, {"params", {{"lp_epochs", 20}}}}}},
                               {"r_asb", {0.1}},
                               {"eval_seeds", 1}};
  text::write_file((dir / "spec.json").string(), spec.dump());
  const nlohmann::json summary = run_experiment(dir / "spec.json");
  EXPECT_TRUE(std::filesystem::exists(dir / "results" / "sanitation.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "results" / "mixed_pruning.csv"));
  EXPECT_EQ(summary["cells"].size(), 1u);
}

std::string spec_error_path(nlohmann::json spec) {
  try {
    parse_experiment_spec(spec, ".");
  } catch (const SpecError& e) {
    return e.path();
  }
  return "<none>";
}

TEST(Experiment, SpecErrorsCarryFieldPath) {
  const nlohmann::json base = small_spec("x", 1);
  auto with = [&](const std::string& pointer, const nlohmann::json& v) {
    nlohmann::json j = base;
    j[nlohmann::json::json_pointer(pointer)] = v;
    return j;
  };
  EXPECT_EQ(spec_error_path(with("/attack/powers/0", 0.9)), "/attack/powers/0");
  EXPECT_EQ(spec_error_path(with("/attack/method", "nettack")), "/attack/method");
  EXPECT_EQ(spec_error_path(with("/sanitizers/1/method", "magic")), "/sanitizers/1/method");
  EXPECT_EQ(spec_error_path(with("/sanitizers/2/params/temprature", 1.0)), "/sanitizers/2/params/temprature");
  EXPECT_EQ(spec_error_path(with("/r_asb/0", 0.0)), "/r_asb/0");
  EXPECT_EQ(spec_error_path(with("/eval_seeds", 0)), "/eval_seeds");
  EXPECT_EQ(spec_error_path(with("/dataset/sbm/p_in", 2.0)), "/dataset/sbm/p_in");
  EXPECT_EQ(spec_error_path(with("/bogus", 1)), "/bogus");
  EXPECT_EQ(spec_error_path(with("/outputs/1", "plots")), "/outputs/1");
  EXPECT_EQ(spec_error_path(with("/sanitizers/1/label", "cld-nofocus")), "/sanitizers/2/label");
  nlohmann::json no_dataset = base;
  no_dataset.erase("dataset");
  EXPECT_EQ(spec_error_path(no_dataset), "/dataset");
  EXPECT_EQ(spec_error_path(base), "<none>");
}

// The desk fixture with one 10% attack, for the pruning-trend oracles.
class PruningTrends : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { attack_ = new PoisonResult(mettack_like(make_sbm(SbmConfig{}), AttackConfig{})); }
  static void TearDownTestSuite() { delete attack_; }
  static PoisonResult* attack_;
};
PoisonResult* PruningTrends::attack_ = nullptr;

TEST_F(PruningTrends, SequentialDeletionRaisesAccuracy) {
  std::vector<Edge> order;
  for (const AttackStep& s : attack_->trace)
    if (s.inserted) order.push_back(s.edge);
  const auto points = sequential_pruning(attack_->poisoned, order, 20, 5);
  ASSERT_GE(points.size(), 3u);
  EXPECT_EQ(points.back().deleted, static_cast<int>(order.size()));
  std::vector<double> x, y;
  for (const auto& p : points) {
    x.push_back(p.deleted);
    y.push_back(p.accuracy);
  }
  EXPECT_GT(regression_slope(x, y), 0.0);
}

TEST_F(PruningTrends, MixedPruningAccuracyTracksP) {
  const std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const auto points = mixed_pruning(attack_->poisoned, attack_->record, grid, 10, 3);
  EXPECT_EQ(points.size(), grid.size() * 10);
  EXPECT_GT(spearman(grid, mean_accuracy_by_p(points, grid)), 0.9);
}

TEST(Experiment, DeletingAllInsertionsRestoresAccuracy) {
  const GraphBundle clean = make_sbm(SbmConfig{});
  const PoisonResult r = mettack_like(clean, AttackConfig{});
  const GraphBundle repaired =
      r.poisoned.with_adjacency(replay_deletions(r.poisoned.adjacency(),
                                                 std::vector<Edge>(r.record.inserted.begin(), r.record.inserted.end())));
  const MetricsReport m = evaluate_defense(r.poisoned, repaired, r.record, r.record.inserted, 5);
  EXPECT_NEAR(m.accuracy_after, mean_test_accuracy(clean, {}, 5), 0.02);
}

TEST(RunSanitizer, BudgetFromRatio) {
  SbmConfig sc;
  sc.n = 40;
  const GraphBundle g = make_sbm(sc);
  const int b = sanitation_budget(g, 0.1);
  EXPECT_EQ(b, static_cast<int>(std::ceil(0.1 * static_cast<double>(g.edge_count()))));
  SanitizerConfig cfg;
  cfg.linkpred.epochs = 10;
  EXPECT_EQ(static_cast<int>(run_sanitizer("lp-only", g, 0.1, cfg).deleted.size()), b);
  // Ties in similarity can put the tuned threshold one deletion off on a tiny graph.
  EXPECT_NEAR(static_cast<double>(run_sanitizer("jaccard", g, 0.1, cfg).deleted.size()), b, 1.0);
  EXPECT_THROW(run_sanitizer("nope", g, 0.1, {}), InvalidArgument);
  EXPECT_THROW(sanitation_budget(g, 0.0), InvalidArgument);
}

}  // namespace
}  // namespace gsan
