#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gsan/errors.hpp"
#include "gsan/meta_grad.hpp"
#include "gsan/synthetic.hpp"
#include "helpers.hpp"

using namespace gsan;
using gsan::testing::random_adjacency;
using gsan::testing::random_matrix;

namespace {

struct Instance {
  Matrix a, x, w;
  std::vector<int> labels, train;
  OuterTerms terms;
};

Instance make_instance(int n, int d, int c, std::uint64_t seed, double density = 0.4) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.a = random_adjacency(n, density, rng);
  in.x = random_matrix(n, d, rng);
  in.w = random_matrix(d, c, rng);
  in.labels.resize(n);
  std::uniform_int_distribution<int> cls(0, c - 1);
  for (auto& l : in.labels) l = cls(rng);
  for (int i = 0; i < n / 3; ++i) in.train.push_back(i);
  for (int i = n / 3; i < n / 2; ++i) {
    in.terms.val_nodes.push_back(i);
    in.terms.val_targets.push_back(in.labels[i]);
  }
  for (int i = n / 2; i < n; ++i) {
    in.terms.test_nodes.push_back(i);
    in.terms.test_targets.push_back(cls(rng));
  }
  in.terms.lambdas = {0.6, 0.4};
  return in;
}

double loop_outer_loss(const Matrix& a, const Matrix& x, const Matrix& w, const OuterTerms& t, double eta) {
  const int n = static_cast<int>(a.rows()), d = static_cast<int>(x.cols()), c = static_cast<int>(w.cols());
  std::vector<double> deg(n, 1.0), deg0(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      deg[i] += a(i, j);
      deg0[i] += a(i, j);
    }
  Matrix ah(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ah(i, j) = (a(i, j) + (i == j)) / std::sqrt(deg[i] * deg[j]);
  auto log_prob = [&](int i, int target) {
    std::vector<double> z(c, 0.0);
    for (int k = 0; k < c; ++k)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          for (int f = 0; f < d; ++f) z[k] += ah(i, j) * ah(j, l) * x(l, f) * w(f, k);
    double den = 0;
    for (double v : z) den += std::exp(v);
    return z[target] - std::log(den);
  };
  double loss = 0;
  for (std::size_t r = 0; r < t.val_nodes.size(); ++r) loss -= t.lambdas.lambda_val * log_prob(t.val_nodes[r], t.val_targets[r]);
  for (std::size_t r = 0; r < t.test_nodes.size(); ++r) loss -= t.lambdas.lambda_test * log_prob(t.test_nodes[r], t.test_targets[r]);
  // ½ Σ A_ij ‖x_i/√d_i − x_j/√d_j‖².
  double smooth = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (a(i, j) == 0) continue;
      for (int f = 0; f < d; ++f) {
        const double diff = x(i, f) / std::sqrt(deg0[i]) - x(j, f) / std::sqrt(deg0[j]);
        smooth += 0.5 * a(i, j) * diff * diff;
      }
    }
  return loss + eta * smooth;
}

void expect_matches_fd(const Instance& in, const OuterLossConfig& cfg, const InnerProblem& inner) {
  const Matrix g = meta_gradient_at(in.a, in.x, in.w, in.terms, cfg, inner);
  auto loss = [&](const Matrix& a) {
    if (cfg.mode == GradMode::FirstOrder) return outer_loss_at(a, in.x, in.w, in.terms, cfg.eta);
    const Matrix p = propagate(normalize_adjacency(a), in.x);
    const Matrix wk = unroll_weights(p, in.w, inner, cfg.unroll_steps, cfg.unroll_lr);
    return outer_loss_at(a, in.x, wk, in.terms, cfg.eta);
  };
  const int n = static_cast<int>(in.a.rows());
  const double h = 1e-4;
  int checked = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      Matrix ap = in.a, am = in.a;
      ap(u, v) += h; ap(v, u) += h;
      am(u, v) -= h; am(v, u) -= h;
      const double fd = (loss(ap) - loss(am)) / (2 * h);
      const double an = 2.0 * g(u, v);
      const double scale = std::max(std::abs(fd), std::abs(an));
      if (scale < 1e-7) continue;
      EXPECT_LE(std::abs(fd - an) / scale, 1e-4) << "(" << u << "," << v << ") fd=" << fd << " analytic=" << an;
      ++checked;
    }
  }
  EXPECT_GT(checked, n);
}

std::vector<int> all_nodes(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST(LambdaSchedule, Examples) {
  EXPECT_EQ(lambda_schedule(0, 10).lambda_val, 1.0);
  EXPECT_EQ(lambda_schedule(0, 10).lambda_test, 0.0);
  EXPECT_EQ(lambda_schedule(10, 10).lambda_val, 0.0);
  EXPECT_EQ(lambda_schedule(10, 10).lambda_test, 1.0);
  EXPECT_EQ(lambda_schedule(5, 10).lambda_val, 0.5);
  EXPECT_THROW(lambda_schedule(11, 10), OutOfRange);
  EXPECT_THROW(lambda_schedule(-1, 10), OutOfRange);
}

TEST(LambdaSchedule, SumsToOneExactly) {
  for (int b = 1; b <= 400; ++b) {
    for (int t = 0; t <= b; ++t) {
      const auto p = lambda_schedule(t, b);
      ASSERT_EQ(p.lambda_val + p.lambda_test, 1.0) << t << "/" << b;
      ASSERT_GE(p.lambda_val, 0.0);
      ASSERT_LE(p.lambda_val, 1.0);
    }
  }
}

TEST(OuterLoss, MatchesLoopOracle) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Instance in = make_instance(7, 3, 3, seed);
    EXPECT_NEAR(outer_loss_at(in.a, in.x, in.w, in.terms, 0.3), loop_outer_loss(in.a, in.x, in.w, in.terms, 0.3), 1e-10);
  }
}

TEST(OuterLoss, OneHotProbsLeaveOnlySmoother) {
  // Huge weights on separable features push probabilities to one-hot.
  Matrix a = Matrix::Zero(4, 4);
  a(0, 1) = a(1, 0) = a(2, 3) = a(3, 2) = 1;
  Matrix x(4, 2);
  x << 1, 0, 1, 0, 0, 1, 0, 1;
  Matrix w = 800.0 * Matrix::Identity(2, 2);
  OuterTerms t;
  t.val_nodes = {0, 2};
  t.val_targets = {0, 1};
  t.test_nodes = {1, 3};
  t.test_targets = {0, 1};
  t.lambdas = {0.5, 0.5};
  const double eta = 0.25;
  Matrix lap = laplacian(a);
  EXPECT_NEAR(outer_loss_at(a, x, w, t, eta), eta * smoothness(x, lap), 1e-12);
}

TEST(OuterLoss, ValidationOnlyReduction) {
  SbmConfig sc;
  sc.n = 40;
  sc.seed = 4;
  GraphBundle b = make_sbm(sc);
  TrainedGnn gnn = train_inner(b, TrainConfig{});
  const double loss = outer_loss(gnn, b, all_nodes(b.n()), {1.0, 0.0}, 0.0);
  double nll = 0;
  for (int i : b.split().val) nll -= std::log(gnn.probs(i, b.labels()[i]));
  EXPECT_NEAR(loss, nll, 1e-10);
}

TEST(OuterLoss, EmptyFocusThrows) {
  SbmConfig sc;
  sc.n = 40;
  GraphBundle b = make_sbm(sc);
  TrainedGnn gnn = train_inner(b, TrainConfig{});
  EXPECT_THROW(outer_loss(gnn, b, b.split().train, {0.5, 0.5}, 0.0), EmptyFocus);
}

TEST(MetaGradient, SmootherOnlyMatchesClosedForm) {
  Instance in = make_instance(9, 3, 2, 7, 0.45);
  in.terms.lambdas = {0.0, 0.0};
  OuterLossConfig cfg;
  cfg.eta = 1.0;
  const Matrix g = meta_gradient_at(in.a, in.x, in.w, in.terms, cfg, {});
  const int n = 9;
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d[i] += in.a(i, j);
  auto k = [&](int i, int j) { return in.x.row(i).dot(in.x.row(j)); };
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (d[u] == 0 || d[v] == 0) continue;
      double su = 0, sv = 0;
      for (int j = 0; j < n; ++j) {
        if (in.a(u, j) != 0 && d[j] > 0) su += k(u, j) / std::sqrt(d[u] * d[j]);
        if (in.a(v, j) != 0 && d[j] > 0) sv += k(v, j) / std::sqrt(d[v] * d[j]);
      }
      // Derivative of Tr(XᵀLX) along A_uv = A_vu, halved for the symmetric entry.
      const double dir = -(2.0 * k(u, v) / std::sqrt(d[u] * d[v]) - su / d[u] - sv / d[v]);
      EXPECT_NEAR(g(u, v), 0.5 * dir, 1e-8) << u << "," << v;
    }
  }
}

TEST(MetaGradient, FirstOrderMatchesFiniteDifferences) {
  for (std::uint64_t seed : {11u, 12u}) {
    Instance in = make_instance(8, 3, 3, seed);
    OuterLossConfig cfg;
    cfg.eta = 0.05;
    expect_matches_fd(in, cfg, {});
  }
}

TEST(MetaGradient, UnrolledMatchesFiniteDifferences) {
  Instance in = make_instance(8, 3, 3, 13);
  OuterLossConfig cfg;
  cfg.eta = 0.05;
  cfg.mode = GradMode::Unrolled;
  cfg.unroll_steps = 4;
  cfg.unroll_lr = 0.5;
  InnerProblem inner{&in.labels, &in.train, 5e-4};
  expect_matches_fd(in, cfg, inner);
}

TEST(MetaGradient, UnrolledZeroStepsIsFirstOrder) {
  Instance in = make_instance(10, 3, 2, 14);
  InnerProblem inner{&in.labels, &in.train, 5e-4};
  OuterLossConfig fo;
  OuterLossConfig un = fo;
  un.mode = GradMode::Unrolled;
  un.unroll_steps = 0;
  EXPECT_EQ(meta_gradient_at(in.a, in.x, in.w, in.terms, fo, inner),
            meta_gradient_at(in.a, in.x, in.w, in.terms, un, inner));
  EXPECT_EQ(mode_label(un), "unrolled(0)");
  EXPECT_EQ(mode_label(fo), "first_order");
}

TEST(MetaGradient, SymmetricAndPermutationEquivariant) {
  Instance in = make_instance(9, 3, 3, 15);
  OuterLossConfig cfg;
  cfg.eta = 0.1;
  const Matrix g = meta_gradient_at(in.a, in.x, in.w, in.terms, cfg, {});
  EXPECT_EQ(g, g.transpose());

  std::mt19937_64 rng(3);
  std::vector<int> perm = all_nodes(9);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(9);
  for (int i = 0; i < 9; ++i) p.indices()[i] = perm[i];
  OuterTerms pt = in.terms;
  for (auto& i : pt.val_nodes) i = perm[i];
  for (auto& i : pt.test_nodes) i = perm[i];
  const Matrix gp = meta_gradient_at(p * in.a * p.transpose(), p * in.x, in.w, pt, cfg, {});
  EXPECT_LE((gp - p * g * p.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MaskGradient, Examples) {
  std::mt19937_64 rng(5);
  Matrix g = random_matrix(5, 5, rng);
  g = g + g.transpose();
  EXPECT_EQ(mask_gradient(g, all_nodes(5)), Matrix::Zero(5, 5));
  EXPECT_EQ(mask_gradient(g, {}), g);
  Matrix m = mask_gradient(g, {0, 1, 3, 4});
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(m(i, j), (i == 2 || j == 2) ? g(i, j) : 0.0);
  EXPECT_EQ(mask_gradient(m, {0, 1, 3, 4}), m);
}

TEST(SelectEdge, Examples) {
  Matrix g = Matrix::Zero(6, 6);
  g(0, 1) = g(1, 0) = 0.7;
  auto one = select_edge(g, {Edge(0, 1)});
  ASSERT_TRUE(one);
  EXPECT_EQ(one->edge, Edge(0, 1));
  g(0, 1) = g(1, 0) = -0.2;
  g(2, 3) = g(3, 2) = -0.1;
  EXPECT_FALSE(select_edge(g, {Edge(0, 1), Edge(2, 3)}));
  g(1, 5) = g(5, 1) = 0.4;
  g(2, 3) = g(3, 2) = 0.4;
  auto tie = select_edge(g, {Edge(2, 3), Edge(1, 5)});
  ASSERT_TRUE(tie);
  EXPECT_EQ(tie->edge, Edge(1, 5));
}

TEST(CandidateEdges, IncidentToVictims) {
  std::vector<Edge> edges = {Edge(0, 1), Edge(1, 2), Edge(3, 4)};
  auto c = candidate_edges(edges, {2}, 5);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], Edge(1, 2));
}

TEST(MetaGradient, FirstOrderPredictionHolds) {
  int ok = 0, trials = 0;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    SbmConfig sc;
    sc.n = 20;
    sc.p_in = 0.35;
    sc.p_out = 0.1;
    sc.feature_dim = 4;
    sc.train_fraction = 0.2;
    sc.val_fraction = 0.2;
    sc.seed = seed;
    GraphBundle b = make_sbm(sc);
    TrainedGnn gnn = train_inner(b, TrainConfig{});
    std::mt19937_64 rng(seed);
    std::vector<int> nodes = all_nodes(b.n());
    std::shuffle(nodes.begin(), nodes.end(), rng);
    std::vector<int> victims(nodes.begin(), nodes.begin() + 5);
    std::vector<int> normals(nodes.begin() + 5, nodes.end());
    std::sort(normals.begin(), normals.end());
    const LambdaPair lambdas{0.7, 0.3};
    OuterLossConfig cfg;
    cfg.eta = 1e-4;
    Matrix g;
    OuterTerms terms;
    try {
      terms = make_outer_terms(b, gnn, normals, lambdas);
    } catch (const EmptyFocus&) {
      continue;
    }
    g = mask_gradient(meta_gradient_at(b.adjacency(), b.model_features(), gnn.weights, terms, cfg, {}), normals);
    auto choice = select_edge(g, candidate_edges(b.edge_list(), victims, b.n()));
    if (!choice) continue;
    ++trials;
    const double before = outer_loss_at(b.adjacency(), b.model_features(), gnn.weights, terms, cfg.eta);
    const Matrix after_a = apply_edits(b.adjacency(), {choice->edge}, {});
    const double after = outer_loss_at(after_a, b.model_features(), gnn.weights, terms, cfg.eta);
    if (after <= before + 1e-12) ++ok;
  }
  ASSERT_GE(trials, 20);
  EXPECT_GE(static_cast<double>(ok) / trials, 0.9) << ok << "/" << trials;
}

TEST(GradientTrace, Csv) {
  std::ostringstream out;
  write_gradient_trace_csv(out, {{0, Edge(1, 2), 0.5, 1.0}});
  EXPECT_EQ(out.str(), "step,u,v,gradient,lambda_val\n0,1,2,0.5,1\n");
}
