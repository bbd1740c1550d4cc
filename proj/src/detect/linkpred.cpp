#include "gsan/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gsan/adam.hpp"
#include "gsan/errors.hpp"

namespace gsan {

namespace {

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); });
}

void fill_normal(Matrix& m, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sd);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = g(rng);
}

}  // namespace

double reweight_gamma(int n, std::size_t edges) {
  if (edges == 0) throw InvalidArgument("link predictor needs at least one edge");
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return (nn - static_cast<double>(edges)) / static_cast<double>(edges);
}

Matrix linkpred_embed(const LinkPredModel& model, const Matrix& input) {
  const Matrix h1 = ((input * model.w1).rowwise() + model.b1.transpose()).cwiseMax(0.0);
  return (h1 * model.w2).rowwise() + model.b2.transpose();
}

Matrix linkpred_scores(const LinkPredModel& model, const Matrix& input) {
  const Matrix h2 = linkpred_embed(model, input);
  Matrix s = sigmoid(h2 * h2.transpose());
  return 0.5 * (s + s.transpose());
}

LinkPredGradient linkpred_loss_gradient(const LinkPredModel& model, const Matrix& input, const Matrix& adjacency) {
  const Eigen::Index n = input.rows();
  const Matrix pre1 = (input * model.w1).rowwise() + model.b1.transpose();
  const Matrix h1 = pre1.cwiseMax(0.0);
  const Matrix h2 = (h1 * model.w2).rowwise() + model.b2.transpose();
  const Matrix logits = h2 * h2.transpose();
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);

  // softplus(−x) = max(−x,0) + log1p(e^{−|x|}); softplus(x) = softplus(−x) + x.
  const Eigen::ArrayXXd x = logits.array();
  const Eigen::ArrayXXd e = (-x.abs()).exp();
  const Eigen::ArrayXXd sp_neg = (-x).max(0.0) + e.log1p();
  const Eigen::ArrayXXd p = (x >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
  const Eigen::ArrayXXd a = (adjacency.array() != 0.0).cast<double>();
  Eigen::ArrayXXd elem = model.gamma * a * sp_neg + (1.0 - a) * (sp_neg + x);
  Eigen::ArrayXXd g_arr = model.gamma * a * (p - 1.0) + (1.0 - a) * p;
  elem.matrix().diagonal().setZero();
  g_arr.matrix().diagonal().setZero();
  const double loss = elem.sum();

  LinkPredGradient g;
  Matrix g_logits = g_arr.matrix();
  g.loss = loss / pairs;
  g_logits /= pairs;
  const Matrix g_h2 = (g_logits + g_logits.transpose()) * h2;
  g.w2 = h1.transpose() * g_h2;
  g.b2 = g_h2.colwise().sum().transpose();
  const Matrix g_pre1 = (g_h2 * model.w2.transpose()).cwiseProduct((pre1.array() > 0.0).cast<double>().matrix());
  g.w1 = input.transpose() * g_pre1;
  g.b1 = g_pre1.colwise().sum().transpose();
  return g;
}

namespace {

std::size_t count_edges(const Matrix& adjacency) {
  std::size_t edges = 0;
  for (Eigen::Index j = 0; j < adjacency.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) edges += adjacency(i, j) != 0.0;
  return edges;
}

void check_config(const Matrix& input, const Matrix& adjacency, const LinkPredConfig& cfg) {
  if (cfg.hidden < 1 || cfg.embed < 1 || cfg.epochs < 0 || cfg.refresh_epochs < 0 || !(cfg.learning_rate > 0.0)) {
    throw InvalidArgument("bad link predictor config");
  }
  if (input.rows() != adjacency.rows()) throw DimensionError("link predictor input/adjacency mismatch");
}

LinkPredModel fit(LinkPredModel model, const Matrix& input, const Matrix& adjacency, int epochs,
                  const LinkPredConfig& cfg) {
  model.gamma = reweight_gamma(static_cast<int>(adjacency.rows()), count_edges(adjacency));
  Adam a_w1(cfg.learning_rate), a_b1(cfg.learning_rate), a_w2(cfg.learning_rate), a_b2(cfg.learning_rate);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    LinkPredGradient g = linkpred_loss_gradient(model, input, adjacency);
    if (!std::isfinite(g.loss) || !g.w1.allFinite() || !g.w2.allFinite()) {
      throw NonFinite("link predictor diverged at epoch " + std::to_string(epoch));
    }
    a_w1.step(model.w1, g.w1);
    a_b1.step(model.b1, g.b1);
    a_w2.step(model.w2, g.w2);
    a_b2.step(model.b2, g.b2);
  }
  const GmeanResult t = gmean_threshold(linkpred_scores(model, input), adjacency, cfg.seed);
  model.tau_lp = t.tau;
  model.degenerate_threshold = t.degenerate;
  return model;
}

}  // namespace

LinkPredModel linkpred_train(const Matrix& input, const Matrix& adjacency, const LinkPredConfig& cfg) {
  check_config(input, adjacency, cfg);
  std::mt19937_64 rng(cfg.seed);
  LinkPredModel model;
  model.w1.resize(input.cols(), cfg.hidden);
  fill_normal(model.w1, 1.0 / std::sqrt(static_cast<double>(input.cols())), rng);
  model.b1 = Vector::Zero(cfg.hidden);
  model.w2.resize(cfg.hidden, cfg.embed);
  fill_normal(model.w2, 1.0 / std::sqrt(static_cast<double>(cfg.hidden)), rng);
  model.b2 = Vector::Zero(cfg.embed);
  return fit(std::move(model), input, adjacency, cfg.epochs, cfg);
}

LinkPredModel linkpred_train(const Matrix& input, const Matrix& adjacency, const LinkPredConfig& cfg,
                             const LinkPredModel& init) {
  check_config(input, adjacency, cfg);
  if (init.w1.rows() != input.cols()) throw DimensionError("warm-start model does not match input width");
  return fit(init, input, adjacency, cfg.refresh_epochs, cfg);
}

double gmean_at(const std::vector<double>& edge_scores, const std::vector<double>& non_edge_scores, double tau) {
  std::size_t tp = 0, tn = 0;
  for (double s : edge_scores) tp += s >= tau;
  for (double s : non_edge_scores) tn += s < tau;
  const double tpr = edge_scores.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(edge_scores.size());
  const double tnr = non_edge_scores.empty() ? 0.0 : static_cast<double>(tn) / static_cast<double>(non_edge_scores.size());
  return std::sqrt(tpr * tnr);
}

GmeanResult gmean_threshold(const std::vector<double>& edge_scores, const std::vector<double>& non_edge_scores) {
  std::vector<double> pos = edge_scores, neg = non_edge_scores;
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> cand;
  cand.reserve(pos.size() + neg.size());
  std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(cand));
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  GmeanResult r;
  if (cand.empty()) {
    r.degenerate = true;
    return r;
  }
  // Sweep thresholds upward: at u_j, positives with score >= u_j and
  // negatives with score < u_j count as correct.
  const double np = static_cast<double>(pos.size()), nn = static_cast<double>(neg.size());
  std::size_t ip = 0, in = 0, best = 0;
  double best_g = -1.0;
  for (std::size_t j = 0; j < cand.size(); ++j) {
    while (ip < pos.size() && pos[ip] < cand[j]) ++ip;
    while (in < neg.size() && neg[in] < cand[j]) ++in;
    const double tpr = np > 0 ? (np - static_cast<double>(ip)) / np : 0.0;
    const double tnr = nn > 0 ? static_cast<double>(in) / nn : 0.0;
    const double g = std::sqrt(tpr * tnr);
    if (g > best_g) {
      best_g = g;
      best = j;
    }
  }
  r.gmean = best_g;
  r.tau = cand[best];
  if (best > 0) {
    const double mid = 0.5 * (cand[best - 1] + cand[best]);
    if (mid > cand[best - 1]) r.tau = mid;  // adjacent doubles have no interior point
  }
  r.degenerate = cand.size() == 1 || best_g <= 0.0;
  return r;
}

GmeanResult gmean_threshold(const Matrix& scores, const Matrix& adjacency, std::uint64_t seed) {
  const Eigen::Index n = adjacency.rows();
  std::vector<double> pos, neg;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      (adjacency(i, j) != 0.0 ? pos : neg).push_back(scores(i, j));
    }
  }
  const std::size_t cap = 10 * pos.size();
  if (neg.size() > cap) {
    std::mt19937_64 rng(seed);
    std::shuffle(neg.begin(), neg.end(), rng);
    neg.resize(cap);
  }
  return gmean_threshold(pos, neg);
}

}  // namespace gsan
