#include "gsan/detectors.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "gsan/divergence.hpp"
#include "gsan/pca.hpp"
#include "gsan/text.hpp"

namespace gsan {

namespace {

DetectorOutput partition(Vector scores, const std::vector<char>& victim, double threshold) {
  DetectorOutput out;
  out.scores = std::move(scores);
  out.threshold = threshold;
  for (std::size_t i = 0; i < victim.size(); ++i) {
    (victim[i] ? out.victims : out.normals).push_back(static_cast<int>(i));
  }
  return out;
}

// prox₁, prox₂ and D_JS of a row-stochastic matrix, written into three columns.
void divergence_columns(const Matrix& s, const Matrix& adjacency, Matrix& out, Eigen::Index first) {
  const Proximity p = proximity_metrics(pairwise_kl(s), adjacency);
  out.col(first) = p.prox1;
  out.col(first + 1) = p.prox2;
  out.col(first + 2) = js_divergence(s, adjacency);
}

}  // namespace

Matrix pca_class_prob(const Matrix& x, int num_classes, double temperature) {
  const int k = std::min<int>(num_classes, static_cast<int>(x.cols()));
  return soft_class_prob(pca_reduce(x, k), temperature);
}

Matrix build_hybrid_features(const GraphBundle& bundle, const TrainedGnn& gnn, double temperature, bool use_attributes) {
  const Matrix s = soft_class_prob(gnn.logits, temperature);
  const bool attrs = use_attributes && bundle.has_features();
  Matrix m(bundle.n(), attrs ? 6 : 3);
  if (attrs) {
    divergence_columns(pca_class_prob(bundle.features(), bundle.num_classes(), temperature), bundle.adjacency(), m, 0);
    divergence_columns(s, bundle.adjacency(), m, 3);
  } else {
    divergence_columns(s, bundle.adjacency(), m, 0);
  }
  return m;
}

DetectorOutput classdiv_detect(const Vector& energies, double kappa) {
  std::vector<char> victim(static_cast<std::size_t>(energies.size()));
  for (Eigen::Index i = 0; i < energies.size(); ++i) victim[static_cast<std::size_t>(i)] = energies(i) > kappa;
  return partition(energies, victim, kappa);
}

DetectorOutput classdiv_detect(const DgmmModel& model, const Matrix& features, const ThresholdState& state) {
  return classdiv_detect(dgmm_energy(model, features), state.kappa);
}

Matrix linkpred_input(const GraphBundle& bundle, const TrainedGnn& gnn, double temperature, bool use_attributes) {
  if (!use_attributes || !bundle.has_features()) return gnn.logits;
  const Matrix xp = pca_class_prob(bundle.features(), bundle.num_classes(), temperature);
  Matrix in(bundle.n(), gnn.logits.cols() + xp.cols());
  in << gnn.logits, xp;
  return in;
}

DetectorOutput linkpred_detect(const Matrix& scores, const Matrix& adjacency, double tau, bool universal) {
  const Eigen::Index n = adjacency.rows();
  Vector min_score = Vector::Constant(n, std::numeric_limits<double>::infinity());
  std::vector<char> any_low(static_cast<std::size_t>(n), 0), all_low(static_cast<std::size_t>(n), 1),
      has_edge(static_cast<std::size_t>(n), 0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j || adjacency(i, j) == 0.0) continue;
      const double s = scores(i, j);
      const auto iu = static_cast<std::size_t>(i);
      has_edge[iu] = 1;
      min_score(i) = std::min(min_score(i), s);
      if (s < tau) {
        any_low[iu] = 1;
      } else {
        all_low[iu] = 0;
      }
    }
  }
  std::vector<char> victim(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < victim.size(); ++i) victim[i] = universal ? (has_edge[i] && all_low[i]) : any_low[i];
  return partition(min_score, victim, tau);
}

DetectorOutput linkpred_detect(const LinkPredModel& model, const Matrix& input, const Matrix& adjacency, bool universal) {
  DetectorOutput out = linkpred_detect(linkpred_scores(model, input), adjacency, model.tau_lp, universal);
  out.degenerate = model.degenerate_threshold;
  return out;
}

void write_detector_header(std::ostream& out) { out << "node,score,is_victim,step\n"; }

void write_detector_rows(std::ostream& out, const DetectorOutput& det, int step) {
  std::vector<char> victim(static_cast<std::size_t>(det.scores.size()), 0);
  for (int v : det.victims) victim[static_cast<std::size_t>(v)] = 1;
  for (Eigen::Index i = 0; i < det.scores.size(); ++i) {
    out << i << ',' << text::format_double(det.scores(i)) << ',' << int(victim[static_cast<std::size_t>(i)]) << ','
        << step << '\n';
  }
}

}  // namespace gsan
