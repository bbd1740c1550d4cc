#pragma once

#include <iosfwd>
#include <vector>

#include "gsan/dgmm.hpp"
#include "gsan/graph.hpp"
#include "gsan/linear_gnn.hpp"
#include "gsan/linkpred.hpp"

namespace gsan {

struct DetectorOutput {
  Vector scores;  // energy (ClassDiv) or lowest incident edge score (LinkPred)
  std::vector<int> victims;
  std::vector<int> normals;
  double threshold = 0.0;
  bool degenerate = false;
};

// softmax(PCA(X, C)/T): attributes reduced to class-count dimensions.
Matrix pca_class_prob(const Matrix& x, int num_classes, double temperature);

// Columns (P₁^X, P₂^X, D^X, P₁^S, P₂^S, D^S), or (P₁^S, P₂^S, D^S) when the
// bundle has no attributes or `use_attributes` is false.
Matrix build_hybrid_features(const GraphBundle& bundle, const TrainedGnn& gnn, double temperature,
                             bool use_attributes = true);

// Victims are nodes with energy strictly above κ.
DetectorOutput classdiv_detect(const Vector& energies, double kappa);
DetectorOutput classdiv_detect(const DgmmModel& model, const Matrix& features, const ThresholdState& state);

// Link-predictor input concat(Z | softmax(PCA(X,C)/T)), or Z alone.
Matrix linkpred_input(const GraphBundle& bundle, const TrainedGnn& gnn, double temperature, bool use_attributes = true);

// Existential rule: a node is a victim if any incident edge scores below τ.
// Universal rule: every incident edge scores below τ (isolated nodes are normal).
DetectorOutput linkpred_detect(const Matrix& scores, const Matrix& adjacency, double tau, bool universal = false);
DetectorOutput linkpred_detect(const LinkPredModel& model, const Matrix& input, const Matrix& adjacency,
                               bool universal = false);

// CSV rows "node,score,is_victim,step".
void write_detector_header(std::ostream& out);
void write_detector_rows(std::ostream& out, const DetectorOutput& det, int step);

}  // namespace gsan
