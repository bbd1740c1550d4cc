#include "gsan/meta_grad.hpp"

#include <cmath>
#include <ostream>

#include "gsan/errors.hpp"
#include "gsan/kernels.hpp"
#include "gsan/text.hpp"

namespace gsan {

void OuterLossConfig::validate() const {
  if (!(eta >= 0.0)) throw InvalidArgument("eta must be nonnegative");
  if (budget < 1) throw InvalidArgument("budget must be at least 1");
  if (mode == GradMode::Unrolled) {
    if (unroll_steps < 0) throw InvalidArgument("unroll_steps must be nonnegative");
    if (!(unroll_lr > 0.0)) throw InvalidArgument("unroll_lr must be positive");
  }
}

std::string mode_label(const OuterLossConfig& cfg) {
  if (cfg.mode == GradMode::FirstOrder) return "first_order";
  return "unrolled(" + std::to_string(cfg.unroll_steps) + ")";
}

LambdaPair lambda_schedule(int t, int budget) {
  if (budget < 1 || t < 0 || t > budget) {
    throw OutOfRange("lambda_schedule: t=" + std::to_string(t) + " outside [0," + std::to_string(budget) + "]");
  }
  LambdaPair p;
  p.lambda_test = static_cast<double>(t) / static_cast<double>(budget);
  p.lambda_val = 1.0 - p.lambda_test;
  return p;
}

namespace {

std::vector<char> node_mask(const std::vector<int>& nodes, int n) {
  std::vector<char> m(static_cast<std::size_t>(n), 0);
  for (int i : nodes) {
    if (i < 0 || i >= n) throw OutOfRange("node index " + std::to_string(i) + " out of range");
    m[static_cast<std::size_t>(i)] = 1;
  }
  return m;
}

// Row degrees of a (possibly continuous) adjacency plus `offset`.
Vector row_degrees(const Matrix& a, double offset) {
  return a.rowwise().sum().array() + offset;
}

Vector inv_sqrt(const Vector& d) {
  Vector out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) out(i) = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  return out;
}

// Normalization D^{-1/2}(A + sI)D^{-1/2} on a continuous adjacency, D from row sums.
Matrix normalize_continuous(const Matrix& a, double self_loop, Vector* degree_out) {
  const Vector d = row_degrees(a, self_loop);
  const Vector s = inv_sqrt(d);
  Matrix m = a;
  m.diagonal().array() += self_loop;
  m = s.asDiagonal() * m * s.asDiagonal();
  if (degree_out) *degree_out = d;
  return m;
}

// Given ∂L/∂M for M = D^{-1/2}(A + sI)D^{-1/2} with d_u the row sums of
// A + sI, returns ∂L/∂A_uv = Ḡ_uv/√(d_u d_v) − r_u/(2 d_u), where
// r_u = Σ_j Ḡ_uj M_uj + Σ_i Ḡ_iu M_iu. Terms with d = 0 are dropped.
Matrix normalization_pullback(const Matrix& gbar, const Matrix& m, const Vector& d) {
  const Eigen::Index n = m.rows();
  const Vector s = inv_sqrt(d);
  const Matrix gt = gbar.transpose();
  const auto& k = kernels::active();
  Vector half_r_over_d(n);
  for (Eigen::Index u = 0; u < n; ++u) {
    const auto len = static_cast<std::size_t>(n);
    const double r = k.dot(gt.col(u).data(), m.col(u).data(), len) + k.dot(gbar.col(u).data(), m.col(u).data(), len);
    half_r_over_d(u) = d(u) > 0.0 ? 0.5 * r / d(u) : 0.0;
  }
  Matrix out = s.asDiagonal() * gbar * s.asDiagonal();
  out.colwise() -= half_r_over_d;
  return out;
}

// ∂/∂Z of the supervised outer terms: rows λ(S_i − onehot(target_i)).
Matrix outer_logit_grad(const Matrix& probs, const OuterTerms& terms) {
  Matrix g = Matrix::Zero(probs.rows(), probs.cols());
  auto add = [&](const std::vector<int>& nodes, const std::vector<int>& targets, double lambda) {
    if (lambda == 0.0) return;
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const int i = nodes[r];
      g.row(i) += lambda * probs.row(i);
      g(i, targets[r]) -= lambda;
    }
  };
  add(terms.val_nodes, terms.val_targets, terms.lambdas.lambda_val);
  add(terms.test_nodes, terms.test_targets, terms.lambdas.lambda_test);
  return g;
}

double supervised_loss(const Matrix& probs, const OuterTerms& terms) {
  double loss = 0.0;
  auto add = [&](const std::vector<int>& nodes, const std::vector<int>& targets, double lambda) {
    if (lambda == 0.0) return;
    double s = 0.0;
    for (std::size_t r = 0; r < nodes.size(); ++r) s -= std::log(probs(nodes[r], targets[r]));
    loss += lambda * s;
  };
  add(terms.val_nodes, terms.val_targets, terms.lambdas.lambda_val);
  add(terms.test_nodes, terms.test_targets, terms.lambdas.lambda_test);
  return loss;
}

// ∂(η Tr(XᵀLX))/∂A. Off the isolated-node set Tr(XᵀLX) = Σ‖x_i‖² − ⟨N, XXᵀ⟩
// with N = D^{-1/2}AD^{-1/2}, so only the second term has a gradient.
Matrix smoother_gradient(const Matrix& a, const Matrix& x, double eta) {
  Vector d;
  const Matrix nrm = normalize_continuous(a, 0.0, &d);
  const Matrix k = x * x.transpose();
  return -eta * normalization_pullback(k, nrm, d);
}

// Softmax Jacobian applied row-wise on the train rows: S⊙Δ − S(S·Δ).
Matrix softmax_jvp_train(const Matrix& probs, const Matrix& delta, const std::vector<int>& train) {
  Matrix out = Matrix::Zero(probs.rows(), probs.cols());
  for (int i : train) {
    const double sd = probs.row(i).dot(delta.row(i));
    out.row(i) = probs.row(i).cwiseProduct(delta.row(i)) - sd * probs.row(i);
  }
  return out;
}

// Train-row residual softmax(Z) − Y, zero elsewhere.
Matrix train_residual(const Matrix& probs, const InnerProblem& inner) {
  Matrix r = Matrix::Zero(probs.rows(), probs.cols());
  for (int i : *inner.train) {
    r.row(i) = probs.row(i);
    r(i, (*inner.labels)[static_cast<std::size_t>(i)]) -= 1.0;
  }
  return r;
}

Matrix symmetrize(const Matrix& g) {
  Matrix s = 0.5 * (g + g.transpose());
  if (!s.allFinite()) throw NonFinite("meta-gradient contains non-finite entries");
  return s;
}

Matrix first_order_gradient(const Matrix& a, const Matrix& x, const Matrix& w, const OuterTerms& terms, double eta) {
  Vector d;
  const Matrix m = normalize_continuous(a, 1.0, &d);
  const Matrix q = x * w;
  const Matrix mq = m * q;
  const Matrix probs = row_softmax(m * mq);
  const Matrix gz = outer_logit_grad(probs, terms);
  const Matrix gm = gz * mq.transpose() + m * (gz * q.transpose());
  Matrix g = normalization_pullback(gm, m, d);
  if (eta != 0.0) g += smoother_gradient(a, x, eta);
  return symmetrize(g);
}

void check_inner(const InnerProblem& inner) {
  if (!inner.labels || !inner.train) throw InvalidArgument("unrolled meta-gradient needs labels and a train set");
  if (inner.train->empty()) throw EmptySubset("empty training set");
}

}  // namespace

OuterTerms make_outer_terms(const GraphBundle& bundle, const TrainedGnn& gnn, const std::vector<int>& focus,
                            const LambdaPair& lambdas) {
  const auto in_focus = node_mask(focus, bundle.n());
  const auto& labels = bundle.labels();
  const auto pseudo = predict(gnn.probs);
  OuterTerms t;
  t.lambdas = lambdas;
  for (int i : bundle.split().val) {
    if (in_focus[static_cast<std::size_t>(i)]) {
      t.val_nodes.push_back(i);
      t.val_targets.push_back(labels[static_cast<std::size_t>(i)]);
    }
  }
  for (int i : bundle.split().test) {
    if (in_focus[static_cast<std::size_t>(i)]) {
      t.test_nodes.push_back(i);
      t.test_targets.push_back(pseudo[static_cast<std::size_t>(i)]);
    }
  }
  if (t.val_nodes.empty() && t.test_nodes.empty()) throw EmptyFocus("no validation or test node in the loss focus");
  return t;
}

double outer_loss_at(const Matrix& adjacency, const Matrix& x, const Matrix& w, const OuterTerms& terms, double eta) {
  const Matrix m = normalize_continuous(adjacency, 1.0, nullptr);
  const Matrix probs = row_softmax(m * (m * (x * w)));
  double loss = supervised_loss(probs, terms);
  if (eta != 0.0) {
    const Matrix nrm = normalize_continuous(adjacency, 0.0, nullptr);
    Matrix lap = -nrm;
    const Vector d = row_degrees(adjacency, 0.0);
    for (Eigen::Index i = 0; i < d.size(); ++i) lap(i, i) += d(i) > 0.0 ? 1.0 : 0.0;
    loss += eta * smoothness(x, lap);
  }
  return loss;
}

double outer_loss(const TrainedGnn& gnn, const GraphBundle& bundle, const std::vector<int>& focus,
                  const LambdaPair& lambdas, double eta) {
  const OuterTerms terms = make_outer_terms(bundle, gnn, focus, lambdas);
  return outer_loss_at(bundle.adjacency(), bundle.model_features(), gnn.weights, terms, eta);
}

Matrix unroll_weights(const Matrix& propagated, const Matrix& w0, const InnerProblem& inner, int steps, double lr) {
  check_inner(inner);
  const double t = static_cast<double>(inner.train->size());
  Matrix w = w0;
  for (int k = 0; k < steps; ++k) {
    const Matrix r = train_residual(row_softmax(propagated * w), inner);
    w -= lr * (propagated.transpose() * r / t + inner.weight_decay * w);
  }
  return w;
}

Matrix meta_gradient_at(const Matrix& adjacency, const Matrix& x, const Matrix& w, const OuterTerms& terms,
                        const OuterLossConfig& cfg, const InnerProblem& inner) {
  cfg.validate();
  if (cfg.mode == GradMode::FirstOrder || cfg.unroll_steps == 0) {
    return first_order_gradient(adjacency, x, w, terms, cfg.eta);
  }
  check_inner(inner);
  const double t = static_cast<double>(inner.train->size());
  const double lr = cfg.unroll_lr;
  const int steps = cfg.unroll_steps;

  Vector d;
  const Matrix m = normalize_continuous(adjacency, 1.0, &d);
  const Matrix mx = m * x;
  const Matrix p = m * mx;

  std::vector<Matrix> ws;
  ws.reserve(static_cast<std::size_t>(steps) + 1);
  ws.push_back(w);
  for (int k = 0; k < steps; ++k) {
    const Matrix r = train_residual(row_softmax(p * ws.back()), inner);
    ws.push_back(ws.back() - lr * (p.transpose() * r / t + inner.weight_decay * ws.back()));
  }

  const Matrix gz = outer_logit_grad(row_softmax(p * ws.back()), terms);
  Matrix p_bar = gz * ws.back().transpose();
  Matrix w_bar = p.transpose() * gz;
  for (int k = steps - 1; k >= 0; --k) {
    const Matrix& wk = ws[static_cast<std::size_t>(k)];
    const Matrix probs = row_softmax(p * wk);
    const Matrix r = train_residual(probs, inner);
    const Matrix jv = softmax_jvp_train(probs, p * w_bar, *inner.train);
    // W_{k+1} = W_k − lr g(W_k, P), g = PᵀR(PW)/t + wd W.
    p_bar -= (lr / t) * (r * w_bar.transpose() + jv * wk.transpose());
    w_bar -= lr * (p.transpose() * jv / t + inner.weight_decay * w_bar);
  }

  // P = M M X.
  const Matrix gm = p_bar * mx.transpose() + m * (p_bar * x.transpose());
  Matrix g = normalization_pullback(gm, m, d);
  if (cfg.eta != 0.0) g += smoother_gradient(adjacency, x, cfg.eta);
  return symmetrize(g);
}

Matrix meta_gradient(const GraphBundle& bundle, const TrainedGnn& gnn, const OuterLossConfig& cfg,
                     const LambdaPair& lambdas, const std::vector<int>& focus, double weight_decay) {
  const OuterTerms terms = make_outer_terms(bundle, gnn, focus, lambdas);
  InnerProblem inner{&bundle.labels(), &bundle.split().train, weight_decay};
  return meta_gradient_at(bundle.adjacency(), bundle.model_features(), gnn.weights, terms, cfg, inner);
}

Matrix mask_gradient(const Matrix& g, const std::vector<int>& normals) {
  const auto normal = node_mask(normals, static_cast<int>(g.rows()));
  Matrix out = g;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    if (!normal[static_cast<std::size_t>(j)]) continue;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      if (normal[static_cast<std::size_t>(i)]) out(i, j) = 0.0;
    }
  }
  return out;
}

std::vector<Edge> candidate_edges(const std::vector<Edge>& edges, const std::vector<int>& victims, int n) {
  const auto victim = node_mask(victims, n);
  std::vector<Edge> out;
  for (const Edge& e : edges) {
    if (victim[static_cast<std::size_t>(e.u)] || victim[static_cast<std::size_t>(e.v)]) out.push_back(e);
  }
  return out;
}

std::optional<EdgeChoice> select_edge(const Matrix& g, const std::vector<Edge>& candidates) {
  std::optional<EdgeChoice> best;
  for (const Edge& e : candidates) {
    const double v = g(e.u, e.v);
    if (!(v > 0.0)) continue;
    if (!best || v > best->gradient || (v == best->gradient && e < best->edge)) best = EdgeChoice{e, v};
  }
  return best;
}

void write_gradient_trace_csv(std::ostream& out, const std::vector<GradientTraceRow>& rows) {
  out << "step,u,v,gradient,lambda_val\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.edge.u << ',' << r.edge.v << ',' << text::format_double(r.gradient) << ','
        << text::format_double(r.lambda_val) << '\n';
  }
}

}  // namespace gsan
