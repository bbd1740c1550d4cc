#include "gsan/dgmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gsan/adam.hpp"
#include "gsan/errors.hpp"
#include "gsan/linear_gnn.hpp"

namespace gsan {

namespace {

struct Hidden {
  Matrix pre;  // before ReLU
  Matrix act;
};

Hidden hidden_layer(const DgmmModel& model, const Matrix& m) {
  Hidden h;
  h.pre = (m * model.w1).rowwise() + model.b1.transpose();
  h.act = h.pre.cwiseMax(0.0);
  return h;
}

Matrix membership_from_hidden(const DgmmModel& model, const Hidden& h) {
  return row_softmax((h.act * model.w2).rowwise() + model.b2.transpose());
}

struct Component {
  Eigen::LLT<Matrix> chol;
  double log_norm = 0.0;  // log φ_k − ½(m ln 2π + ln det Σ_k)
};

std::vector<Component> factor_components(const Vector& phi, const std::vector<Matrix>& sigma, double reg_eps) {
  std::vector<Component> comps(sigma.size());
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    const auto dim = sigma[k].rows();
    Matrix reg = sigma[k];
    reg.diagonal().array() += reg_eps;
    comps[k].chol.compute(reg);
    if (comps[k].chol.info() != Eigen::Success) {
      throw SingularCovariance("covariance of component " + std::to_string(k) + " is not positive definite");
    }
    const Matrix l = comps[k].chol.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    if (!std::isfinite(log_det)) throw SingularCovariance("degenerate covariance determinant");
    comps[k].log_norm = std::log(std::max(phi(static_cast<Eigen::Index>(k)), 1e-300)) -
                        0.5 * (static_cast<double>(dim) * std::log(2.0 * std::numbers::pi) + log_det);
  }
  return comps;
}

// Per-row log(φ_k N_k) in an n×K matrix.
Matrix component_log_density(const Matrix& m, const std::vector<Vector>& mu, const std::vector<Component>& comps) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(comps.size()));
  for (std::size_t k = 0; k < comps.size(); ++k) {
    Matrix delta = (m.rowwise() - mu[k].transpose()).transpose();  // dim×n
    const Matrix solved = comps[k].chol.matrixL().solve(delta);
    out.col(static_cast<Eigen::Index>(k)) = comps[k].log_norm - 0.5 * solved.colwise().squaredNorm().transpose().array();
  }
  return out;
}

Vector neg_logsumexp_rows(const Matrix& x) {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mx = x.row(i).maxCoeff();
    out(i) = -(mx + std::log((x.row(i).array() - mx).exp().sum()));
  }
  return out;
}

}  // namespace

Matrix dgmm_membership(const DgmmModel& model, const Matrix& m) {
  return membership_from_hidden(model, hidden_layer(model, m));
}

GmmStats gmm_statistics(const Matrix& m, const Matrix& gamma) {
  const auto n = static_cast<double>(m.rows());
  GmmStats st;
  const Vector nk = gamma.colwise().sum().transpose();
  st.phi = nk / n;
  for (Eigen::Index k = 0; k < gamma.cols(); ++k) {
    const double denom = std::max(nk(k), 1e-300);
    Vector mu = m.transpose() * gamma.col(k) / denom;
    const Matrix centered = m.rowwise() - mu.transpose();
    Matrix sigma = centered.transpose() * gamma.col(k).asDiagonal() * centered / denom;
    st.mu.push_back(std::move(mu));
    st.sigma.push_back(0.5 * (sigma + sigma.transpose()));
  }
  return st;
}

Vector dgmm_energy(const DgmmModel& model, const Matrix& m) {
  const auto comps = factor_components(model.phi, model.sigma, model.reg_eps);
  return neg_logsumexp_rows(component_log_density(m, model.mu, comps));
}

DgmmGradient dgmm_loss_gradient(const DgmmModel& model, const Matrix& m) {
  const auto n = static_cast<double>(m.rows());
  const Hidden h = hidden_layer(model, m);
  const Matrix gamma = membership_from_hidden(model, h);
  const GmmStats st = gmm_statistics(m, gamma);
  const auto comps = factor_components(st.phi, st.sigma, model.reg_eps);
  const Matrix logd = component_log_density(m, st.mu, comps);
  const Vector energy = neg_logsumexp_rows(logd);

  DgmmGradient g;
  g.loss = energy.mean();

  // Posterior responsibilities r_ik.
  Matrix r = (logd.colwise() + energy).array().exp().matrix();
  const Eigen::Index kk = gamma.cols();
  Matrix g_gamma(m.rows(), kk);
  for (Eigen::Index k = 0; k < kk; ++k) {
    const double phi = std::max(st.phi(k), 1e-300);
    const double nk = phi * n;
    const std::size_t ku = static_cast<std::size_t>(k);
    Matrix sigma_reg = st.sigma[ku];
    sigma_reg.diagonal().array() += model.reg_eps;
    const Matrix inv = comps[ku].chol.solve(Matrix::Identity(sigma_reg.rows(), sigma_reg.cols()));
    const Matrix delta = m.rowwise() - st.mu[ku].transpose();  // n×dim
    const Matrix sd = delta * inv;                              // rows Σ⁻¹δ_i
    const Vector rk = r.col(k);
    const double g_phi = -rk.sum() / (n * phi);
    const Vector g_mu = -(sd.transpose() * rk) / n;
    const Matrix g_sigma = -0.5 / n * (sd.transpose() * rk.asDiagonal() * sd - rk.sum() * inv);
    const double inner = (g_sigma.cwiseProduct(st.sigma[ku])).sum();
    const Vector quad = (delta * g_sigma).cwiseProduct(delta).rowwise().sum();
    g_gamma.col(k) = ((g_phi / n) + ((delta * g_mu).array() + quad.array() - inner) / nk).matrix();
  }

  // Softmax, then the two layers.
  Matrix g_logits(gamma.rows(), kk);
  for (Eigen::Index i = 0; i < gamma.rows(); ++i) {
    const double dotp = gamma.row(i).dot(g_gamma.row(i));
    g_logits.row(i) = gamma.row(i).cwiseProduct((g_gamma.row(i).array() - dotp).matrix());
  }
  g.w2 = h.act.transpose() * g_logits;
  g.b2 = g_logits.colwise().sum().transpose();
  Matrix g_pre = (g_logits * model.w2.transpose()).cwiseProduct((h.pre.array() > 0.0).cast<double>().matrix());
  g.w1 = m.transpose() * g_pre;
  g.b1 = g_pre.colwise().sum().transpose();
  return g;
}

DgmmModel dgmm_train(const Matrix& m, const DgmmConfig& cfg) {
  if (cfg.components < 1) throw InvalidArgument("DGMM needs at least one component");
  if (cfg.hidden < 1 || cfg.epochs < 0 || !(cfg.learning_rate > 0.0)) throw InvalidArgument("bad DGMM config");
  if (!(cfg.reg_eps >= 0.0)) throw InvalidArgument("reg_eps must be nonnegative");
  if (m.rows() < 1 || !m.allFinite()) throw InvalidArgument("DGMM input must be nonempty and finite");

  std::mt19937_64 rng(cfg.seed);
  const auto dim = m.cols();
  std::normal_distribution<double> g1(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::normal_distribution<double> g2(0.0, 1.0 / std::sqrt(static_cast<double>(cfg.hidden)));
  DgmmModel model;
  model.reg_eps = cfg.reg_eps;
  model.w1.resize(dim, cfg.hidden);
  for (Eigen::Index j = 0; j < model.w1.cols(); ++j)
    for (Eigen::Index i = 0; i < model.w1.rows(); ++i) model.w1(i, j) = g1(rng);
  model.b1 = Vector::Zero(cfg.hidden);
  model.w2.resize(cfg.hidden, cfg.components);
  for (Eigen::Index j = 0; j < model.w2.cols(); ++j)
    for (Eigen::Index i = 0; i < model.w2.rows(); ++i) model.w2(i, j) = g2(rng);
  model.b2 = Vector::Zero(cfg.components);

  Adam a_w1(cfg.learning_rate), a_b1(cfg.learning_rate), a_w2(cfg.learning_rate), a_b2(cfg.learning_rate);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    DgmmGradient g = dgmm_loss_gradient(model, m);
    if (epoch == 0) model.initial_mean_energy = g.loss;
    if (!std::isfinite(g.loss) || !g.w1.allFinite() || !g.w2.allFinite()) {
      throw NonFinite("DGMM training diverged at epoch " + std::to_string(epoch));
    }
    a_w1.step(model.w1, g.w1);
    a_b1.step(model.b1, g.b1);
    a_w2.step(model.w2, g.w2);
    a_b2.step(model.b2, g.b2);
  }

  const GmmStats st = gmm_statistics(m, dgmm_membership(model, m));
  model.phi = st.phi;
  model.mu = st.mu;
  model.sigma = st.sigma;
  model.final_mean_energy = dgmm_energy(model, m).mean();
  if (cfg.epochs == 0) model.initial_mean_energy = model.final_mean_energy;
  if (!std::isfinite(model.final_mean_energy)) throw NonFinite("DGMM energy is not finite");
  return model;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptySubset("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ThresholdState init_threshold(const Vector& energies, double tau, double beta) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0,1)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [0,1]");
  ThresholdState s;
  s.tau = tau;
  s.beta = beta;
  s.step = 0;
  s.kappa = quantile(std::vector<double>(energies.data(), energies.data() + energies.size()), tau);
  return s;
}

ThresholdState adaptive_threshold(const ThresholdState& state, const Vector& energies) {
  const double alpha = quantile(std::vector<double>(energies.data(), energies.data() + energies.size()), state.tau);
  ThresholdState next = state;
  next.kappa = state.beta * alpha + (1.0 - state.beta) * state.kappa;
  ++next.step;
  return next;
}

}  // namespace gsan
