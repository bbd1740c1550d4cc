#include "gsan/linear_gnn.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gsan/adam.hpp"
#include "gsan/errors.hpp"
#include "gsan/text.hpp"

namespace gsan {

void TrainConfig::validate() const {
  if (epochs <= 0) throw InvalidArgument("epochs must be positive");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight_decay must be nonnegative");
  if (!(init_scale >= 0.0)) throw InvalidArgument("init_scale must be nonnegative");
}

Matrix row_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix propagate(const Matrix& normalized, const Matrix& x) {
  return normalized * (normalized * x);
}

ForwardResult forward(const Matrix& adjacency, const Matrix& x, const Matrix& w) {
  if (adjacency.rows() != x.rows() || x.cols() != w.rows()) throw DimensionError("forward: shape mismatch");
  ForwardResult r;
  r.logits = propagate(normalize_adjacency(adjacency), x) * w;
  r.probs = row_softmax(r.logits);
  return r;
}

double mean_nll(const Matrix& probs, const std::vector<int>& labels, const std::vector<int>& nodes) {
  if (nodes.empty()) throw EmptySubset("mean_nll over an empty node set");
  double s = 0.0;
  for (int i : nodes) s -= std::log(probs(i, labels[static_cast<std::size_t>(i)]));
  return s / static_cast<double>(nodes.size());
}

Objective train_objective(const Matrix& propagated, const Matrix& w, const std::vector<int>& labels,
                          const std::vector<int>& train, double weight_decay) {
  if (train.empty()) throw EmptySubset("empty training set");
  const auto t = static_cast<Eigen::Index>(train.size());
  Matrix pt(t, propagated.cols());
  for (Eigen::Index r = 0; r < t; ++r) pt.row(r) = propagated.row(train[static_cast<std::size_t>(r)]);
  Matrix s = row_softmax(pt * w);
  double nll = 0.0;
  for (Eigen::Index r = 0; r < t; ++r) {
    const int y = labels[static_cast<std::size_t>(train[static_cast<std::size_t>(r)])];
    nll -= std::log(s(r, y));
    s(r, y) -= 1.0;
  }
  Objective obj;
  obj.value = nll / static_cast<double>(t) + 0.5 * weight_decay * w.squaredNorm();
  obj.grad = pt.transpose() * s / static_cast<double>(t) + weight_decay * w;
  return obj;
}

TrainedGnn train_on_propagated(const Matrix& propagated, const std::vector<int>& labels,
                               const std::vector<int>& train, int num_classes, const TrainConfig& cfg) {
  cfg.validate();
  if (num_classes < 1) throw InvalidArgument("num_classes must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> g(0.0, cfg.init_scale);
  Matrix w(propagated.cols(), num_classes);
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = cfg.init_scale > 0.0 ? g(rng) : 0.0;

  TrainedGnn out;
  out.initial_train_nll = mean_nll(row_softmax(propagated * w), labels, train);
  Adam opt(cfg.learning_rate);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Objective obj = train_objective(propagated, w, labels, train, cfg.weight_decay);
    if (!std::isfinite(obj.value) || !obj.grad.allFinite()) {
      throw NonFinite("inner training diverged at epoch " + std::to_string(epoch));
    }
    opt.step(w, obj.grad);
  }
  if (!w.allFinite()) throw NonFinite("inner training produced non-finite weights");
  out.weights = std::move(w);
  out.propagated = propagated;
  out.logits = out.propagated * out.weights;
  out.probs = row_softmax(out.logits);
  out.final_train_nll = mean_nll(out.probs, labels, train);
  if (!std::isfinite(out.final_train_nll)) throw NonFinite("final training loss is not finite");
  return out;
}

TrainedGnn train_inner(const GraphBundle& bundle, const TrainConfig& cfg) {
  cfg.validate();
  const Matrix p = propagate(normalize_adjacency(bundle.adjacency()), bundle.model_features());
  return train_on_propagated(p, bundle.labels(), bundle.split().train, bundle.num_classes(), cfg);
}

std::vector<int> predict(const Matrix& probs) {
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(i, c) > probs(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth, const std::vector<int>& subset) {
  if (subset.empty()) throw EmptySubset("accuracy over an empty subset");
  std::size_t hit = 0;
  for (int i : subset) {
    if (i < 0 || static_cast<std::size_t>(i) >= pred.size() || static_cast<std::size_t>(i) >= truth.size()) {
      throw OutOfRange("accuracy: node index " + std::to_string(i) + " out of range");
    }
    if (pred[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(i)]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(subset.size());
}

void save_weights(const std::filesystem::path& file, const Matrix& w, std::uint64_t seed) {
  nlohmann::json header = {{"d", w.rows()}, {"C", w.cols()}, {"seed", seed}};
  std::string out = header.dump() + "\n";
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j) out += ',';
      out += text::format_double(w(i, j));
    }
    out += '\n';
  }
  text::write_file(file.string(), out);
}

Matrix load_weights(const std::filesystem::path& file, std::uint64_t* seed) {
  const std::string name = file.string();
  const std::string contents = text::read_file(name);
  std::istringstream in(contents);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(name, 1, "missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(name, 1, std::string("bad header: ") + e.what());
  }
  if (!header.is_object() || !header.contains("d") || !header.contains("C") || !header["d"].is_number_integer() ||
      !header["C"].is_number_integer()) {
    throw FormatError(name, 1, "header needs integer d and C");
  }
  const long long d = header["d"].get<long long>();
  const long long c = header["C"].get<long long>();
  if (d < 0 || c < 0) throw FormatError(name, 1, "negative dimensions");
  if (seed && header.contains("seed")) *seed = header["seed"].get<std::uint64_t>();
  Matrix w(d, c);
  for (long long i = 0; i < d; ++i) {
    const std::size_t lineno = static_cast<std::size_t>(i) + 2;
    if (!std::getline(in, line)) throw FormatError(name, lineno, "missing weight row");
    auto fields = text::split(text::trim(line), ',');
    if (static_cast<long long>(fields.size()) != c) throw FormatError(name, lineno, "expected " + std::to_string(c) + " values");
    for (long long j = 0; j < c; ++j) {
      double v;
      if (!text::parse_double(text::trim(fields[static_cast<std::size_t>(j)]), v)) {
        throw FormatError(name, lineno, "not a number");
      }
      w(i, j) = v;
    }
  }
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) throw FormatError(name, static_cast<std::size_t>(d) + 2, "trailing data");
  }
  return w;
}

}  // namespace gsan
