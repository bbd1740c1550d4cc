#include "gsan/sanitizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gsan/bundle_io.hpp"
#include "gsan/detectors.hpp"
#include "gsan/errors.hpp"
#include "gsan/kernels.hpp"
#include "gsan/text.hpp"

namespace gsan {

namespace {

const char* detector_name(DetectorKind d) {
  switch (d) {
    case DetectorKind::ClassDiv: return "classdiv";
    case DetectorKind::LinkPred: return "linkpred";
    case DetectorKind::None: return "none";
  }
  return "?";
}

std::vector<int> iota_nodes(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

bool focus_hits_eval_nodes(const GraphBundle& b, const std::vector<int>& focus) {
  std::vector<char> in(static_cast<std::size_t>(b.n()), 0);
  for (int i : focus) in[static_cast<std::size_t>(i)] = 1;
  for (int i : b.split().val)
    if (in[static_cast<std::size_t>(i)]) return true;
  for (int i : b.split().test)
    if (in[static_cast<std::size_t>(i)]) return true;
  return false;
}

SanitationResult make_result(const GraphBundle& poisoned, std::string method, std::vector<Edge> deleted) {
  Matrix a = replay_deletions(poisoned.adjacency(), deleted);
  SanitationResult r{std::move(method), std::move(deleted), {}, poisoned.with_adjacency(std::move(a)), false, {}};
  return r;
}

}  // namespace

void SanitizerConfig::validate() const {
  if (budget < 1) throw InvalidArgument("sanitation budget must be at least 1");
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [0,1]");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0,1)");
  if (!(eta >= 0.0)) throw InvalidArgument("eta must be nonnegative");
  train.validate();
}

nlohmann::json SanitizerConfig::to_json() const {
  OuterLossConfig oc;
  oc.mode = meta_mode;
  oc.unroll_steps = unroll_steps;
  return {{"detector", detector_name(detector)},
          {"budget", budget},
          {"temperature", temperature},
          {"beta", beta},
          {"tau", tau},
          {"eta", eta},
          {"train", {{"epochs", train.epochs}, {"learning_rate", train.learning_rate},
                     {"weight_decay", train.weight_decay}, {"seed", train.seed}, {"init_scale", train.init_scale}}},
          {"meta_mode", mode_label(oc)},
          {"unroll_lr", unroll_lr},
          {"dgmm", {{"components", dgmm.components}, {"hidden", dgmm.hidden}, {"epochs", dgmm.epochs},
                    {"learning_rate", dgmm.learning_rate}, {"reg_eps", dgmm.reg_eps}}},
          {"linkpred", {{"hidden", linkpred.hidden}, {"embed", linkpred.embed}, {"epochs", linkpred.epochs},
                        {"refresh_epochs", linkpred.refresh_epochs}, {"learning_rate", linkpred.learning_rate}}},
          {"adaptive_lambda", adaptive_lambda},
          {"normal_focus", normal_focus},
          {"universal_victims", universal_victims},
          {"use_attributes", use_attributes},
          {"seed", seed}};
}

SanitizerConfig sanitizer_config_from_json(const nlohmann::json& params, const std::string& path) {
  SanitizerConfig c;
  if (params.is_null()) return c;
  if (!params.is_object()) throw SpecError(path, "params must be an object");
  auto num = [&](const char* key, double& out) {
    if (!params.contains(key)) return;
    if (!params[key].is_number()) throw SpecError(path + "/" + key, "expected a number");
    out = params[key].get<double>();
  };
  auto integer = [&](const char* key, auto& out) {
    if (!params.contains(key)) return;
    if (!params[key].is_number_integer()) throw SpecError(path + "/" + key, "expected an integer");
    out = params[key].get<std::remove_reference_t<decltype(out)>>();
  };
  auto flag = [&](const char* key, bool& out) {
    if (!params.contains(key)) return;
    if (!params[key].is_boolean()) throw SpecError(path + "/" + key, "expected a boolean");
    out = params[key].get<bool>();
  };
  static const char* known[] = {"temperature", "beta", "tau", "eta", "epochs", "learning_rate", "weight_decay",
                                "train_seed", "init_scale", "meta_mode", "unroll_steps", "unroll_lr",
                                "dgmm_components", "dgmm_epochs", "dgmm_lr", "reg_eps", "lp_epochs", "lp_refresh_epochs", "lp_lr",
                                "lp_hidden", "lp_embed", "adaptive_lambda", "normal_focus", "universal_victims",
                                "use_attributes", "seed", "threshold"};
  for (auto it = params.begin(); it != params.end(); ++it) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) ==
        std::end(known)) {
      throw SpecError(path + "/" + it.key(), "unknown sanitizer parameter");
    }
  }
  num("temperature", c.temperature);
  num("beta", c.beta);
  num("tau", c.tau);
  num("eta", c.eta);
  integer("epochs", c.train.epochs);
  num("learning_rate", c.train.learning_rate);
  num("weight_decay", c.train.weight_decay);
  integer("train_seed", c.train.seed);
  num("init_scale", c.train.init_scale);
  if (params.contains("meta_mode")) {
    const auto& m = params["meta_mode"];
    if (m == "first_order") {
      c.meta_mode = GradMode::FirstOrder;
    } else if (m == "unrolled") {
      c.meta_mode = GradMode::Unrolled;
    } else {
      throw SpecError(path + "/meta_mode", "expected \"first_order\" or \"unrolled\"");
    }
  }
  integer("unroll_steps", c.unroll_steps);
  num("unroll_lr", c.unroll_lr);
  integer("dgmm_components", c.dgmm.components);
  integer("dgmm_epochs", c.dgmm.epochs);
  num("dgmm_lr", c.dgmm.learning_rate);
  num("reg_eps", c.dgmm.reg_eps);
  integer("lp_epochs", c.linkpred.epochs);
  integer("lp_refresh_epochs", c.linkpred.refresh_epochs);
  num("lp_lr", c.linkpred.learning_rate);
  integer("lp_hidden", c.linkpred.hidden);
  integer("lp_embed", c.linkpred.embed);
  flag("adaptive_lambda", c.adaptive_lambda);
  flag("normal_focus", c.normal_focus);
  flag("universal_victims", c.universal_victims);
  flag("use_attributes", c.use_attributes);
  integer("seed", c.seed);
  return c;
}

Matrix replay_deletions(const Matrix& adjacency, const std::vector<Edge>& deleted) {
  Matrix a = adjacency;
  for (const Edge& e : deleted) {
    if (e.v >= a.rows() || a(e.u, e.v) == 0.0) {
      throw EditConflict("deletion (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not an edge");
    }
    a(e.u, e.v) = a(e.v, e.u) = 0.0;
  }
  return a;
}

SanitationResult focused_cleaner(const GraphBundle& poisoned, const SanitizerConfig& cfg) {
  cfg.validate();
  DgmmConfig dcfg = cfg.dgmm;
  if (dcfg.components <= 0) dcfg.components = poisoned.num_classes();
  dcfg.seed = cfg.seed;
  LinkPredConfig lcfg = cfg.linkpred;
  lcfg.seed = cfg.seed;
  std::optional<ThresholdState> threshold;
  std::optional<LinkPredModel> scorer;
  const int n = poisoned.n();

  VictimOracle detect = [&](const GraphBundle& current, const TrainedGnn& gnn, int) {
    DetectorOutput det;
    switch (cfg.detector) {
      case DetectorKind::ClassDiv: {
        const Matrix m = build_hybrid_features(current, gnn, cfg.temperature, cfg.use_attributes);
        const DgmmModel model = dgmm_train(m, dcfg);
        const Vector energy = dgmm_energy(model, m);
        threshold = threshold ? adaptive_threshold(*threshold, energy) : init_threshold(energy, cfg.tau, cfg.beta);
        det = classdiv_detect(energy, threshold->kappa);
        break;
      }
      case DetectorKind::LinkPred: {
        const Matrix in = linkpred_input(current, gnn, cfg.temperature, cfg.use_attributes);
        scorer = scorer ? linkpred_train(in, current.adjacency(), lcfg, *scorer)
                        : linkpred_train(in, current.adjacency(), lcfg);
        det = linkpred_detect(*scorer, in, current.adjacency(), cfg.universal_victims);
        break;
      }
      case DetectorKind::None:
        det.victims = iota_nodes(n);
        break;
    }
    return det;
  };
  return focused_cleaner(poisoned, cfg, detect);
}

SanitationResult focused_cleaner(const GraphBundle& poisoned, const SanitizerConfig& cfg, const VictimOracle& detect) {
  cfg.validate();
  const int n = poisoned.n();
  const std::vector<int> all = iota_nodes(n);
  OuterLossConfig oc;
  oc.eta = cfg.eta;
  oc.budget = cfg.budget;
  oc.mode = cfg.meta_mode;
  oc.unroll_steps = cfg.unroll_steps;
  oc.unroll_lr = cfg.unroll_lr;
  oc.validate();

  std::string method = cfg.detector == DetectorKind::ClassDiv   ? "focusedcleaner_cld"
                       : cfg.detector == DetectorKind::LinkPred ? "focusedcleaner_lp"
                                                                : "gasoline_d";
  SanitationResult result = make_result(poisoned, method, {});
  result.config = cfg.to_json();
  GraphBundle current = poisoned;

  for (int t = 0; t < cfg.budget; ++t) {
    const TrainedGnn gnn = train_inner(current, cfg.train);
    StepRecord rec;
    rec.step = t;

    DetectorOutput det = detect(current, gnn, t);
    rec.threshold = det.threshold;
    rec.degenerate_threshold = det.degenerate;
    if (det.victims.empty()) {
      rec.no_victims_fallback = true;
      det.victims = all;
      det.normals.clear();
    }
    rec.victims = det.victims;

    const LambdaPair lambdas = cfg.adaptive_lambda ? lambda_schedule(t, cfg.budget) : LambdaPair{1.0, 0.0};
    rec.lambda_val = lambdas.lambda_val;
    // Without a detector there is no normal set to focus on.
    std::vector<int> focus = cfg.normal_focus && cfg.detector != DetectorKind::None ? det.normals : all;
    if (!focus_hits_eval_nodes(current, focus)) {
      rec.focus_fallback = true;
      focus = all;
    }
    const OuterTerms terms = make_outer_terms(current, gnn, focus, lambdas);
    const Matrix x = current.model_features();
    rec.outer_loss = outer_loss_at(current.adjacency(), x, gnn.weights, terms, cfg.eta);
    InnerProblem inner{&current.labels(), &current.split().train, cfg.train.weight_decay};
    const Matrix g = mask_gradient(meta_gradient_at(current.adjacency(), x, gnn.weights, terms, oc, inner), det.normals);

    const auto choice = select_edge(g, candidate_edges(current.edge_list(), det.victims, n));
    if (!choice) {
      result.early_stopped = true;
      result.trace.push_back(std::move(rec));
      break;
    }
    rec.edge = choice->edge;
    rec.gradient = choice->gradient;
    result.deleted.push_back(choice->edge);
    result.trace.push_back(std::move(rec));
    current = current.with_adjacency(apply_edits(current.adjacency(), {choice->edge}, {}));
  }
  result.sanitized = std::move(current);
  return result;
}

SanitationResult gasoline_d(const GraphBundle& poisoned, SanitizerConfig cfg) {
  cfg.detector = DetectorKind::None;
  return focused_cleaner(poisoned, cfg);
}

double weighted_jaccard(const Matrix& x, int u, int v) {
  // Rows are strided in column-major storage; copy them out for the kernel.
  const Vector a = x.row(u).transpose(), b = x.row(v).transpose();
  const auto mm = kernels::minmax_sums({a.data(), static_cast<std::size_t>(a.size())},
                                       {b.data(), static_cast<std::size_t>(b.size())});
  return mm.max_sum > 0.0 ? mm.min_sum / mm.max_sum : 1.0;
}

SanitationResult jaccard_prune(const GraphBundle& poisoned, std::optional<double> threshold, std::optional<int> budget) {
  const Matrix& x = poisoned.features();
  if (!threshold && !budget) throw InvalidArgument("jaccard_prune needs a threshold or a budget");
  const auto& edges = poisoned.edge_list();
  std::vector<double> sim(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) sim[i] = weighted_jaccard(x, edges[i].u, edges[i].v);

  double thr;
  if (threshold) {
    thr = *threshold;
  } else {
    if (*budget < 0) throw InvalidArgument("negative budget");
    std::vector<double> sorted = sim;
    std::sort(sorted.begin(), sorted.end());
    const auto b = static_cast<std::size_t>(*budget);
    // "sim < thr" deletes everything strictly below thr; try the distinct
    // values around position b and keep the count closest to b.
    auto count_below = [&](double t) {
      return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    };
    if (b >= sorted.size()) {
      thr = std::numeric_limits<double>::infinity();
    } else {
      const double lo = sorted[b];
      const auto up = std::upper_bound(sorted.begin(), sorted.end(), lo);
      thr = lo;
      if (up != sorted.end()) {
        const double hi = *up;
        const auto dlo = b - count_below(lo);
        const auto dhi = count_below(hi) - b;
        if (dhi < dlo) thr = hi;
      } else if (sorted.size() - b < b - count_below(lo)) {
        thr = std::numeric_limits<double>::infinity();
      }
    }
  }
  std::vector<Edge> deleted;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (sim[i] < thr) deleted.push_back(edges[i]);
  SanitationResult r = make_result(poisoned, "jaccard", std::move(deleted));
  r.config = {{"threshold", std::isfinite(thr) ? nlohmann::json(thr) : nlohmann::json("inf")}};
  if (budget) r.config["budget"] = *budget;
  return r;
}

SanitationResult linkpred_only(const GraphBundle& poisoned, const SanitizerConfig& cfg) {
  cfg.validate();
  const TrainedGnn gnn = train_inner(poisoned, cfg.train);
  const Matrix in = linkpred_input(poisoned, gnn, cfg.temperature, cfg.use_attributes);
  LinkPredConfig lcfg = cfg.linkpred;
  lcfg.seed = cfg.seed;
  const LinkPredModel model = linkpred_train(in, poisoned.adjacency(), lcfg);
  const Matrix scores = linkpred_scores(model, in);
  std::vector<Edge> edges = poisoned.edge_list();
  std::stable_sort(edges.begin(), edges.end(),
                   [&](const Edge& a, const Edge& b) { return scores(a.u, a.v) < scores(b.u, b.v); });
  edges.resize(std::min<std::size_t>(edges.size(), static_cast<std::size_t>(cfg.budget)));
  SanitationResult r = make_result(poisoned, "linkpred_only", std::move(edges));
  r.config = cfg.to_json();
  return r;
}

SanitationResult ensemble(const GraphBundle& poisoned, const SanitationResult& a, const SanitationResult& b,
                          EnsembleMode mode) {
  for (const SanitationResult* r : {&a, &b}) {
    bool ok = r->sanitized.n() == poisoned.n();
    if (ok) {
      try {
        ok = replay_deletions(poisoned.adjacency(), r->deleted) == r->sanitized.adjacency();
      } catch (const EditConflict&) {
        ok = false;
      }
    }
    if (!ok) throw BundleMismatch("result '" + r->method + "' does not sanitize this bundle");
  }
  const EdgeSet sa = a.deleted_set(), sb = b.deleted_set();
  const EdgeSet merged = mode == EnsembleMode::Union ? set_union(sa, sb) : set_intersection(sa, sb);
  SanitationResult r = make_result(poisoned, std::string(mode == EnsembleMode::Union ? "union(" : "intersection(") +
                                                  a.method + "," + b.method + ")",
                                   std::vector<Edge>(merged.begin(), merged.end()));
  r.config = {{"mode", mode == EnsembleMode::Union ? "union" : "intersection"}, {"a", a.config}, {"b", b.config}};
  return r;
}

nlohmann::json result_to_json(const SanitationResult& result) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : result.trace) {
    nlohmann::json row = {{"step", s.step},
                          {"gradient", s.gradient},
                          {"lambda_val", s.lambda_val},
                          {"outer_loss", s.outer_loss},
                          {"threshold", s.threshold},
                          {"victim_count", s.victims.size()},
                          {"victims", s.victims},
                          {"no_victims_fallback", s.no_victims_fallback},
                          {"focus_fallback", s.focus_fallback},
                          {"degenerate_threshold", s.degenerate_threshold}};
    row["edge"] = s.edge ? nlohmann::json::array({s.edge->u, s.edge->v}) : nlohmann::json(nullptr);
    trace.push_back(std::move(row));
  }
  return {{"method", result.method},
          {"deleted", edge_list_to_json(result.deleted)},
          {"early_stopped", result.early_stopped},
          {"config", result.config},
          {"trace", trace}};
}

void save_result(const SanitationResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_bundle(result.sanitized, dir);
  text::write_file((dir / "result.json").string(), result_to_json(result).dump(2) + "\n");
}

namespace {

std::filesystem::path result_file(const std::filesystem::path& path) {
  return std::filesystem::is_directory(path) ? path / "result.json" : path;
}

std::vector<Edge> ordered_edges(const nlohmann::json& arr, const std::string& file) {
  if (!arr.is_array()) throw FormatError(file, 1, "\"deleted\" must be an array");
  std::vector<Edge> out;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      throw FormatError(file, 1, "deleted entries must be [u, v] integer pairs");
    }
    out.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  return out;
}

}  // namespace

std::vector<Edge> load_deleted_edges(const std::filesystem::path& path) {
  const auto file = result_file(path);
  const nlohmann::json j = parse_json_file(file);
  if (!j.is_object() || !j.contains("deleted")) throw FormatError(file.string(), 1, "missing \"deleted\"");
  return ordered_edges(j["deleted"], file.string());
}

SanitationResult load_result(const std::filesystem::path& path) {
  const auto file = result_file(path);
  const nlohmann::json j = parse_json_file(file);
  if (!j.is_object() || !j.contains("deleted")) throw FormatError(file.string(), 1, "missing \"deleted\"");
  GraphBundle bundle = load_bundle(file.parent_path());
  SanitationResult r{j.value("method", std::string()), ordered_edges(j["deleted"], file.string()), {},
                     std::move(bundle), j.value("early_stopped", false), j.value("config", nlohmann::json::object())};
  if (j.contains("trace")) {
    for (const auto& row : j["trace"]) {
      StepRecord s;
      s.step = row.value("step", 0);
      if (row.contains("edge") && row["edge"].is_array()) s.edge = Edge(row["edge"][0].get<int>(), row["edge"][1].get<int>());
      s.gradient = row.value("gradient", 0.0);
      s.lambda_val = row.value("lambda_val", 1.0);
      s.outer_loss = row.value("outer_loss", 0.0);
      s.threshold = row.value("threshold", 0.0);
      s.victims = row.value("victims", std::vector<int>{});
      s.no_victims_fallback = row.value("no_victims_fallback", false);
      s.focus_fallback = row.value("focus_fallback", false);
      s.degenerate_threshold = row.value("degenerate_threshold", false);
      r.trace.push_back(std::move(s));
    }
  }
  return r;
}

}  // namespace gsan
