#include "gsan/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "gsan/bundle_io.hpp"
#include "gsan/errors.hpp"
#include "gsan/metrics.hpp"
#include "gsan/text.hpp"

namespace gsan {

namespace {

const std::vector<std::string> kMethods = {"cld", "lp", "gasoline-d", "jaccard", "lp-only"};

// Runs jobs[i] on up to `workers` threads. Each job writes only its own slot,
// so the merge order is the job order regardless of scheduling. The first
// failing job (by index) is rethrown.
void run_pool(const std::vector<std::function<void()>>& jobs, int workers) {
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), jobs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string fmt(double x) { return text::format_double(x); }

// --- spec parsing -----------------------------------------------------------

std::string ptr(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string ptr(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

void check_keys(const nlohmann::json& obj, const std::string& path, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw SpecError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; })) {
      throw SpecError(ptr(path, k), "unknown field");
    }
  }
}

double get_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw SpecError(path, "expected a number");
  return j.get<double>();
}

long long get_int(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SpecError(path, "expected an integer");
  return j.get<long long>();
}

std::vector<double> get_numbers(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SpecError(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], ptr(path, i)));
  return out;
}

SbmConfig parse_sbm(const nlohmann::json& j, const std::string& path) {
  check_keys(j, path, {"n", "num_classes", "p_in", "p_out", "feature_dim", "feature_signal", "train_fraction",
                       "val_fraction", "seed"});
  SbmConfig c;
  auto integer = [&](const char* k, int& out, int lo) {
    if (!j.contains(k)) return;
    const long long v = get_int(j[k], ptr(path, k));
    if (v < lo) throw SpecError(ptr(path, k), "must be >= " + std::to_string(lo));
    out = static_cast<int>(v);
  };
  auto prob = [&](const char* k, double& out) {
    if (!j.contains(k)) return;
    out = get_number(j[k], ptr(path, k));
    if (!(out >= 0.0 && out <= 1.0)) throw SpecError(ptr(path, k), "must lie in [0,1]");
  };
  integer("n", c.n, 2);
  integer("num_classes", c.num_classes, 1);
  integer("feature_dim", c.feature_dim, 1);
  prob("p_in", c.p_in);
  prob("p_out", c.p_out);
  prob("train_fraction", c.train_fraction);
  prob("val_fraction", c.val_fraction);
  if (j.contains("feature_signal")) c.feature_signal = get_number(j["feature_signal"], ptr(path, "feature_signal"));
  if (j.contains("seed")) {
    const long long s = get_int(j["seed"], ptr(path, "seed"));
    if (s < 0) throw SpecError(ptr(path, "seed"), "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (c.num_classes > c.n) throw SpecError(ptr(path, "num_classes"), "more classes than nodes");
  return c;
}

TrainConfig parse_train(const nlohmann::json& j, const std::string& path) {
  check_keys(j, path, {"epochs", "learning_rate", "weight_decay", "init_scale", "seed"});
  TrainConfig c;
  if (j.contains("epochs")) c.epochs = static_cast<int>(get_int(j["epochs"], ptr(path, "epochs")));
  if (j.contains("learning_rate")) c.learning_rate = get_number(j["learning_rate"], ptr(path, "learning_rate"));
  if (j.contains("weight_decay")) c.weight_decay = get_number(j["weight_decay"], ptr(path, "weight_decay"));
  if (j.contains("init_scale")) c.init_scale = get_number(j["init_scale"], ptr(path, "init_scale"));
  if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(get_int(j["seed"], ptr(path, "seed")));
  try {
    c.validate();
  } catch (const Error& e) {
    throw SpecError(path, e.what());
  }
  return c;
}

// --- per-cell work ----------------------------------------------------------

struct Cell {
  double power = 0.0;
  std::uint64_t seed = 0;
  std::optional<GraphBundle> clean;
  std::optional<PoisonResult> attack;
  double accuracy_clean = 0.0;
  double accuracy_poisoned = 0.0;
};

struct SanitationRow {
  std::string label, method;
  double r_asb = 0.0;
  int budget = 0;
  std::size_t deleted = 0;
  bool early_stopped = false;
  MetricsReport report;
};

std::vector<Edge> insertion_order(const PoisonResult& r) {
  std::vector<Edge> out;
  for (const AttackStep& s : r.trace)
    if (s.inserted) out.push_back(s.edge);
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& s) { text::write_file(file.string(), s); }

}  // namespace

bool is_sanitizer_method(const std::string& method) {
  return std::find(kMethods.begin(), kMethods.end(), method) != kMethods.end();
}

int sanitation_budget(const GraphBundle& poisoned, double r_asb) {
  if (!(r_asb > 0.0 && r_asb <= 1.0)) throw InvalidArgument("r_asb must lie in (0,1]");
  return std::max(1, static_cast<int>(std::ceil(r_asb * static_cast<double>(poisoned.edge_count()) - 1e-9)));
}

SanitationResult run_sanitizer(const std::string& method, const GraphBundle& poisoned, double r_asb,
                               const SanitizerConfig& cfg) {
  SanitizerConfig c = cfg;
  c.budget = sanitation_budget(poisoned, r_asb);
  if (method == "cld") {
    c.detector = DetectorKind::ClassDiv;
    return focused_cleaner(poisoned, c);
  }
  if (method == "lp") {
    c.detector = DetectorKind::LinkPred;
    return focused_cleaner(poisoned, c);
  }
  if (method == "gasoline-d") return gasoline_d(poisoned, c);
  if (method == "lp-only") return linkpred_only(poisoned, c);
  if (method == "jaccard") return jaccard_prune(poisoned, std::nullopt, c.budget);
  throw InvalidArgument("unknown sanitizer method '" + method + "'");
}

std::vector<PruningPoint> sequential_pruning(const GraphBundle& poisoned, const std::vector<Edge>& insertion_order,
                                             int stride, int eval_seeds, const TrainConfig& cfg) {
  if (stride < 1) throw InvalidArgument("stride must be positive");
  std::vector<PruningPoint> out;
  Matrix a = poisoned.adjacency();
  const int total = static_cast<int>(insertion_order.size());
  out.push_back({0, mean_test_accuracy(poisoned, cfg, eval_seeds)});
  for (int k = 1; k <= total; ++k) {
    a = apply_edits(a, {insertion_order[static_cast<std::size_t>(k - 1)]}, {});
    if (k % stride == 0 || k == total) {
      out.push_back({k, mean_test_accuracy(poisoned.with_adjacency(a), cfg, eval_seeds)});
    }
  }
  return out;
}

std::vector<MixedPoint> mixed_pruning(const GraphBundle& poisoned, const PoisonRecord& record,
                                      const std::vector<double>& grid, int repetitions, int eval_seeds,
                                      const TrainConfig& cfg) {
  std::vector<MixedPoint> out;
  for (double p : grid) {
    for (int r = 0; r < repetitions; ++r) {
      const SanitationResult s = mixed_prune_fixture(poisoned, record, p, static_cast<std::uint64_t>(r));
      out.push_back({p, r, esr(record.all(), s.deleted_set()), mean_test_accuracy(s.sanitized, cfg, eval_seeds)});
    }
  }
  return out;
}

std::vector<double> mean_accuracy_by_p(const std::vector<MixedPoint>& points, const std::vector<double>& grid) {
  std::vector<double> out;
  for (double p : grid) {
    double sum = 0.0;
    int n = 0;
    for (const MixedPoint& m : points) {
      if (m.p == p) {
        sum += m.accuracy;
        ++n;
      }
    }
    out.push_back(n ? sum / n : 0.0);
  }
  return out;
}

ExperimentSpec parse_experiment_spec(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "", {"dataset", "attack", "sanitizers", "r_asb", "eval_seeds", "train", "outputs", "sequential_stride",
                     "mixed_grid", "mixed_repetitions", "workers", "output_dir"});
  ExperimentSpec s;
  s.source = j;

  if (!j.contains("dataset")) throw SpecError("/dataset", "missing");
  const auto& ds = j["dataset"];
  if (ds.is_string()) {
    std::filesystem::path p = ds.get<std::string>();
    s.dataset = p.is_absolute() ? p : base_dir / p;
  } else if (ds.is_object()) {
    check_keys(ds, "/dataset", {"sbm"});
    if (!ds.contains("sbm")) throw SpecError("/dataset/sbm", "missing");
    s.dataset = parse_sbm(ds["sbm"], "/dataset/sbm");
  } else {
    throw SpecError("/dataset", "expected a bundle path or {\"sbm\": {...}}");
  }

  if (!j.contains("attack")) throw SpecError("/attack", "missing");
  const auto& at = j["attack"];
  check_keys(at, "/attack", {"method", "powers", "seeds"});
  if (at.contains("method")) {
    if (!at["method"].is_string()) throw SpecError("/attack/method", "expected a string");
    s.attack_method = at["method"].get<std::string>();
    if (s.attack_method != "mettack" && s.attack_method != "random") {
      throw SpecError("/attack/method", "must be \"mettack\" or \"random\"");
    }
  }
  if (!at.contains("powers")) throw SpecError("/attack/powers", "missing");
  s.powers = get_numbers(at["powers"], "/attack/powers");
  for (std::size_t i = 0; i < s.powers.size(); ++i) {
    if (!(s.powers[i] > 0.0 && s.powers[i] <= 0.5)) throw SpecError(ptr("/attack/powers", i), "must lie in (0,0.5]");
  }
  if (!at.contains("seeds")) throw SpecError("/attack/seeds", "missing");
  if (!at["seeds"].is_array() || at["seeds"].empty()) throw SpecError("/attack/seeds", "expected a non-empty array");
  for (std::size_t i = 0; i < at["seeds"].size(); ++i) {
    const long long v = get_int(at["seeds"][i], ptr("/attack/seeds", i));
    if (v < 0) throw SpecError(ptr("/attack/seeds", i), "must be >= 0");
    s.seeds.push_back(static_cast<std::uint64_t>(v));
  }

  if (j.contains("outputs")) {
    const auto& out = j["outputs"];
    if (!out.is_array() || out.empty()) throw SpecError("/outputs", "expected a non-empty array");
    s.sanitation = false;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::string name = out[i].is_string() ? out[i].get<std::string>() : "";
      if (name == "sanitation") s.sanitation = true;
      else if (name == "sequential_pruning") s.sequential_pruning = true;
      else if (name == "mixed_pruning") s.mixed_pruning = true;
      else throw SpecError(ptr("/outputs", i), "expected sanitation, sequential_pruning or mixed_pruning");
    }
  }

  if (j.contains("sanitizers")) {
    const auto& arr = j["sanitizers"];
    if (!arr.is_array()) throw SpecError("/sanitizers", "expected an array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = ptr("/sanitizers", i);
      check_keys(arr[i], path, {"method", "params", "label"});
      SanitizerSpec ss;
      if (!arr[i].contains("method") || !arr[i]["method"].is_string()) throw SpecError(ptr(path, "method"), "missing");
      ss.method = arr[i]["method"].get<std::string>();
      if (!is_sanitizer_method(ss.method)) {
        throw SpecError(ptr(path, "method"), "expected one of cld, lp, gasoline-d, jaccard, lp-only");
      }
      ss.params = arr[i].value("params", nlohmann::json::object());
      ss.config = sanitizer_config_from_json(ss.params, ptr(path, "params"));
      ss.label = ss.method;
      if (arr[i].contains("label")) {
        if (!arr[i]["label"].is_string() || arr[i]["label"].get<std::string>().empty()) {
          throw SpecError(ptr(path, "label"), "expected a non-empty string");
        }
        ss.label = arr[i]["label"].get<std::string>();
      }
      if (ss.label.find_first_of(",\"\n") != std::string::npos) throw SpecError(ptr(path, "label"), "invalid character");
      if (!labels.insert(ss.label).second) throw SpecError(ptr(path, "label"), "duplicate label '" + ss.label + "'");
      s.sanitizers.push_back(std::move(ss));
    }
  }
  if (s.sanitation) {
    if (s.sanitizers.empty()) throw SpecError("/sanitizers", "sanitation output needs at least one sanitizer");
    if (!j.contains("r_asb")) throw SpecError("/r_asb", "missing");
    s.r_asb = get_numbers(j["r_asb"], "/r_asb");
    for (std::size_t i = 0; i < s.r_asb.size(); ++i) {
      if (!(s.r_asb[i] > 0.0 && s.r_asb[i] <= 1.0)) throw SpecError(ptr("/r_asb", i), "must lie in (0,1]");
    }
  }

  if (j.contains("eval_seeds")) {
    const long long v = get_int(j["eval_seeds"], "/eval_seeds");
    if (v < 1) throw SpecError("/eval_seeds", "must be >= 1");
    s.eval_seeds = static_cast<int>(v);
  }
  if (j.contains("train")) s.train = parse_train(j["train"], "/train");
  if (j.contains("sequential_stride")) {
    const long long v = get_int(j["sequential_stride"], "/sequential_stride");
    if (v < 0) throw SpecError("/sequential_stride", "must be >= 0");
    s.sequential_stride = static_cast<int>(v);
  }
  s.mixed_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  if (j.contains("mixed_grid")) {
    s.mixed_grid = get_numbers(j["mixed_grid"], "/mixed_grid");
    for (std::size_t i = 0; i < s.mixed_grid.size(); ++i) {
      if (!(s.mixed_grid[i] >= 0.0 && s.mixed_grid[i] <= 1.0)) throw SpecError(ptr("/mixed_grid", i), "must lie in [0,1]");
    }
  }
  if (j.contains("mixed_repetitions")) {
    const long long v = get_int(j["mixed_repetitions"], "/mixed_repetitions");
    if (v < 1) throw SpecError("/mixed_repetitions", "must be >= 1");
    s.mixed_repetitions = static_cast<int>(v);
  }
  if (j.contains("workers")) {
    const long long v = get_int(j["workers"], "/workers");
    if (v < 1 || v > 256) throw SpecError("/workers", "must lie in [1,256]");
    s.workers = static_cast<int>(v);
  }
  s.output_dir = base_dir / "results";
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw SpecError("/output_dir", "expected a string");
    std::filesystem::path p = j["output_dir"].get<std::string>();
    s.output_dir = p.is_absolute() ? p : base_dir / p;
  }
  return s;
}

nlohmann::json run_experiment(const ExperimentSpec& spec) {
  std::optional<GraphBundle> file_bundle;
  if (const auto* p = std::get_if<std::filesystem::path>(&spec.dataset)) file_bundle = load_bundle(*p);

  // Stage 1: one attack per (power, seed).
  std::vector<Cell> cells;
  for (double power : spec.powers)
    for (std::uint64_t seed : spec.seeds) cells.push_back(Cell{power, seed, {}, {}, 0.0, 0.0});
  {
    std::vector<std::function<void()>> jobs;
    for (Cell& c : cells) {
      jobs.emplace_back([&spec, &file_bundle, &c] {
        if (file_bundle) {
          c.clean = *file_bundle;
        } else {
          SbmConfig sc = std::get<SbmConfig>(spec.dataset);
          sc.seed += c.seed;  // a fresh graph per attack seed
          c.clean = make_sbm(sc);
        }
        AttackConfig ac;
        ac.power = c.power;
        ac.seed = c.seed;
        ac.train = spec.train;
        c.attack = spec.attack_method == "random" ? random_attack(*c.clean, ac) : mettack_like(*c.clean, ac);
        c.accuracy_clean = mean_test_accuracy(*c.clean, spec.train, spec.eval_seeds);
        c.accuracy_poisoned = mean_test_accuracy(c.attack->poisoned, spec.train, spec.eval_seeds);
      });
    }
    run_pool(jobs, spec.workers);
  }

  // Stage 2: sanitizers and pruning studies, one slot per job.
  const std::size_t per_cell = spec.sanitizers.size() * spec.r_asb.size();
  std::vector<SanitationRow> san(spec.sanitation ? cells.size() * per_cell : 0);
  std::vector<std::vector<PruningPoint>> seq(spec.sequential_pruning ? cells.size() : 0);
  std::vector<std::vector<MixedPoint>> mix(spec.mixed_pruning ? cells.size() * spec.mixed_grid.size() : 0);
  std::vector<std::function<void()>> jobs;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& c = cells[ci];
    if (spec.sanitation) {
      for (std::size_t si = 0; si < spec.sanitizers.size(); ++si) {
        for (std::size_t ri = 0; ri < spec.r_asb.size(); ++ri) {
          SanitationRow& row = san[ci * per_cell + si * spec.r_asb.size() + ri];
          jobs.emplace_back([&spec, &c, &row, si, ri] {
            const SanitizerSpec& ss = spec.sanitizers[si];
            SanitizerConfig cfg = ss.config;
            if (!ss.params.contains("seed")) cfg.seed = c.seed;
            const GraphBundle& poisoned = c.attack->poisoned;
            const SanitationResult r = run_sanitizer(ss.method, poisoned, spec.r_asb[ri], cfg);
            row.label = ss.label;
            row.method = ss.method;
            row.r_asb = spec.r_asb[ri];
            row.budget = sanitation_budget(poisoned, spec.r_asb[ri]);
            row.deleted = r.deleted.size();
            row.early_stopped = r.early_stopped;
            row.report = evaluate_defense(poisoned, r.sanitized, c.attack->record, r.deleted_set(), spec.eval_seeds,
                                          spec.train);
          });
        }
      }
    }
    if (spec.sequential_pruning) {
      jobs.emplace_back([&spec, &c, &out = seq[ci]] {
        const std::vector<Edge> order = insertion_order(*c.attack);
        const int stride = spec.sequential_stride > 0
                               ? spec.sequential_stride
                               : std::max(1, static_cast<int>(std::ceil(static_cast<double>(order.size()) / 10.0)));
        out = sequential_pruning(c.attack->poisoned, order, stride, spec.eval_seeds, spec.train);
      });
    }
    if (spec.mixed_pruning) {
      for (std::size_t pi = 0; pi < spec.mixed_grid.size(); ++pi) {
        jobs.emplace_back([&spec, &c, pi, &out = mix[ci * spec.mixed_grid.size() + pi]] {
          out = mixed_pruning(c.attack->poisoned, c.attack->record, {spec.mixed_grid[pi]}, spec.mixed_repetitions,
                              spec.eval_seeds, spec.train);
        });
      }
    }
  }
  run_pool(jobs, spec.workers);

  std::filesystem::create_directories(spec.output_dir);
  nlohmann::json summary;
  summary["spec"] = spec.source;
  nlohmann::json jc = nlohmann::json::array();
  for (const Cell& c : cells) {
    jc.push_back({{"power", c.power},
                  {"seed", c.seed},
                  {"clean_edges", c.clean->edge_count()},
                  {"inserted", c.attack->record.inserted.size()},
                  {"deleted", c.attack->record.deleted.size()},
                  {"accuracy_clean", c.accuracy_clean},
                  {"accuracy_poisoned", c.accuracy_poisoned}});
  }
  summary["cells"] = jc;

  if (spec.sanitation) {
    std::ostringstream out;
    out << "power,seed,sanitizer,method,r_asb,budget,deleted,early_stopped,esr,f1,cr,accuracy_clean,"
           "accuracy_poisoned,accuracy_sanitized\n";
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      for (std::size_t k = 0; k < per_cell; ++k) {
        const SanitationRow& r = san[ci * per_cell + k];
        out << fmt(cells[ci].power) << ',' << cells[ci].seed << ',' << r.label << ',' << r.method << ','
            << fmt(r.r_asb) << ',' << r.budget << ',' << r.deleted << ',' << (r.early_stopped ? 1 : 0) << ','
            << fmt(r.report.esr) << ',' << fmt(r.report.f1) << ',' << fmt(r.report.cr) << ','
            << fmt(cells[ci].accuracy_clean) << ',' << fmt(r.report.accuracy_before) << ','
            << fmt(r.report.accuracy_after) << '\n';
      }
    }
    write_text(spec.output_dir / "sanitation.csv", out.str());

    nlohmann::json agg = nlohmann::json::array();
    for (double power : spec.powers) {
      for (std::size_t si = 0; si < spec.sanitizers.size(); ++si) {
        for (std::size_t ri = 0; ri < spec.r_asb.size(); ++ri) {
          double e = 0, f = 0, cr_sum = 0, before = 0, after = 0;
          int n = 0;
          for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            if (cells[ci].power != power) continue;
            const SanitationRow& r = san[ci * per_cell + si * spec.r_asb.size() + ri];
            e += r.report.esr;
            f += r.report.f1;
            cr_sum += r.report.cr;
            before += r.report.accuracy_before;
            after += r.report.accuracy_after;
            ++n;
          }
          agg.push_back({{"sanitizer", spec.sanitizers[si].label},
                         {"power", power},
                         {"r_asb", spec.r_asb[ri]},
                         {"mean_esr", e / n},
                         {"mean_f1", f / n},
                         {"mean_cr", cr_sum / n},
                         {"mean_accuracy_poisoned", before / n},
                         {"mean_accuracy_sanitized", after / n}});
        }
      }
    }
    summary["sanitation"] = agg;
  }

  if (spec.sequential_pruning) {
    std::ostringstream out;
    out << "power,seed,deleted,accuracy\n";
    nlohmann::json slopes = nlohmann::json::array();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      std::vector<double> x, y;
      for (const PruningPoint& p : seq[ci]) {
        out << fmt(cells[ci].power) << ',' << cells[ci].seed << ',' << p.deleted << ',' << fmt(p.accuracy) << '\n';
        x.push_back(p.deleted);
        y.push_back(p.accuracy);
      }
      nlohmann::json row = {{"power", cells[ci].power}, {"seed", cells[ci].seed}};
      row["slope"] = x.size() >= 2 ? nlohmann::json(regression_slope(x, y)) : nlohmann::json(nullptr);
      slopes.push_back(row);
    }
    write_text(spec.output_dir / "sequential_pruning.csv", out.str());
    summary["sequential_pruning"] = slopes;
  }

  if (spec.mixed_pruning) {
    std::ostringstream out;
    out << "power,seed,p,repetition,esr,accuracy\n";
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      std::vector<MixedPoint> all;
      for (std::size_t pi = 0; pi < spec.mixed_grid.size(); ++pi) {
        for (const MixedPoint& m : mix[ci * spec.mixed_grid.size() + pi]) {
          out << fmt(cells[ci].power) << ',' << cells[ci].seed << ',' << fmt(m.p) << ',' << m.repetition << ','
              << fmt(m.esr) << ',' << fmt(m.accuracy) << '\n';
          all.push_back(m);
        }
      }
      const std::vector<double> means = mean_accuracy_by_p(all, spec.mixed_grid);
      nlohmann::json row = {{"power", cells[ci].power}, {"seed", cells[ci].seed}, {"mean_accuracy", means}};
      row["spearman"] = spec.mixed_grid.size() >= 2 ? nlohmann::json(spearman(spec.mixed_grid, means))
                                                     : nlohmann::json(nullptr);
      rows.push_back(row);
    }
    write_text(spec.output_dir / "mixed_pruning.csv", out.str());
    summary["mixed_pruning"] = rows;
  }

  write_text(spec.output_dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

nlohmann::json run_experiment(const std::filesystem::path& spec_file) {
  const nlohmann::json j = parse_json_file(spec_file);
  return run_experiment(parse_experiment_spec(j, spec_file.parent_path()));
}

}  // namespace gsan
