// gsan: poison, sanitize and evaluate graph bundles from the shell.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "gsan/bundle_io.hpp"
#include "gsan/errors.hpp"
#include "gsan/experiment.hpp"
#include "gsan/metrics.hpp"
#include "gsan/poisoner.hpp"
#include "gsan/sanitizer.hpp"
#include "gsan/synthetic.hpp"
#include "gsan/text.hpp"

namespace fs = std::filesystem;
using namespace gsan;

namespace {

void write_json(const fs::path& file, const nlohmann::json& j) { text::write_file(file.string(), j.dump(2) + "\n"); }

int cmd_sbm(const SbmConfig& cfg, const fs::path& out) {
  save_bundle(make_sbm(cfg), out);
  write_json(out / "generator.json", {{"command", "sbm"},
                                       {"n", cfg.n},
                                       {"num_classes", cfg.num_classes},
                                       {"p_in", cfg.p_in},
                                       {"p_out", cfg.p_out},
                                       {"feature_dim", cfg.feature_dim},
                                       {"feature_signal", cfg.feature_signal},
                                       {"train_fraction", cfg.train_fraction},
                                       {"val_fraction", cfg.val_fraction},
                                       {"seed", cfg.seed}});
  std::cout << out.string() << "\n";
  return 0;
}

int cmd_poison(const fs::path& bundle, const std::string& method, double power, std::uint64_t seed,
               const fs::path& out) {
  const GraphBundle clean = load_bundle(bundle);
  AttackConfig ac;
  ac.power = power;
  ac.seed = seed;
  const PoisonResult r = method == "random" ? random_attack(clean, ac) : mettack_like(clean, ac);
  save_bundle(r.poisoned, out);
  save_poison(r.record, out / "poison.json");
  nlohmann::json steps = nlohmann::json::array();
  for (const AttackStep& s : r.trace) {
    steps.push_back({{"edge", {s.edge.u, s.edge.v}},
                     {"inserted", s.inserted},
                     {"score", s.score},
                     {"loss_before", s.loss_before},
                     {"loss_after", s.loss_after}});
  }
  write_json(out / "attack.json", {{"command", "poison"},
                                    {"bundle", bundle.string()},
                                    {"method", method},
                                    {"power", power},
                                    {"seed", seed},
                                    {"budget", attack_budget(clean, power)},
                                    {"inserted", r.record.inserted.size()},
                                    {"deleted", r.record.deleted.size()},
                                    {"trace", steps}});
  std::cout << "flipped " << r.record.size() << " pairs (" << r.record.inserted.size() << " inserted, "
            << r.record.deleted.size() << " deleted) -> " << out.string() << "\n";
  return 0;
}

int cmd_sanitize(const fs::path& bundle, const std::string& method, double ratio, std::optional<std::uint64_t> seed,
                 const std::string& params_file, const fs::path& out) {
  const GraphBundle poisoned = load_bundle(bundle);
  nlohmann::json params = nlohmann::json::object();
  if (!params_file.empty()) params = parse_json_file(params_file);
  SanitizerConfig cfg = sanitizer_config_from_json(params, params_file.empty() ? "/params" : params_file);
  if (seed) cfg.seed = *seed;
  SanitationResult r = run_sanitizer(method, poisoned, ratio, cfg);
  r.config["cli"] = {{"command", "sanitize"},
                     {"bundle", bundle.string()},
                     {"method", method},
                     {"budget_ratio", ratio},
                     {"budget", sanitation_budget(poisoned, ratio)},
                     {"params", params},
                     {"seed", cfg.seed}};
  save_result(r, out);
  std::cout << r.method << ": deleted " << r.deleted.size() << " edges" << (r.early_stopped ? " (early stop)" : "")
            << " -> " << out.string() << "\n";
  return 0;
}

int cmd_metrics(const fs::path& poison_file, const fs::path& result_path) {
  const PoisonRecord record = load_poison(poison_file);
  const SanitationResult r = load_result(result_path);
  const std::size_t poisoned_edges = r.sanitized.edge_count() + r.deleted.size();
  MetricsReport m = sanitation_metrics(record, r.deleted_set(), poisoned_edges);
  m.config = {{"command", "metrics"}, {"poison", poison_file.string()}, {"result", result_path.string()},
              {"method", r.method}};
  std::cout << m.to_json().dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const fs::path& bundle, const fs::path& sanitized_dir, int seeds, const std::string& poison_file) {
  const GraphBundle poisoned = load_bundle(bundle);
  const GraphBundle sanitized = load_bundle(sanitized_dir);
  if (sanitized.n() != poisoned.n()) throw BundleMismatch("bundles have different node counts");
  EdgeSet s_san;
  for (const Edge& e : poisoned.edge_list())
    if (!sanitized.has_edge(e.u, e.v)) s_san.insert(e);
  std::optional<PoisonRecord> record =
      poison_file.empty() ? load_poison_sidecar(bundle) : std::optional<PoisonRecord>(load_poison(poison_file));
  nlohmann::json out;
  if (record && record->size() > 0) {
    MetricsReport m = evaluate_defense(poisoned, sanitized, *record, s_san, seeds);
    out = m.to_json();
  } else {
    out = {{"accuracy_before", mean_test_accuracy(poisoned, {}, seeds)},
           {"accuracy_after", mean_test_accuracy(sanitized, {}, seeds)},
           {"seeds", seeds}};
  }
  out["removed_edges"] = s_san.size();
  out["cli"] = {{"command", "evaluate"}, {"bundle", bundle.string()}, {"sanitized", sanitized_dir.string()},
                {"seeds", seeds}, {"poison", poison_file}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_experiment(const fs::path& spec_file) {
  const nlohmann::json j = parse_json_file(spec_file);
  const ExperimentSpec spec = parse_experiment_spec(j, spec_file.parent_path());
  run_experiment(spec);
  std::cout << "results in " << spec.output_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph sanitation toolkit: poison, sanitize and evaluate graph bundles"};
  app.require_subcommand(1);
  int rc = 0;

  SbmConfig sbm;
  std::string sbm_out;
  auto* c_sbm = app.add_subcommand("sbm", "Generate a stochastic block model bundle");
  c_sbm->add_option("--n", sbm.n, "Node count")->check(CLI::PositiveNumber);
  c_sbm->add_option("--classes", sbm.num_classes, "Number of blocks")->check(CLI::PositiveNumber);
  c_sbm->add_option("--p-in", sbm.p_in, "Within-block edge probability")->check(CLI::Range(0.0, 1.0));
  c_sbm->add_option("--p-out", sbm.p_out, "Cross-block edge probability")->check(CLI::Range(0.0, 1.0));
  c_sbm->add_option("--dim", sbm.feature_dim, "Feature dimension")->check(CLI::PositiveNumber);
  c_sbm->add_option("--signal", sbm.feature_signal, "Class mean on owned feature dims");
  c_sbm->add_option("--seed", sbm.seed, "Random seed");
  c_sbm->add_option("--out", sbm_out, "Output bundle directory")->required();
  c_sbm->callback([&] { rc = cmd_sbm(sbm, sbm_out); });

  std::string p_bundle, p_out, p_method = "mettack";
  double p_power = 0.1;
  std::uint64_t p_seed = 0;
  auto* c_poison = app.add_subcommand("poison", "Poison a bundle with a greedy structure attack");
  c_poison->add_option("bundle", p_bundle, "Clean bundle directory")->required()->check(CLI::ExistingDirectory);
  c_poison->add_option("--power", p_power, "Fraction of |E| to flip, in (0, 0.5]");
  c_poison->add_option("--seed", p_seed, "Random seed");
  c_poison->add_option("--method", p_method, "mettack or random")->check(CLI::IsMember({"mettack", "random"}));
  c_poison->add_option("--out", p_out, "Output bundle directory")->required();
  c_poison->callback([&] { rc = cmd_poison(p_bundle, p_method, p_power, p_seed, p_out); });

  std::string s_bundle, s_out, s_method, s_params;
  double s_ratio = 0.1;
  std::optional<std::uint64_t> s_seed;
  auto* c_san = app.add_subcommand("sanitize", "Delete suspected adversarial edges");
  c_san->add_option("bundle", s_bundle, "Poisoned bundle directory")->required()->check(CLI::ExistingDirectory);
  c_san->add_option("--method", s_method, "cld, lp, gasoline-d, jaccard or lp-only")
      ->required()
      ->check(CLI::IsMember({"cld", "lp", "gasoline-d", "jaccard", "lp-only"}));
  c_san->add_option("--budget-ratio", s_ratio, "Deletion budget as a fraction of |E|");
  c_san->add_option("--seed", s_seed, "Seed for detector training");
  c_san->add_option("--params", s_params, "JSON file of sanitizer parameters")->check(CLI::ExistingFile);
  c_san->add_option("--out", s_out, "Output directory (sanitized bundle + result.json)")->required();
  c_san->callback([&] { rc = cmd_sanitize(s_bundle, s_method, s_ratio, s_seed, s_params, s_out); });

  std::string m_poison, m_result;
  auto* c_met = app.add_subcommand("metrics", "ESR, F1 and CR of a sanitation result");
  c_met->add_option("poison", m_poison, "poison.json of the attack")->required()->check(CLI::ExistingFile);
  c_met->add_option("result", m_result, "result.json or its directory")->required()->check(CLI::ExistingPath);
  c_met->callback([&] { rc = cmd_metrics(m_poison, m_result); });

  std::string e_bundle, e_sanitized, e_poison;
  int e_seeds = 10;
  auto* c_eval = app.add_subcommand("evaluate", "Mean GNN test accuracy before and after sanitation");
  c_eval->add_option("bundle", e_bundle, "Poisoned bundle directory")->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("sanitized", e_sanitized, "Sanitized bundle directory")->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--seeds", e_seeds, "Training seeds to average")->check(CLI::PositiveNumber);
  c_eval->add_option("--poison", e_poison, "poison.json (default: the bundle's sidecar)")->check(CLI::ExistingFile);
  c_eval->callback([&] { rc = cmd_evaluate(e_bundle, e_sanitized, e_seeds, e_poison); });

  std::string x_spec;
  auto* c_exp = app.add_subcommand("experiment", "Run an experiment grid from a JSON spec");
  c_exp->add_option("spec", x_spec, "Experiment spec file")->required()->check(CLI::ExistingFile);
  c_exp->callback([&] { rc = cmd_experiment(x_spec); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const SpecError& e) {
    std::cerr << "gsan: invalid spec: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "gsan: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gsan: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
