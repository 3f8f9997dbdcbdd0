#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabdist/artifacts.hpp"
#include "tabdist/calibrate.hpp"
#include "tabdist/classifiers.hpp"
#include "tabdist/common.hpp"
#include "tabdist/config.hpp"
#include "tabdist/csv.hpp"
#include "tabdist/dataset.hpp"
#include "tabdist/distill.hpp"
#include "tabdist/evaluate.hpp"
#include "tabdist/pca.hpp"

namespace {

using namespace tabdist;

struct Cli {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool force = false;
  bool seed_given = false;
  bool out_given = false;
};

RunConfig load_config(const Cli& cli) {
  RunConfig cfg =
      cli.config_path.empty() ? RunConfig{} : parse_run_config(cli.config_path);
  if (cli.seed_given) cfg.seed = cli.seed;
  if (cli.out_given) cfg.out_dir = cli.out_dir;
  return cfg;
}

Dataset load_or_generate(const RunConfig& cfg) {
  if (!cfg.data_path.empty()) {
    return load_csv(cfg.data_path, cfg.label_column, cfg.positive_value);
  }
  return gen_synthetic(cfg.synthetic_n, cfg.synthetic_d, cfg.synthetic_ir,
                       cfg.synthetic_sep, cfg.seed);
}

std::string dataset_id(const RunConfig& cfg) {
  if (cfg.data_path.empty()) return "synthetic";
  return std::filesystem::path(cfg.data_path).stem().string();
}

std::pair<Dataset, Dataset> standardized_split(const RunConfig& cfg, const Dataset& raw) {
  SplitSpec spec;
  spec.test_fraction = cfg.test_fraction;
  spec.stratified = cfg.stratified;
  spec.seed = split_seed(cfg);
  return split(standardize(raw), spec);
}

std::filesystem::path open_run_dir(const Cli& cli, const RunConfig& cfg) {
  const auto dir = prepare_run_dir(cfg.out_dir, cli.force);
  if (!cli.config_path.empty()) snapshot_config(cli.config_path, dir);
  return dir;
}

int cmd_gen(const Cli& cli) {
  const RunConfig cfg = load_config(cli);
  const auto dir = open_run_dir(cli, cfg);
  const Dataset ds = gen_synthetic(cfg.synthetic_n, cfg.synthetic_d, cfg.synthetic_ir,
                                   cfg.synthetic_sep, cfg.seed);
  save_csv(ds, dir / "dataset.csv", cfg.label_column);
  write_manifest(dir);
  std::cout << "gen n=" << ds.rows() << " d=" << ds.cols()
            << " ir=" << format_double(imbalance_ratio(ds)) << " -> " << dir.string()
            << "\n";
  return 0;
}

int cmd_distill(const Cli& cli) {
  const RunConfig cfg = load_config(cli);
  const auto dir = open_run_dir(cli, cfg);
  const Dataset raw = load_or_generate(cfg);
  auto [train, test] = standardized_split(cfg, raw);
  const DistillConfig dcfg = resolve_distill(cfg, train);

  DistillResult out;
  try {
    out = distill(train, dcfg);
  } catch (const DivergenceError& e) {
    export_trace(e.trace, dir / "trace.csv");  // keep everything up to the failure
    write_manifest(dir);
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  DistillConfig provenance = dcfg;
  if (provenance.kernel.kind == KernelKind::rbf && !(provenance.kernel.bandwidth > 0.0)) {
    provenance.kernel.bandwidth = out.trace.resolved_bandwidth;
  }
  export_coreset(out.coreset, train.feature_names, *train.standardization, provenance,
                 out.trace.final_full_loss, dataset_hash(train), dir / "coreset.csv");
  export_trace(out.trace, dir / "trace.csv");
  write_manifest(dir);
  std::cout << "distill m=" << out.coreset.rows()
            << " objective=" << objective_kind_name(dcfg.objective.kind)
            << " final_loss=" << format_double(out.trace.final_full_loss) << " -> "
            << dir.string() << "\n";
  return 0;
}

int cmd_sweep(const Cli& cli) {
  const RunConfig cfg = load_config(cli);
  const auto dir = open_run_dir(cli, cfg);
  const Dataset raw = load_or_generate(cfg);
  auto [train, test] = standardized_split(cfg, raw);

  SweepPlan plan;
  plan.base = resolve_distill(cfg, train);
  for (const auto kind : cfg.eval_objectives) {
    ObjectiveSpec o = plan.base.objective;
    o.kind = kind;
    plan.objectives.push_back(o);
  }
  plan.sizes = cfg.eval_sizes;
  for (const auto kind : cfg.eval_classifiers) {
    ClassifierSpec c = cfg.classifier_defaults;
    c.kind = kind;
    plan.classifiers.push_back(c);
  }
  plan.seeds = cfg.eval_seeds.empty() ? std::vector<std::uint64_t>{cfg.seed}
                                      : cfg.eval_seeds;
  plan.include_random_baseline = cfg.include_random_baseline;
  plan.include_full_baseline = cfg.include_full_baseline;
  plan.dataset_id = dataset_id(cfg);
  plan.threshold = cfg.eval_threshold;
  plan.jobs = cli.jobs;

  const SweepResult result = sweep(train, test, plan);
  write_sweep_csv(result, dir / "sweep.csv");
  write_sweep_json(result, dir / "sweep.json");

  if (cfg.project_size > 0) {
    // One coreset per objective at the designated size, re-derived with the
    // same cell seed the sweep used so the projection matches its rows.
    std::size_t si = 0;
    const auto it = std::find(plan.sizes.begin(), plan.sizes.end(), cfg.project_size);
    if (it != plan.sizes.end()) {
      si = static_cast<std::size_t>(it - plan.sizes.begin());
    }
    std::vector<std::pair<std::string, SyntheticSet>> coresets;
    for (const auto& objective : plan.objectives) {
      DistillConfig dcfg = plan.base;
      dcfg.coreset_size = cfg.project_size;
      dcfg.objective = objective;
      dcfg.seed = sweep_cell_seed(plan.seeds.front(), si);
      try {
        coresets.emplace_back(objective_kind_name(objective.kind),
                              distill(train, dcfg).coreset);
      } catch (const std::exception& e) {
        std::cerr << "warning: projection coreset for "
                  << objective_kind_name(objective.kind) << " failed: " << e.what()
                  << "\n";
      }
    }
    write_projection_csv(projection_report(train, coresets), dir / "projection.csv");
  }

  write_manifest(dir);
  std::cout << "sweep rows=" << result.rows.size() << " -> " << dir.string() << "\n";
  return 0;
}

int cmd_calibrate(const Cli& cli) {
  const RunConfig cfg = load_config(cli);
  const auto dir = open_run_dir(cli, cfg);
  const Dataset raw = load_or_generate(cfg);
  const CalibrationResult res =
      calibrate_g(raw, cfg.grid_alpha, cfg.grid_beta, cfg.seed, cli.jobs);

  nlohmann::json j;
  j["alpha_g"] = res.alpha_g;
  j["beta_g"] = res.beta_g;
  j["best_auc"] = res.best_auc;
  j["cells"] = nlohmann::json::array();
  for (const auto& cell : res.cells) {
    j["cells"].push_back({{"alpha_g", cell.alpha_g},
                          {"beta_g", cell.beta_g},
                          {"auc", cell.auc},
                          {"status", cell.status}});
  }
  write_text_atomic(dir / "calibration.json", j.dump(2) + "\n");
  write_manifest(dir);
  std::cout << "calibrate alpha_g=" << format_double(res.alpha_g)
            << " beta_g=" << format_double(res.beta_g)
            << " auc=" << format_double(res.best_auc) << " -> " << dir.string() << "\n";
  return 0;
}

int cmd_project(const Cli& cli) {
  const RunConfig cfg = load_config(cli);
  const auto dir = open_run_dir(cli, cfg);
  const Dataset original = standardize(load_or_generate(cfg));

  std::vector<std::pair<std::string, SyntheticSet>> coresets;
  for (const auto& path : cfg.project_coresets) {
    coresets.emplace_back(std::filesystem::path(path).stem().string(),
                          import_coreset(path).synthetic);
  }
  const auto rows = projection_report(original, coresets);
  write_projection_csv(rows, dir / "projection.csv");
  write_manifest(dir);
  std::cout << "project rows=" << rows.size() << " -> " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataset distillation for imbalanced tabular binary classification"};
  app.require_subcommand(1);
  app.fallthrough();

  Cli cli;
  auto* config_opt = app.add_option("--config", cli.config_path, "Run configuration file");
  auto* out_opt = app.add_option("--out", cli.out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", cli.seed, "Master seed (overrides config)");
  app.add_option("--jobs", cli.jobs, "Parallel grid cells")->check(CLI::PositiveNumber);
  app.add_flag("--force", cli.force, "Allow writing into an existing output directory");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  auto* distill_cmd = app.add_subcommand("distill", "Distill a coreset");
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the evaluation grid");
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Grid-search the asig shift");
  auto* project_cmd = app.add_subcommand("project", "PCA-project original data and coresets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  (void)config_opt;
  cli.seed_given = seed_opt->count() > 0;
  cli.out_given = out_opt->count() > 0;

  try {
    if (app.got_subcommand(gen)) return cmd_gen(cli);
    if (app.got_subcommand(distill_cmd)) return cmd_distill(cli);
    if (app.got_subcommand(sweep_cmd)) return cmd_sweep(cli);
    if (app.got_subcommand(calibrate_cmd)) return cmd_calibrate(cli);
    if (app.got_subcommand(project_cmd)) return cmd_project(cli);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
