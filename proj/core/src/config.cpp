#include "tabdist/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tabdist/common.hpp"
#include "tabdist/csv.hpp"
#include "tabdist/objectives.hpp"

namespace tabdist {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& origin, const std::string& key,
                            const std::string& value, const std::string& want) {
  throw ConfigError(origin + ": key '" + key + "' has invalid value '" + value +
                    "' (expected " + want + ")");
}

struct Field {
  const std::string& origin;
  const std::string& key;
  const std::string& value;

  double as_double() const {
    double v = 0.0;
    if (!try_parse_double(value, v)) bad_value(origin, key, value, "a number");
    return v;
  }
  long as_long() const {
    long v = 0;
    const std::string t = trim(value);
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc{} || r.ptr != t.data() + t.size()) {
      bad_value(origin, key, value, "an integer");
    }
    return v;
  }
  std::uint64_t as_u64() const {
    std::uint64_t v = 0;
    const std::string t = trim(value);
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc{} || r.ptr != t.data() + t.size()) {
      bad_value(origin, key, value, "an unsigned integer");
    }
    return v;
  }
  bool as_bool() const {
    if (value == "true" || value == "on" || value == "1") return true;
    if (value == "false" || value == "off" || value == "0") return false;
    bad_value(origin, key, value, "true/false");
  }
  bool is_auto() const { return value == "auto"; }
};

}  // namespace

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  auto where = [&]() { return origin + ":" + std::to_string(line_no); };

  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(where() + ": malformed section header '" + line + "'");
      }
      section = line.substr(1, line.size() - 2);
      static const std::vector<std::string> known = {
          "data", "split", "distill", "objective", "kernel",
          "eval", "calibrate", "project", "output"};
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ConfigError(where() + ": unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where() + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(where() + ": empty key");
    }
    if (section.empty()) {
      throw ConfigError(where() + ": key '" + key + "' appears before any section");
    }
    const std::string w = where();
    const Field f{w, key, value};

    if (section == "data") {
      if (key == "path") cfg.data_path = value;
      else if (key == "label_column") cfg.label_column = value;
      else if (key == "positive_value") cfg.positive_value = value;
      else if (key == "synthetic_n") cfg.synthetic_n = static_cast<int>(f.as_long());
      else if (key == "synthetic_d") cfg.synthetic_d = static_cast<int>(f.as_long());
      else if (key == "synthetic_ir") cfg.synthetic_ir = f.as_double();
      else if (key == "synthetic_sep") cfg.synthetic_sep = f.as_double();
      else throw ConfigError(w + ": unknown key '" + key + "' in [data]");
    } else if (section == "split") {
      if (key == "test_fraction") cfg.test_fraction = f.as_double();
      else if (key == "stratified") cfg.stratified = f.as_bool();
      else throw ConfigError(w + ": unknown key '" + key + "' in [split]");
    } else if (section == "distill") {
      if (key == "m") cfg.distill.coreset_size = f.as_long();
      else if (key == "epochs") cfg.distill.epochs = static_cast<int>(f.as_long());
      else if (key == "lr_x") cfg.distill.lr_points = f.as_double();
      else if (key == "lr_y") cfg.distill.lr_targets = f.as_double();
      else if (key == "batch_size") cfg.distill.batch_size = f.as_long();
      else if (key == "learn_labels") cfg.distill.learn_targets = f.as_bool();
      else if (key == "init") cfg.distill.init = init_kind_from_name(value);
      else if (key == "noise_sigma") cfg.distill.noise_sigma = f.as_double();
      else if (key == "synthetic_ir") {
        cfg.distill.synthetic_ir = f.is_auto() ? 0.0 : f.as_double();
      } else if (key == "ridge") cfg.distill.ridge = f.as_double();
      else if (key == "snapshot_every") cfg.distill.snapshot_every = static_cast<int>(f.as_long());
      else if (key == "seed") cfg.seed = f.as_u64();
      else throw ConfigError(w + ": unknown key '" + key + "' in [distill]");
    } else if (section == "objective") {
      auto& obj = cfg.distill.objective;
      if (key == "kind") obj.kind = objective_kind_from_name(value);
      else if (key == "gamma") obj.gamma = f.as_double();
      else if (key == "coe") {
        cfg.objective_coe_auto = f.is_auto();
        if (!cfg.objective_coe_auto) obj.coe = f.as_double();
      } else if (key == "alpha_w") {
        cfg.objective_alpha_w_auto = f.is_auto();
        if (!cfg.objective_alpha_w_auto) obj.alpha_w = f.as_double();
      } else if (key == "alpha_g") obj.alpha_g = f.as_double();
      else if (key == "beta_g") obj.beta_g = f.as_double();
      else if (key == "ir") {
        cfg.objective_ir_auto = f.is_auto();
        if (!cfg.objective_ir_auto) obj.ir = f.as_double();
      } else if (key == "coe_variant") {
        if (value == "rebalance") cfg.coe_positive_fraction = false;
        else if (value == "positive_fraction") cfg.coe_positive_fraction = true;
        else bad_value(w, key, value, "rebalance|positive_fraction");
      } else throw ConfigError(w + ": unknown key '" + key + "' in [objective]");
    } else if (section == "kernel") {
      auto& k = cfg.distill.kernel;
      if (key == "kind") k.kind = kernel_kind_from_name(value);
      else if (key == "bandwidth") k.bandwidth = f.is_auto() ? 0.0 : f.as_double();
      else if (key == "degree") k.degree = static_cast<int>(f.as_long());
      else if (key == "offset") k.offset = f.as_double();
      else throw ConfigError(w + ": unknown key '" + key + "' in [kernel]");
    } else if (section == "eval") {
      auto& cd = cfg.classifier_defaults;
      if (key == "objectives") {
        cfg.eval_objectives.clear();
        for (const auto& name : split_list(value)) {
          cfg.eval_objectives.push_back(objective_kind_from_name(name));
        }
      } else if (key == "sizes") {
        cfg.eval_sizes.clear();
        for (const auto& item : split_list(value)) {
          const Field g{w, key, item};
          cfg.eval_sizes.push_back(g.as_long());
        }
      } else if (key == "seeds") {
        cfg.eval_seeds.clear();
        for (const auto& item : split_list(value)) {
          const Field g{w, key, item};
          cfg.eval_seeds.push_back(g.as_u64());
        }
      } else if (key == "classifiers") {
        cfg.eval_classifiers.clear();
        for (const auto& name : split_list(value)) {
          cfg.eval_classifiers.push_back(classifier_kind_from_name(name));
        }
      } else if (key == "include_random_baseline") {
        cfg.include_random_baseline = f.as_bool();
      } else if (key == "include_full_baseline") {
        cfg.include_full_baseline = f.as_bool();
      } else if (key == "threshold") cfg.eval_threshold = f.as_double();
      else if (key == "project_size") cfg.project_size = f.as_long();
      else if (key == "krr_lambda") cd.krr_lambda = f.as_double();
      else if (key == "krr_bandwidth") {
        cd.krr_kernel.bandwidth = f.is_auto() ? 0.0 : f.as_double();
      } else if (key == "krr_regress_targets") cd.krr_regress_targets = f.as_bool();
      else if (key == "logreg_l2") cd.logreg_l2 = f.as_double();
      else if (key == "logreg_iterations") cd.logreg_iterations = static_cast<int>(f.as_long());
      else if (key == "knn_k") cd.knn_k = static_cast<int>(f.as_long());
      else if (key == "cart_max_depth") cd.cart_max_depth = static_cast<int>(f.as_long());
      else if (key == "cart_min_leaf") cd.cart_min_leaf = static_cast<int>(f.as_long());
      else if (key == "forest_trees") cd.forest_trees = static_cast<int>(f.as_long());
      else if (key == "forest_feature_fraction") cd.forest_feature_fraction = f.as_double();
      else if (key == "forest_max_depth") cd.forest_max_depth = static_cast<int>(f.as_long());
      else if (key == "forest_min_leaf") cd.forest_min_leaf = static_cast<int>(f.as_long());
      else if (key == "forest_bootstrap") cd.forest_bootstrap = f.as_bool();
      else throw ConfigError(w + ": unknown key '" + key + "' in [eval]");
    } else if (section == "calibrate") {
      if (key == "grid_alpha" || key == "grid_beta") {
        auto& grid = key == "grid_alpha" ? cfg.grid_alpha : cfg.grid_beta;
        grid.clear();
        for (const auto& item : split_list(value)) {
          const Field g{w, key, item};
          grid.push_back(g.as_double());
        }
      } else {
        throw ConfigError(w + ": unknown key '" + key + "' in [calibrate]");
      }
    } else if (section == "project") {
      if (key == "coresets") cfg.project_coresets = split_list(value);
      else throw ConfigError(w + ": unknown key '" + key + "' in [project]");
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else throw ConfigError(w + ": unknown key '" + key + "' in [output]");
    }
  }
  return cfg;
}

RunConfig parse_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str(), path.filename().string());
}

DistillConfig resolve_distill(const RunConfig& cfg, const Dataset& train) {
  DistillConfig d = cfg.distill;
  d.seed = cfg.seed;
  const double coe =
      rebalancing_coe(train.positives(), train.negatives(), cfg.coe_positive_fraction);
  if (cfg.objective_coe_auto) d.objective.coe = coe;
  if (cfg.objective_alpha_w_auto) d.objective.alpha_w = coe;
  if (cfg.objective_ir_auto) d.objective.ir = imbalance_ratio(train);
  return d;
}

std::uint64_t split_seed(const RunConfig& cfg) { return mix_seed(cfg.seed, 0x0051217ULL); }

}  // namespace tabdist
