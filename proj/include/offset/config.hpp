#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "offset/errors.hpp"
#include "offset/replay.hpp"
#include "offset/rules.hpp"
#include "offset/trainer.hpp"

namespace offset {

// Reference to a rule table: a built-in name or a JSON file.
struct RulesetRef {
  std::string name;             // "table2_stable" or "table2_trending"
  std::filesystem::path file;   // wins when non-empty

  bool operator==(const RulesetRef&) const = default;
};

enum class ReplayMode { online, train_then_test };

// One experiment: how to generate a log, how to build the model, which
// baselines to run, and how to replay. Sections map 1:1 to the JSON config.
struct ExperimentConfig {
  struct Generator {
    std::uint64_t seed = 1;
    std::uint64_t samples = 1000;
    RulesetRef ruleset{"table2_stable", {}};
    std::optional<RulesetRef> ruleset_after;
    std::optional<std::uint64_t> trend_switch;
    // Feature name -> sampling weights; absent features stay uniform.
    std::map<std::string, std::vector<double>> feature_weights;

    bool operator==(const Generator&) const = default;
  } generator;

  struct ModelSection {
    int standalone_dim = 2;
    int overlap_dim = 4;
    double alpha = 0.05;
    double gamma = 0.02;
    std::uint64_t mu_update_cadence = 1000;
    double mu_initial = -0.01;
    double bound_b = 1.0;
    RescaleMode rescale_mode = RescaleMode::off;
    std::uint64_t layout_seed = 7;
    std::uint64_t init_seed = 13;

    TrainerConfig trainer_config() const {
      TrainerConfig cfg;
      cfg.alpha = alpha;
      cfg.gamma = gamma;
      cfg.mu_update_cadence = mu_update_cadence;
      cfg.mu_initial = mu_initial;
      cfg.rescale_mode = rescale_mode;
      return cfg;
    }

    bool operator==(const ModelSection&) const = default;
  } model;

  struct Baselines {
    std::vector<std::string> enabled{"popularity", "random"};
    double decay_factor = 0.5;
    std::uint64_t decay_cadence = 1'000'000;
    std::uint64_t random_seed = 17;

    bool operator==(const Baselines&) const = default;
  } baselines;

  struct Protocol {
    ReplayMode mode = ReplayMode::online;
    std::uint64_t warmup = 0;
    WarmupUnit warmup_unit = WarmupUnit::observations;

    bool operator==(const Protocol&) const = default;
  } protocol;

  struct Paths {
    std::filesystem::path log_out;
    std::filesystem::path log_in;
    std::filesystem::path train_log;
    std::filesystem::path test_log;
    std::filesystem::path snapshot_in;
    std::filesystem::path snapshot_out;
    std::filesystem::path report_out;

    bool operator==(const Paths&) const = default;
  } paths;

  bool operator==(const ExperimentConfig&) const = default;
};

// Everything needed to rerun the synthetic benchmark: the stable rule table,
// 8M samples per log, train-then-test replay, defaults for the trainer.
inline ExperimentConfig paper_synthetic_preset() {
  ExperimentConfig cfg;
  cfg.generator.seed = 11;
  cfg.generator.samples = 8'000'000;
  cfg.generator.ruleset = RulesetRef{"table2_stable", {}};
  cfg.protocol.mode = ReplayMode::train_then_test;
  return cfg;
}

// Same benchmark with the preference flip halfway through the training log.
inline ExperimentConfig paper_synthetic_trending_preset() {
  ExperimentConfig cfg = paper_synthetic_preset();
  cfg.generator.trend_switch = 4'000'000;
  cfg.generator.ruleset_after = RulesetRef{"table2_trending", {}};
  return cfg;
}

inline ExperimentConfig named_preset(const std::string& name) {
  if (name == "paper-synthetic") {
    return paper_synthetic_preset();
  }
  if (name == "paper-synthetic-trending") {
    return paper_synthetic_trending_preset();
  }
  throw InvalidConfig("unknown preset '" + name + "'");
}

namespace detail {

inline void require_keys(const nlohmann::json& j, const char* section,
                         std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw InvalidConfig(std::string("config: unknown key '") + key + "' in section '" +
                          section + "'");
    }
  }
}

inline RulesetRef parse_ruleset_ref(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name != "table2_stable" && name != "table2_trending") {
      throw InvalidConfig("config: unknown ruleset '" + name +
                          "' (expected table2_stable, table2_trending, or {\"file\": ...})");
    }
    return RulesetRef{name, {}};
  }
  if (j.is_object() && j.contains("file")) {
    return RulesetRef{"", std::filesystem::path(j.at("file").get<std::string>())};
  }
  throw InvalidConfig("config: ruleset must be a name or {\"file\": path}");
}

}  // namespace detail

// Applies a partial JSON document on top of `cfg`. Unknown keys are errors;
// absent keys keep their current values, so presets, config files and CLI
// flags layer cleanly.
inline void apply_json_overlay(ExperimentConfig& cfg, const nlohmann::json& j) {
  try {
    detail::require_keys(j, "<root>",
                         {"generator", "model", "baselines", "protocol", "paths"});
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      detail::require_keys(g, "generator",
                           {"seed", "samples", "ruleset", "ruleset_after", "trend_switch",
                            "feature_weights"});
      if (g.contains("seed")) cfg.generator.seed = g.at("seed").get<std::uint64_t>();
      if (g.contains("samples")) cfg.generator.samples = g.at("samples").get<std::uint64_t>();
      if (g.contains("ruleset")) cfg.generator.ruleset = detail::parse_ruleset_ref(g.at("ruleset"));
      if (g.contains("ruleset_after")) {
        if (g.at("ruleset_after").is_null()) {
          cfg.generator.ruleset_after.reset();
        } else {
          cfg.generator.ruleset_after = detail::parse_ruleset_ref(g.at("ruleset_after"));
        }
      }
      if (g.contains("trend_switch")) {
        if (g.at("trend_switch").is_null()) {
          cfg.generator.trend_switch.reset();
        } else {
          cfg.generator.trend_switch = g.at("trend_switch").get<std::uint64_t>();
        }
      }
      if (g.contains("feature_weights")) {
        cfg.generator.feature_weights.clear();
        for (const auto& [feature, weights] : g.at("feature_weights").items()) {
          cfg.generator.feature_weights[feature] = weights.get<std::vector<double>>();
        }
      }
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      detail::require_keys(m, "model",
                           {"standalone_dim", "overlap_dim", "alpha", "gamma",
                            "mu_update_cadence", "mu_initial", "bound_b", "rescale_mode",
                            "layout_seed", "init_seed"});
      if (m.contains("standalone_dim")) cfg.model.standalone_dim = m.at("standalone_dim").get<int>();
      if (m.contains("overlap_dim")) cfg.model.overlap_dim = m.at("overlap_dim").get<int>();
      if (m.contains("alpha")) cfg.model.alpha = m.at("alpha").get<double>();
      if (m.contains("gamma")) cfg.model.gamma = m.at("gamma").get<double>();
      if (m.contains("mu_update_cadence")) {
        cfg.model.mu_update_cadence = m.at("mu_update_cadence").get<std::uint64_t>();
      }
      if (m.contains("mu_initial")) cfg.model.mu_initial = m.at("mu_initial").get<double>();
      if (m.contains("bound_b")) cfg.model.bound_b = m.at("bound_b").get<double>();
      if (m.contains("rescale_mode")) {
        const auto mode = m.at("rescale_mode").get<std::string>();
        if (mode == "off") {
          cfg.model.rescale_mode = RescaleMode::off;
        } else if (mode == "linf_clip") {
          cfg.model.rescale_mode = RescaleMode::linf_clip;
        } else {
          throw InvalidConfig("config: rescale_mode must be 'off' or 'linf_clip'");
        }
      }
      if (m.contains("layout_seed")) cfg.model.layout_seed = m.at("layout_seed").get<std::uint64_t>();
      if (m.contains("init_seed")) cfg.model.init_seed = m.at("init_seed").get<std::uint64_t>();
    }
    if (j.contains("baselines")) {
      const auto& b = j.at("baselines");
      detail::require_keys(b, "baselines",
                           {"enabled", "decay_factor", "decay_cadence", "random_seed"});
      if (b.contains("enabled")) {
        cfg.baselines.enabled = b.at("enabled").get<std::vector<std::string>>();
        for (const auto& name : cfg.baselines.enabled) {
          if (name != "popularity" && name != "random") {
            throw InvalidConfig("config: unknown baseline '" + name + "'");
          }
        }
      }
      if (b.contains("decay_factor")) cfg.baselines.decay_factor = b.at("decay_factor").get<double>();
      if (b.contains("decay_cadence")) {
        cfg.baselines.decay_cadence = b.at("decay_cadence").get<std::uint64_t>();
      }
      if (b.contains("random_seed")) cfg.baselines.random_seed = b.at("random_seed").get<std::uint64_t>();
    }
    if (j.contains("protocol")) {
      const auto& p = j.at("protocol");
      detail::require_keys(p, "protocol", {"mode", "warmup", "warmup_unit"});
      if (p.contains("mode")) {
        const auto mode = p.at("mode").get<std::string>();
        if (mode == "online") {
          cfg.protocol.mode = ReplayMode::online;
        } else if (mode == "train-then-test") {
          cfg.protocol.mode = ReplayMode::train_then_test;
        } else {
          throw InvalidConfig("config: protocol mode must be 'online' or 'train-then-test'");
        }
      }
      if (p.contains("warmup")) cfg.protocol.warmup = p.at("warmup").get<std::uint64_t>();
      if (p.contains("warmup_unit")) {
        const auto unit = p.at("warmup_unit").get<std::string>();
        if (unit == "observations") {
          cfg.protocol.warmup_unit = WarmupUnit::observations;
        } else if (unit == "clicks") {
          cfg.protocol.warmup_unit = WarmupUnit::clicks;
        } else {
          throw InvalidConfig("config: warmup_unit must be 'observations' or 'clicks'");
        }
      }
    }
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      detail::require_keys(p, "paths",
                           {"log_out", "log_in", "train_log", "test_log", "snapshot_in",
                            "snapshot_out", "report_out"});
      const auto read_path = [&](const char* key, std::filesystem::path& into) {
        if (p.contains(key)) {
          into = p.at(key).is_null() ? std::filesystem::path{}
                                     : std::filesystem::path(p.at(key).get<std::string>());
        }
      };
      read_path("log_out", cfg.paths.log_out);
      read_path("log_in", cfg.paths.log_in);
      read_path("train_log", cfg.paths.train_log);
      read_path("test_log", cfg.paths.test_log);
      read_path("snapshot_in", cfg.paths.snapshot_in);
      read_path("snapshot_out", cfg.paths.snapshot_out);
      read_path("report_out", cfg.paths.report_out);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
}

inline nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig("file '" + path.string() + "': " + e.what());
  }
}

// Custom rule tables: {"variants": L, "rules": [{"birth_year": [lo, hi] |
// "ALL", "geo": ..., "gender": ..., "variant": id | "ALL", "ctr_lift": p}]}.
inline RuleSet ruleset_from_json(const nlohmann::json& j) {
  RuleSet rules;
  try {
    detail::require_keys(j, "ruleset", {"variants", "rules"});
    rules.variant_count = j.at("variants").get<std::uint32_t>();
    for (const auto& r : j.at("rules")) {
      detail::require_keys(r, "rule", {"birth_year", "geo", "gender", "variant", "ctr_lift"});
      Rule rule;
      if (r.contains("birth_year") && !r.at("birth_year").is_null() &&
          r.at("birth_year") != "ALL") {
        const auto range = r.at("birth_year").get<std::vector<int>>();
        if (range.size() != 2 || range[0] > range[1]) {
          throw InvalidConfig("ruleset: birth_year must be [lo, hi] with lo <= hi");
        }
        rule.birth_year_range = {range[0], range[1]};
      }
      if (r.contains("geo") && !r.at("geo").is_null() && r.at("geo") != "ALL") {
        rule.geo = r.at("geo").get<std::string>();
      }
      if (r.contains("gender") && !r.at("gender").is_null() && r.at("gender") != "ALL") {
        rule.gender = r.at("gender").get<std::string>();
      }
      if (r.contains("variant") && !r.at("variant").is_null() && r.at("variant") != "ALL") {
        rule.variant = r.at("variant").get<std::uint32_t>();
      }
      rule.ctr_lift = r.at("ctr_lift").get<double>();
      rules.rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("ruleset: ") + e.what());
  }
  return rules;
}

inline RuleSet load_ruleset(const RulesetRef& ref) {
  if (!ref.file.empty()) {
    return ruleset_from_json(load_json_file(ref.file));
  }
  if (ref.name == "table2_stable") {
    return table2_stable_rules();
  }
  if (ref.name == "table2_trending") {
    return table2_trending_rules();
  }
  throw InvalidConfig("unknown ruleset '" + ref.name + "'");
}

}  // namespace offset
