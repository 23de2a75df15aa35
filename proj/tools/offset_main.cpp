// Command-line harness: generate synthetic click logs, replay them through
// the engine and baselines, inspect model snapshots.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "offset/offset.hpp"

namespace {

offset::RulesetRef parse_ruleset_flag(const std::string& value) {
  if (value == "table2_stable" || value == "table2_trending") {
    return offset::RulesetRef{value, {}};
  }
  return offset::RulesetRef{"", std::filesystem::path(value)};
}

struct CommonFlags {
  std::string config_file;
  std::string preset;
};

offset::ExperimentConfig resolve_config(const CommonFlags& flags) {
  offset::ExperimentConfig cfg;
  if (!flags.preset.empty()) {
    cfg = offset::named_preset(flags.preset);
  }
  if (!flags.config_file.empty()) {
    offset::apply_json_overlay(cfg, offset::load_json_file(flags.config_file));
  }
  return cfg;
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("-c,--config", flags.config_file,
                  "JSON experiment config; overrides the preset");
  cmd->add_option("-p,--preset", flags.preset,
                  "named preset: paper-synthetic or paper-synthetic-trending");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offset: online latent-factor ad-variant ranking over replayed click logs"};
  app.require_subcommand(1);

  // generate
  CommonFlags gen_flags;
  std::optional<std::uint64_t> gen_seed;
  std::optional<std::uint64_t> gen_samples;
  std::optional<std::uint64_t> gen_switch;
  std::string gen_out;
  std::string gen_ruleset;
  std::string gen_ruleset_after;
  auto* gen = app.add_subcommand("generate", "generate a synthetic observation log");
  add_common_flags(gen, gen_flags);
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("-n,--samples", gen_samples, "number of observations");
  gen->add_option("-o,--out", gen_out, "output log path");
  gen->add_option("--ruleset", gen_ruleset,
                  "table2_stable, table2_trending, or a rules JSON file");
  gen->add_option("--ruleset-after", gen_ruleset_after,
                  "ruleset used from --trend-switch onward");
  gen->add_option("--trend-switch", gen_switch,
                  "1-based sample index at which the ruleset is swapped");

  // replay
  CommonFlags rep_flags;
  std::string rep_log;
  std::string rep_train;
  std::string rep_test;
  std::string rep_snapshot_in;
  std::string rep_snapshot_out;
  std::string rep_report;
  std::string rep_mode;
  std::string rep_warmup_unit;
  std::string rep_baselines;
  std::optional<std::uint64_t> rep_warmup;
  std::optional<double> rep_alpha;
  std::optional<std::uint64_t> rep_seed;
  auto* rep = app.add_subcommand("replay", "replay a log through the ranking algorithms");
  add_common_flags(rep, rep_flags);
  rep->add_option("--log", rep_log, "log for online replay");
  rep->add_option("--train-log", rep_train, "training log (train-then-test mode)");
  rep->add_option("--test-log", rep_test, "evaluation log (train-then-test mode)");
  rep->add_option("--mode", rep_mode, "online or train-then-test");
  rep->add_option("--warmup", rep_warmup, "warm-up size for online mode");
  rep->add_option("--warmup-unit", rep_warmup_unit, "observations or clicks");
  rep->add_option("--alpha", rep_alpha, "learning rate for click steps");
  rep->add_option("--seed", rep_seed, "model initialization seed");
  rep->add_option("--snapshot-in", rep_snapshot_in, "resume from this model snapshot");
  rep->add_option("--snapshot-out", rep_snapshot_out, "save the final model snapshot here");
  rep->add_option("--report", rep_report, "report output path");
  rep->add_option("--baselines", rep_baselines,
                  "comma-separated baselines (popularity,random) or 'none'");

  // inspect
  std::string inspect_path;
  auto* ins = app.add_subcommand("inspect", "print a snapshot's layout, norms, and state");
  ins->add_option("snapshot", inspect_path, "snapshot file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      offset::ExperimentConfig cfg = resolve_config(gen_flags);
      if (gen_seed) cfg.generator.seed = *gen_seed;
      if (gen_samples) cfg.generator.samples = *gen_samples;
      if (!gen_out.empty()) cfg.paths.log_out = gen_out;
      if (!gen_ruleset.empty()) cfg.generator.ruleset = parse_ruleset_flag(gen_ruleset);
      if (!gen_ruleset_after.empty()) {
        cfg.generator.ruleset_after = parse_ruleset_flag(gen_ruleset_after);
      }
      if (gen_switch) cfg.generator.trend_switch = *gen_switch;
      return offset::cmd_generate(cfg, std::cout);
    }
    if (rep->parsed()) {
      offset::ExperimentConfig cfg = resolve_config(rep_flags);
      if (!rep_log.empty()) {
        cfg.paths.log_in = rep_log;
        if (rep_mode.empty()) {
          cfg.protocol.mode = offset::ReplayMode::online;
        }
      }
      if (!rep_train.empty()) cfg.paths.train_log = rep_train;
      if (!rep_test.empty()) cfg.paths.test_log = rep_test;
      if (!rep_mode.empty()) {
        if (rep_mode == "online") {
          cfg.protocol.mode = offset::ReplayMode::online;
        } else if (rep_mode == "train-then-test") {
          cfg.protocol.mode = offset::ReplayMode::train_then_test;
        } else {
          throw offset::InvalidConfig("--mode must be 'online' or 'train-then-test'");
        }
      }
      if (rep_warmup) cfg.protocol.warmup = *rep_warmup;
      if (!rep_warmup_unit.empty()) {
        if (rep_warmup_unit == "observations") {
          cfg.protocol.warmup_unit = offset::WarmupUnit::observations;
        } else if (rep_warmup_unit == "clicks") {
          cfg.protocol.warmup_unit = offset::WarmupUnit::clicks;
        } else {
          throw offset::InvalidConfig("--warmup-unit must be 'observations' or 'clicks'");
        }
      }
      if (rep_alpha) cfg.model.alpha = *rep_alpha;
      if (rep_seed) cfg.model.init_seed = *rep_seed;
      if (!rep_snapshot_in.empty()) cfg.paths.snapshot_in = rep_snapshot_in;
      if (!rep_snapshot_out.empty()) cfg.paths.snapshot_out = rep_snapshot_out;
      if (!rep_report.empty()) cfg.paths.report_out = rep_report;
      if (!rep_baselines.empty()) {
        cfg.baselines.enabled.clear();
        if (rep_baselines != "none") {
          std::string rest = rep_baselines;
          while (!rest.empty()) {
            const auto comma = rest.find(',');
            cfg.baselines.enabled.push_back(rest.substr(0, comma));
            rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
          }
          for (const auto& name : cfg.baselines.enabled) {
            if (name != "popularity" && name != "random") {
              throw offset::InvalidConfig("--baselines: unknown baseline '" + name + "'");
            }
          }
        }
      }
      return offset::cmd_replay(cfg, std::cout);
    }
    return offset::cmd_inspect(inspect_path, std::cout);
  } catch (const offset::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const offset::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const offset::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const offset::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
