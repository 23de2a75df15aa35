#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "offset/config.hpp"
#include "offset/datagen.hpp"
#include "offset/errors.hpp"
#include "offset/log_io.hpp"
#include "offset/ranker.hpp"
#include "offset/replay.hpp"
#include "offset/snapshot.hpp"

namespace offset {

namespace detail {

inline GeneratorConfig build_generator_config(const ExperimentConfig& cfg) {
  GeneratorConfig gen;
  gen.seed = cfg.generator.seed;
  gen.n_samples = cfg.generator.samples;
  gen.schema = default_synthetic_schema();
  gen.trend_switch = cfg.generator.trend_switch;
  if (!cfg.generator.feature_weights.empty()) {
    gen.feature_weights.assign(gen.schema.feature_count(), {});
    for (const auto& [feature, weights] : cfg.generator.feature_weights) {
      bool found = false;
      for (std::size_t k = 0; k < gen.schema.feature_count(); ++k) {
        if (gen.schema.features[k].name == feature) {
          gen.feature_weights[k] = weights;
          found = true;
          break;
        }
      }
      if (!found) {
        throw InvalidConfig("config: feature_weights names unknown feature '" + feature + "'");
      }
    }
  }
  return gen;
}

}  // namespace detail

// Generates an observation log and prints a short empirical summary.
inline int cmd_generate(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.paths.log_out.empty()) {
    throw InvalidConfig("generate: paths.log_out is required");
  }
  const GeneratorConfig gen = detail::build_generator_config(cfg);
  const RuleSet rules = load_ruleset(cfg.generator.ruleset);
  std::optional<RuleSet> rules_after;
  if (cfg.generator.ruleset_after) {
    rules_after = load_ruleset(*cfg.generator.ruleset_after);
  }

  LogWriter writer(cfg.paths.log_out, LogHeader{gen.schema, rules.variant_count});
  std::vector<std::uint64_t> exposures(rules.variant_count, 0);
  std::vector<std::uint64_t> clicks(rules.variant_count, 0);
  GeneratorSource source(gen, rules, rules_after);
  Observation obs;
  while (source.next(obs)) {
    writer.write(obs);
    exposures[obs.variant] += 1;
    clicks[obs.variant] += obs.clicked ? 1 : 0;
  }
  writer.close();

  std::uint64_t total_clicks = 0;
  for (std::uint64_t c : clicks) {
    total_clicks += c;
  }
  out << "wrote " << gen.n_samples << " observations to " << cfg.paths.log_out.string()
      << "\n";
  out << "clicks: " << total_clicks;
  if (gen.n_samples > 0) {
    out << " (ctr " << static_cast<double>(total_clicks) / static_cast<double>(gen.n_samples)
        << ")";
  }
  out << "\n";
  for (std::uint32_t v = 0; v < rules.variant_count; ++v) {
    const double ctr = exposures[v]
                           ? static_cast<double>(clicks[v]) / static_cast<double>(exposures[v])
                           : 0.0;
    out << "variant " << v << ": exposures " << exposures[v] << ", clicks " << clicks[v]
        << ", ctr " << ctr << "\n";
  }
  return 0;
}

// Replays a log (or a train/test pair) through the engine and the enabled
// baselines, writes the report, and optionally persists the final model.
inline int cmd_replay(const ExperimentConfig& cfg, std::ostream& out) {
  std::unique_ptr<LogFileSource> train;
  std::unique_ptr<LogFileSource> eval;
  ReplayProtocol protocol;
  if (cfg.protocol.mode == ReplayMode::train_then_test) {
    if (cfg.paths.train_log.empty() || cfg.paths.test_log.empty()) {
      throw InvalidConfig("replay: train-then-test mode needs paths.train_log and paths.test_log");
    }
    train = std::make_unique<LogFileSource>(cfg.paths.train_log);
    eval = std::make_unique<LogFileSource>(cfg.paths.test_log);
    if (!(train->schema() == eval->schema()) ||
        train->variant_count() != eval->variant_count()) {
      throw DataError("replay: train and test logs disagree on schema or variants");
    }
  } else {
    if (cfg.paths.log_in.empty()) {
      throw InvalidConfig("replay: online mode needs paths.log_in");
    }
    eval = std::make_unique<LogFileSource>(cfg.paths.log_in);
    protocol.warmup = cfg.protocol.warmup;
    protocol.warmup_unit = cfg.protocol.warmup_unit;
  }

  const FeatureSchema& schema = eval->schema();
  const std::uint32_t variant_count = eval->variant_count();

  const TrainerConfig trainer_cfg = cfg.model.trainer_config();
  std::unique_ptr<OffSetRanker> ranker;
  if (!cfg.paths.snapshot_in.empty()) {
    Snapshot snap = load_snapshot(cfg.paths.snapshot_in);
    if (!(snap.model.schema == schema) || snap.model.variant_count != variant_count) {
      throw DataError("replay: snapshot does not match the log's schema or variants");
    }
    ranker = std::make_unique<OffSetRanker>(std::move(snap.model), trainer_cfg, snap.state);
  } else {
    const IndexLayout layout =
        build_layout(static_cast<int>(schema.feature_count()), cfg.model.standalone_dim,
                     cfg.model.overlap_dim, cfg.model.layout_seed);
    ranker = std::make_unique<OffSetRanker>(
        init_model(schema, layout, variant_count, cfg.model.bound_b, cfg.model.init_seed),
        trainer_cfg);
  }

  std::unique_ptr<PopularityBaseline> popularity;
  std::unique_ptr<RandomBaseline> random;
  std::vector<RankingAlgorithm*> algorithms{ranker.get()};
  for (const auto& name : cfg.baselines.enabled) {
    if (name == "popularity" && !popularity) {
      PopularityConfig pop;
      pop.decay_factor = cfg.baselines.decay_factor;
      pop.decay_cadence = cfg.baselines.decay_cadence;
      popularity = std::make_unique<PopularityBaseline>(variant_count, pop);
      algorithms.push_back(popularity.get());
    } else if (name == "random" && !random) {
      random = std::make_unique<RandomBaseline>(variant_count, cfg.baselines.random_seed);
      algorithms.push_back(random.get());
    }
  }

  if (train) {
    train_on(*train, algorithms);
  }
  const ReplayReport report = replay(*eval, algorithms, protocol);

  if (!cfg.paths.report_out.empty()) {
    std::ofstream file(cfg.paths.report_out, std::ios::binary);
    if (!file) {
      throw IoError("cannot open report for writing: " + cfg.paths.report_out.string());
    }
    write_report(report, file);
    file.close();
    if (file.fail()) {
      throw IoError("report write failed: " + cfg.paths.report_out.string());
    }
  }
  write_report(report, out);
  for (const auto& algo : report.algorithms) {
    out << "runtime " << algo.name << ": " << algo.runtime_seconds << " s\n";
  }

  if (!cfg.paths.snapshot_out.empty()) {
    save_snapshot(ranker->model(), ranker->state(), cfg.paths.snapshot_out);
    out << "snapshot written to " << cfg.paths.snapshot_out.string() << "\n";
  }
  return 0;
}

// Prints layout parameters, per-family vector norms, and trainer state.
inline int cmd_inspect(const std::filesystem::path& snapshot_path, std::ostream& out) {
  const Snapshot snap = load_snapshot(snapshot_path);
  const auto& model = snap.model;
  const auto& layout = model.layout;

  out << "snapshot: " << snapshot_path.string() << "\n";
  out << "features: " << layout.feature_count << " (";
  for (std::size_t k = 0; k < model.schema.feature_count(); ++k) {
    out << (k ? ", " : "") << model.schema.features[k].name << "["
        << model.schema.features[k].values.size() << "]";
  }
  out << ")\n";
  out << "layout: standalone_dim " << layout.standalone_dim << ", overlap_dim "
      << layout.overlap_dim << ", total_dim " << layout.total_dim << ", per_feature_dim "
      << layout.per_feature_dim << ", seed " << layout.seed << "\n";
  out << "variants: " << model.variant_count << "\n";
  out << "bound_b: " << model.bound_b << "\n";

  const auto family_max = [](const std::vector<double>& flat) {
    double m = 0.0;
    for (double x : flat) {
      m = std::max(m, std::abs(x));
    }
    return m;
  };
  for (std::size_t k = 0; k < model.feature_vectors.size(); ++k) {
    out << "max-norm feature '" << model.schema.features[k].name
        << "': " << family_max(model.feature_vectors[k]) << "\n";
  }
  out << "max-norm variants: " << family_max(model.variant_vectors) << "\n";

  out << "mu: " << snap.state.mu << "\n";
  out << "window: " << snap.state.window_clicks << " clicks / " << snap.state.window_nonclicks
      << " non-clicks\n";
  out << "totals: " << snap.state.total_clicks << " clicks / " << snap.state.total_impressions
      << " impressions\n";
  return 0;
}

}  // namespace offset
