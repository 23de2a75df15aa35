// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the failure count.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "offset/offset.hpp"
#include "../oracles.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void check(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  g_failures += pass ? 0 : 1;
}

std::string format(double value, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

struct BenchmarkResult {
  double offset_mrr = 0.0;
  double popularity_mrr = 0.0;
  std::uint64_t clicks_scored = 0;
  double gap = 0.0;
  double seconds = 0.0;
};

// Shared scaffold for the two synthetic reproductions: train on 8M
// observations, then score the 8M-test replay (training continues online).
BenchmarkResult run_synthetic_benchmark(bool trending) {
  const auto started = Clock::now();

  offset::GeneratorConfig train_cfg;
  train_cfg.seed = 11;
  train_cfg.n_samples = 8'000'000;
  std::optional<offset::RuleSet> train_after;
  if (trending) {
    train_cfg.trend_switch = 4'000'000;
    train_after = offset::table2_trending_rules();
  }
  offset::GeneratorSource train(train_cfg, offset::table2_stable_rules(), train_after);

  offset::GeneratorConfig test_cfg;
  test_cfg.seed = 22;
  test_cfg.n_samples = 8'000'000;
  offset::GeneratorSource test(
      test_cfg, trending ? offset::table2_trending_rules() : offset::table2_stable_rules());

  const offset::FeatureSchema schema = train.schema();
  const offset::TrainerConfig trainer_cfg;  // alpha 0.05, gamma 0.02, cadence 1000
  offset::OffSetRanker ranker(
      offset::init_model(schema,
                         offset::build_layout(static_cast<int>(schema.feature_count()), 2, 4, 7),
                         train.variant_count(), 1.0, 13),
      trainer_cfg);
  offset::PopularityBaseline popularity(train.variant_count());

  std::vector<offset::RankingAlgorithm*> algos{&ranker, &popularity};
  offset::train_on(train, algos);
  const offset::ReplayReport report = offset::replay(test, algos, offset::ReplayProtocol{});

  BenchmarkResult result;
  result.offset_mrr = report.algorithms[0].mrr;
  result.popularity_mrr = report.algorithms[1].mrr;
  result.clicks_scored = report.clicks_scored;
  result.gap = offset::hoeffding_gap(report.clicks_scored, 0.95);
  result.seconds = std::chrono::duration<double>(Clock::now() - started).count();
  return result;
}

void criterion_1_stable() {
  const BenchmarkResult r = run_synthetic_benchmark(false);
  const bool offset_ok = r.offset_mrr >= 0.81;
  const bool popularity_ok = r.popularity_mrr >= 0.73 && r.popularity_mrr <= 0.81;
  const bool separation_ok = r.offset_mrr - r.popularity_mrr > r.gap;
  check(1, offset_ok && popularity_ok && separation_ok,
        "stable synthetic: OFF-Set mrr " + format(r.offset_mrr) + " (need >= 0.81), Popularity " +
            format(r.popularity_mrr) + " (need [0.73, 0.81]), lead " +
            format(r.offset_mrr - r.popularity_mrr) + " > gap " + format(r.gap) + " on " +
            std::to_string(r.clicks_scored) + " clicks, " + format(r.seconds, 1) + "s");
}

void criterion_2_trending() {
  const BenchmarkResult r = run_synthetic_benchmark(true);
  const bool offset_ok = r.offset_mrr >= 0.79;
  const bool separation_ok = r.offset_mrr - r.popularity_mrr > r.gap;
  check(2, offset_ok && separation_ok,
        "trending synthetic: OFF-Set mrr " + format(r.offset_mrr) +
            " (need >= 0.79), Popularity " + format(r.popularity_mrr) + ", lead " +
            format(r.offset_mrr - r.popularity_mrr) + " > gap " + format(r.gap) + " on " +
            std::to_string(r.clicks_scored) + " clicks, " + format(r.seconds, 1) + "s");
}

void criterion_3_significance() {
  struct Case {
    std::uint64_t clicks;
    double expected;
  };
  const Case cases[] = {{26905, 0.016}, {2400, 0.055}, {900, 0.091}};
  bool ok = true;
  std::string detail = "hoeffding gaps:";
  for (const auto& c : cases) {
    const double got = offset::hoeffding_gap(c.clicks, 0.95);
    ok = ok && std::abs(got - c.expected) <= 1e-3;
    detail += " n=" + std::to_string(c.clicks) + " -> " + format(got, 4) + " (want " +
              format(c.expected, 3) + " +/- 0.001)";
  }
  check(3, ok, detail);
}

void criterion_4_gradients() {
  offset::Rng rng(468);
  int cases = 0;
  int bad = 0;
  double worst = 0.0;
  while (cases < 100) {
    const int k = 2 + static_cast<int>(offset::uniform_below(rng, 3));
    const int s = static_cast<int>(offset::uniform_below(rng, 3));
    const int o = static_cast<int>(offset::uniform_below(rng, 3));
    if (s + o == 0) {
      continue;
    }
    ++cases;
    std::vector<int> domains(static_cast<std::size_t>(k));
    for (auto& size : domains) {
      size = 1 + static_cast<int>(offset::uniform_below(rng, 3));
    }
    const auto schema = oracles::toy_schema(domains);
    const auto layout = offset::build_layout(k, s, o, rng());
    offset::Model model = oracles::random_model(schema, layout, 3, rng, 0.2, 1.2);
    for (auto& family : model.feature_vectors) {
      for (double& x : family) {
        if (offset::uniform_below(rng, 2) == 0) x = -x;
      }
    }
    for (double& x : model.variant_vectors) {
      if (offset::uniform_below(rng, 2) == 0) x = -x;
    }
    const auto profile = oracles::random_profile(schema, rng);
    const auto variant = static_cast<std::uint32_t>(offset::uniform_below(rng, 3));

    offset::Model updated = model;
    offset::TrainerState state;
    offset::TrainerConfig cfg;
    cfg.alpha = 1.0;
    cfg.mu_update_cadence = 1u << 30;
    offset::update(updated, state,
                   offset::Observation{1, profile, variant, true}, cfg);

    const std::size_t total_dim = static_cast<std::size_t>(layout.total_dim);
    const std::size_t d = static_cast<std::size_t>(layout.per_feature_dim);
    for (std::size_t i = 0; i < total_dim; ++i) {
      const std::size_t flat = variant * total_dim + i;
      const double analytic = updated.variant_vectors[flat] - model.variant_vectors[flat];
      const double numeric = oracles::finite_difference(
          model, profile, variant,
          [&](offset::Model& m) -> double& { return m.variant_vectors[flat]; });
      const double err = oracles::relative_error(analytic, numeric);
      worst = std::max(worst, err);
      bad += err >= 1e-5;
    }
    for (int f = 0; f < k; ++f) {
      const std::size_t base = profile.values[static_cast<std::size_t>(f)] * d;
      for (std::size_t p = 0; p < d; ++p) {
        const std::size_t flat = base + p;
        const double analytic =
            updated.feature_vectors[static_cast<std::size_t>(f)][flat] -
            model.feature_vectors[static_cast<std::size_t>(f)][flat];
        const double numeric = oracles::finite_difference(
            model, profile, variant, [&](offset::Model& m) -> double& {
              return m.feature_vectors[static_cast<std::size_t>(f)][flat];
            });
        const double err = oracles::relative_error(analytic, numeric);
        worst = std::max(worst, err);
        bad += err >= 1e-5;
      }
    }
  }
  check(4, bad == 0,
        "gradient oracle: 100 configurations, worst relative error vs central differences " +
            format(worst, 10) + " (need < 1e-5), " + std::to_string(bad) + " coordinates over");
}

void criterion_5_layout_composition() {
  offset::Rng rng(2024);
  int cases = 0;
  int partition_bad = 0;
  int compose_bad = 0;
  double worst = 0.0;
  while (cases < 1000) {
    const int k = 1 + static_cast<int>(offset::uniform_below(rng, 5));
    const int s = static_cast<int>(offset::uniform_below(rng, 4));
    const int o = static_cast<int>(offset::uniform_below(rng, 4));
    if (s + o == 0) {
      continue;
    }
    ++cases;
    std::vector<int> domains(static_cast<std::size_t>(k));
    for (auto& size : domains) {
      size = 1 + static_cast<int>(offset::uniform_below(rng, 4));
    }
    const auto schema = oracles::toy_schema(domains);
    const auto layout = offset::build_layout(k, s, o, rng());
    if (!oracles::check_partition(layout).empty()) {
      ++partition_bad;
      continue;
    }
    const offset::Model model = oracles::random_model(schema, layout, 2, rng);
    const auto profile = oracles::random_profile(schema, rng);
    const auto got = offset::compose_user_vector(profile, model);
    const auto want = oracles::brute_compose(profile, model);
    for (std::size_t i = 0; i < got.size(); ++i) {
      const double diff = std::abs(got[i] - want[i]);
      worst = std::max(worst, diff);
      if (diff > 1e-12) {
        ++compose_bad;
        break;
      }
    }
  }
  check(5, partition_bad == 0 && compose_bad == 0,
        "layout and composition: 1000 cases, " + std::to_string(partition_bad) +
            " partition violations, " + std::to_string(compose_bad) +
            " composition mismatches, worst entry deviation " + format(worst, 15));
}

void criterion_6_generator_fidelity() {
  offset::GeneratorConfig cfg;
  cfg.seed = 20260810;
  cfg.n_samples = 1'000'000;

  oracles::StableRulesFit fit(cfg.schema);
  std::uint64_t ca_v2_exposures = 0;
  std::uint64_t ca_v2_clicks = 0;
  std::uint32_t california = 0;
  for (std::uint32_t v = 0; v < cfg.schema.features[1].values.size(); ++v) {
    if (cfg.schema.features[1].values[v] == "California") {
      california = v;
    }
  }
  offset::generate(cfg, offset::table2_stable_rules(), nullptr,
                   [&](const offset::Observation& obs) {
                     fit.add(obs);
                     if (obs.profile.values[1] == california && obs.variant == 2) {
                       ca_v2_exposures += 1;
                       ca_v2_clicks += obs.clicked ? 1 : 0;
                     }
                   });

  const double statistic = fit.statistic();
  const double n = static_cast<double>(ca_v2_exposures);
  const double sigma = std::sqrt(n * 0.011 * (1.0 - 0.011));
  const double deviation = std::abs(static_cast<double>(ca_v2_clicks) - n * 0.011);
  const bool chi_ok = statistic < oracles::StableRulesFit::kCritical99;
  const bool cell_ok = deviation <= 3.0 * sigma;
  check(6, chi_ok && cell_ok,
        "generator fidelity on 1M samples: chi-square " + format(statistic, 2) + " < " +
            format(oracles::StableRulesFit::kCritical99, 2) + " (20 cells, 0.01 level); " +
            "California/variant-2 deviation " + format(deviation, 1) + " clicks <= 3 sigma (" +
            format(3.0 * sigma, 1) + ") on " + std::to_string(ca_v2_exposures) + " exposures");
}

void criterion_7_determinism_persistence() {
  const fs::path dir =
      fs::temp_directory_path() / ("offset-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };

  bool ok = true;
  std::string detail;
  try {
    // Fixed-seed pipeline, run twice: logs and reports must match bit for bit.
    offset::ExperimentConfig cfg;
    cfg.generator.seed = 101;
    cfg.generator.samples = 300'000;
    cfg.baselines.enabled = {"popularity", "random"};
    cfg.protocol.mode = offset::ReplayMode::online;
    cfg.protocol.warmup = 150'000;
    std::ostringstream sink;
    cfg.paths.log_out = dir / "a.log";
    offset::cmd_generate(cfg, sink);
    cfg.paths.log_out = dir / "b.log";
    offset::cmd_generate(cfg, sink);
    const bool logs_equal = slurp(dir / "a.log") == slurp(dir / "b.log");

    cfg.paths.log_in = dir / "a.log";
    cfg.paths.report_out = dir / "a.report";
    offset::cmd_replay(cfg, sink);
    cfg.paths.report_out = dir / "b.report";
    offset::cmd_replay(cfg, sink);
    const bool reports_equal = slurp(dir / "a.report") == slurp(dir / "b.report");

    // Split-vs-whole persistence: half the stream, snapshot, resume.
    {
      std::ifstream in(dir / "a.log");
      std::ofstream first(dir / "first.log", std::ios::binary);
      std::ofstream rest(dir / "rest.log", std::ios::binary);
      std::string line;
      std::getline(in, line);
      first << line << '\n';
      rest << line << '\n';
      std::uint64_t count = 0;
      while (std::getline(in, line)) {
        (++count <= 150'000 ? first : rest) << line << '\n';
      }
    }
    offset::ExperimentConfig whole;
    whole.baselines.enabled = {};
    whole.protocol.mode = offset::ReplayMode::online;
    whole.protocol.warmup = 150'000;
    whole.paths.log_in = dir / "a.log";
    whole.paths.report_out = dir / "whole.report";
    whole.paths.snapshot_out = dir / "whole.snap";
    offset::cmd_replay(whole, sink);

    offset::ExperimentConfig half = whole;
    half.paths.log_in = dir / "first.log";
    half.paths.report_out = dir / "half.report";
    half.paths.snapshot_out = dir / "half.snap";
    offset::cmd_replay(half, sink);

    offset::ExperimentConfig resumed = whole;
    resumed.protocol.warmup = 0;
    resumed.paths.log_in = dir / "rest.log";
    resumed.paths.snapshot_in = dir / "half.snap";
    resumed.paths.report_out = dir / "resumed.report";
    resumed.paths.snapshot_out = dir / "resumed.snap";
    offset::cmd_replay(resumed, sink);

    const bool snapshots_equal = slurp(dir / "whole.snap") == slurp(dir / "resumed.snap");
    const auto engine_row = [&](const fs::path& p) {
      const std::string report = slurp(p);
      const auto pos = report.find("OFF-Set\t");
      return report.substr(pos, report.find('\n', pos) - pos);
    };
    const bool mrr_equal = engine_row(dir / "whole.report") == engine_row(dir / "resumed.report");

    ok = logs_equal && reports_equal && snapshots_equal && mrr_equal;
    detail = std::string("determinism and persistence: logs ") +
             (logs_equal ? "identical" : "DIFFER") + ", reports " +
             (reports_equal ? "identical" : "DIFFER") + ", split-vs-whole snapshots " +
             (snapshots_equal ? "identical" : "DIFFER") + ", scored rows " +
             (mrr_equal ? "identical" : "DIFFER");
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("determinism and persistence: exception: ") + e.what();
  }
  fs::remove_all(dir);
  check(7, ok, detail);
}

}  // namespace

int main() {
  criterion_1_stable();
  criterion_2_trending();
  criterion_3_significance();
  criterion_4_gradients();
  criterion_5_layout_composition();
  criterion_6_generator_fidelity();
  criterion_7_determinism_persistence();
  std::printf("%s (%d failure%s)\n", g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures;
}
