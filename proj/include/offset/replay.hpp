#pragma once

#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "offset/baselines.hpp"
#include "offset/errors.hpp"
#include "offset/stream.hpp"

namespace offset {

// Mean reciprocal rank: plain arithmetic mean of 1/rank values.
inline double mrr(std::span<const double> reciprocal_ranks) {
  if (reciprocal_ranks.empty()) {
    throw InvalidArgument("mrr: empty input");
  }
  double total = 0.0;
  for (double r : reciprocal_ranks) {
    total += r;
  }
  return total / static_cast<double>(reciprocal_ranks.size());
}

// Two-sided two-sample significance gap for means of [0,1]-bounded variables:
// 2*sqrt(ln(2/(1-confidence)) / (2n)). MRR differences above this gap are
// significant at the given confidence.
inline double hoeffding_gap(std::uint64_t n_clicks, double confidence) {
  if (n_clicks < 1) {
    throw InvalidArgument("hoeffding_gap: n_clicks must be at least 1");
  }
  if (!(confidence > 0.0) || !(confidence < 1.0)) {
    throw InvalidArgument("hoeffding_gap: confidence must lie in (0, 1)");
  }
  return 2.0 * std::sqrt(std::log(2.0 / (1.0 - confidence)) /
                         (2.0 * static_cast<double>(n_clicks)));
}

enum class WarmupUnit { observations, clicks };

struct ReplayProtocol {
  std::uint64_t warmup = 0;
  WarmupUnit warmup_unit = WarmupUnit::observations;
  double confidence = 0.95;
};

struct AlgorithmReport {
  std::string name;
  double mrr = 0.0;
  std::uint64_t clicks_scored = 0;
  double significance_gap = 0.0;
  double runtime_seconds = 0.0;
  std::vector<std::uint64_t> rank_histogram;  // counts of rank 1..L
};

struct ReplayReport {
  std::uint64_t observations = 0;
  std::uint64_t clicks_total = 0;
  std::uint64_t clicks_scored = 0;
  std::uint64_t warmup_observations = 0;
  std::vector<AlgorithmReport> algorithms;
};

// Feeds every observation to every algorithm as training input only.
inline std::uint64_t train_on(ObservationSource& source,
                              std::span<RankingAlgorithm* const> algorithms) {
  Observation obs;
  std::uint64_t seen = 0;
  std::uint64_t last_ts = 0;
  while (source.next(obs)) {
    if (obs.timestamp < last_ts) {
      throw DataError("replay: observations out of timestamp order");
    }
    last_ts = obs.timestamp;
    ++seen;
    for (RankingAlgorithm* algo : algorithms) {
      algo->observe(obs);
    }
  }
  return seen;
}

// Temporal replay. Warm-up observations train only. Past warm-up, non-clicks
// keep training; each click is scored first (reciprocal rank of the logged
// variant in each algorithm's fresh ranking) and then trained on. Every
// algorithm sees the identical stream; none sees another's output.
inline ReplayReport replay(ObservationSource& source,
                           std::span<RankingAlgorithm* const> algorithms,
                           const ReplayProtocol& protocol) {
  if (algorithms.empty()) {
    throw InvalidArgument("replay: need at least one algorithm");
  }
  const std::uint32_t variant_count = source.variant_count();

  ReplayReport report;
  report.algorithms.resize(algorithms.size());
  struct Tally {
    double rr_sum = 0.0;
    std::uint64_t clicks_scored = 0;
    std::chrono::steady_clock::duration runtime{};
    std::vector<std::uint64_t> histogram;
  };
  std::vector<Tally> tallies(algorithms.size());
  for (auto& tally : tallies) {
    tally.histogram.assign(variant_count, 0);
  }

  Observation obs;
  std::uint64_t last_ts = 0;
  std::uint64_t clicks_seen = 0;
  std::vector<std::uint32_t> ranking;
  while (source.next(obs)) {
    if (obs.timestamp < last_ts) {
      throw DataError("replay: observations out of timestamp order");
    }
    last_ts = obs.timestamp;
    if (obs.variant >= variant_count) {
      throw DataError("replay: variant id " + std::to_string(obs.variant) +
                      " outside the log's declared universe");
    }
    report.observations += 1;
    const bool warming_up = protocol.warmup_unit == WarmupUnit::observations
                                ? report.observations <= protocol.warmup
                                : clicks_seen < protocol.warmup;
    if (warming_up) {
      report.warmup_observations += 1;
    }
    if (obs.clicked) {
      report.clicks_total += 1;
      ++clicks_seen;
    }
    const bool score_this = obs.clicked && !warming_up;
    if (score_this) {
      report.clicks_scored += 1;
    }
    for (std::size_t i = 0; i < algorithms.size(); ++i) {
      const auto start = std::chrono::steady_clock::now();
      if (score_this) {
        algorithms[i]->rank(obs.profile, ranking);
        std::uint64_t rank = 0;
        for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
          if (ranking[pos] == obs.variant) {
            rank = pos + 1;
            break;
          }
        }
        if (rank == 0) {
          throw DataError("replay: algorithm '" + std::string(algorithms[i]->name()) +
                          "' did not rank the logged variant");
        }
        tallies[i].rr_sum += 1.0 / static_cast<double>(rank);
        tallies[i].clicks_scored += 1;
        tallies[i].histogram[rank - 1] += 1;
      }
      algorithms[i]->observe(obs);
      tallies[i].runtime += std::chrono::steady_clock::now() - start;
    }
  }

  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    auto& entry = report.algorithms[i];
    entry.name = std::string(algorithms[i]->name());
    entry.clicks_scored = tallies[i].clicks_scored;
    entry.mrr = tallies[i].clicks_scored
                    ? tallies[i].rr_sum / static_cast<double>(tallies[i].clicks_scored)
                    : 0.0;
    entry.significance_gap =
        tallies[i].clicks_scored ? hoeffding_gap(tallies[i].clicks_scored, protocol.confidence)
                                 : 0.0;
    entry.runtime_seconds = std::chrono::duration<double>(tallies[i].runtime).count();
    entry.rank_histogram = std::move(tallies[i].histogram);
  }
  return report;
}

namespace detail {

// Shortest round-trip decimal form, for reproducible report files.
inline std::string format_double(double value) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, p);
}

}  // namespace detail

// Key-value document plus one machine-readable row per algorithm. Runtimes
// are intentionally absent so reports from identical runs are bit-identical.
inline void write_report(const ReplayReport& report, std::ostream& out) {
  out << "# offset replay report\n";
  out << "observations\t" << report.observations << '\n';
  out << "clicks_total\t" << report.clicks_total << '\n';
  out << "clicks_scored\t" << report.clicks_scored << '\n';
  out << "warmup_observations\t" << report.warmup_observations << '\n';
  out << '\n';
  out << "algorithm\tmrr\tclicks_scored\tsignificance_gap\n";
  for (const auto& algo : report.algorithms) {
    out << algo.name << '\t' << detail::format_double(algo.mrr) << '\t' << algo.clicks_scored
        << '\t' << detail::format_double(algo.significance_gap) << '\n';
  }
  out << '\n';
  out << "# rank histogram: algorithm, then counts for ranks 1..L\n";
  for (const auto& algo : report.algorithms) {
    out << algo.name;
    for (std::uint64_t count : algo.rank_histogram) {
      out << '\t' << count;
    }
    out << '\n';
  }
}

}  // namespace offset
