#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "offset/errors.hpp"
#include "offset/rng.hpp"
#include "offset/schema.hpp"

namespace offset {

// Contract shared by every algorithm the replay harness drives: produce a
// full ranking of the variant universe for a profile, and learn from one
// observation at a time.
class RankingAlgorithm {
public:
  virtual ~RankingAlgorithm() = default;
  virtual std::string_view name() const = 0;
  // Fills `out` with all variant ids, best first.
  virtual void rank(const UserProfile& profile, std::vector<std::uint32_t>& out) = 0;
  virtual void observe(const Observation& obs) = 0;
};

struct PopularityConfig {
  double decay_factor = 0.5;                 // applied to all accumulators
  std::uint64_t decay_cadence = 1'000'000;   // observations between decays
  // Laplace-style prior mass seeded into the accumulators, so a cold variant
  // ranks at exactly prior_clicks / prior_impressions. The prior decays with
  // everything else, which keeps CTR ratios scale-free: multiplying all
  // accumulators by a common positive factor never reorders variants.
  double prior_clicks = 1.0;
  double prior_impressions = 100.0;

  void validate() const {
    if (!(decay_factor > 0.0) || decay_factor > 1.0) {
      throw InvalidArgument("popularity: decay_factor must be in (0, 1]");
    }
    if (decay_cadence < 1) {
      throw InvalidArgument("popularity: decay_cadence must be at least 1");
    }
    if (prior_clicks < 0.0 || !(prior_impressions > 0.0) ||
        prior_clicks > prior_impressions) {
      throw InvalidArgument("popularity: invalid smoothing priors");
    }
  }
};

// Non-personalized baseline: variants in descending order of historical CTR,
// with periodic decay so the ranking follows the traffic's trend.
class PopularityBaseline : public RankingAlgorithm {
public:
  explicit PopularityBaseline(std::uint32_t variant_count, PopularityConfig cfg = {})
      : cfg_(cfg) {
    cfg_.validate();
    if (variant_count == 0) {
      throw InvalidArgument("popularity: variant_count must be positive");
    }
    clicks_.assign(variant_count, cfg_.prior_clicks);
    impressions_.assign(variant_count, cfg_.prior_impressions);
  }

  std::string_view name() const override { return "Popularity"; }

  double smoothed_ctr(std::uint32_t variant) const {
    return clicks_[variant] / impressions_[variant];
  }

  void rank(const UserProfile&, std::vector<std::uint32_t>& out) override {
    out.resize(clicks_.size());
    std::iota(out.begin(), out.end(), 0u);
    // Ties break toward the lower variant id, keeping rankings reproducible.
    std::stable_sort(out.begin(), out.end(), [this](std::uint32_t a, std::uint32_t b) {
      return smoothed_ctr(a) > smoothed_ctr(b);
    });
  }

  void observe(const Observation& obs) override {
    if (obs.variant >= impressions_.size()) {
      throw DataError("popularity: unknown variant id " + std::to_string(obs.variant));
    }
    impressions_[obs.variant] += 1.0;
    if (obs.clicked) {
      clicks_[obs.variant] += 1.0;
    }
    if (++seen_ % cfg_.decay_cadence == 0) {
      for (std::size_t v = 0; v < clicks_.size(); ++v) {
        clicks_[v] *= cfg_.decay_factor;
        impressions_[v] *= cfg_.decay_factor;
      }
    }
  }

private:
  PopularityConfig cfg_;
  std::vector<double> clicks_;
  std::vector<double> impressions_;
  std::uint64_t seen_ = 0;
};

// Ranks by a fresh uniform random permutation on every request.
class RandomBaseline : public RankingAlgorithm {
public:
  RandomBaseline(std::uint32_t variant_count, std::uint64_t seed)
      : variant_count_(variant_count), rng_(seed) {
    if (variant_count == 0) {
      throw InvalidArgument("random baseline: variant_count must be positive");
    }
  }

  std::string_view name() const override { return "Random"; }

  void rank(const UserProfile&, std::vector<std::uint32_t>& out) override {
    out.resize(variant_count_);
    std::iota(out.begin(), out.end(), 0u);
    shuffle(std::span<std::uint32_t>(out), rng_);
  }

  void observe(const Observation&) override {}

private:
  std::uint32_t variant_count_ = 0;
  Rng rng_;
};

}  // namespace offset
