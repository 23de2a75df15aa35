#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "offset/errors.hpp"
#include "offset/rng.hpp"
#include "offset/rules.hpp"
#include "offset/schema.hpp"
#include "offset/stream.hpp"

namespace offset {

// Demographic schema the synthetic generator targets: birth year, US state,
// gender. Value ids are positions in these lists.
inline FeatureSchema default_synthetic_schema() {
  static const std::array<const char*, 50> kStates = {
      "Alabama",       "Alaska",         "Arizona",        "Arkansas",      "California",
      "Colorado",      "Connecticut",    "Delaware",       "Florida",       "Georgia",
      "Hawaii",        "Idaho",          "Illinois",       "Indiana",       "Iowa",
      "Kansas",        "Kentucky",       "Louisiana",      "Maine",         "Maryland",
      "Massachusetts", "Michigan",       "Minnesota",      "Mississippi",   "Missouri",
      "Montana",       "Nebraska",       "Nevada",         "New Hampshire", "New Jersey",
      "New Mexico",    "New York",       "North Carolina", "North Dakota",  "Ohio",
      "Oklahoma",      "Oregon",         "Pennsylvania",   "Rhode Island",  "South Carolina",
      "South Dakota",  "Tennessee",      "Texas",          "Utah",          "Vermont",
      "Virginia",      "Washington",     "West Virginia",  "Wisconsin",     "Wyoming"};

  FeatureSchema schema;
  FeatureDescriptor birth_year;
  birth_year.name = "birth_year";
  for (int year = 1930; year <= 2005; ++year) {
    birth_year.values.push_back(std::to_string(year));
  }
  FeatureDescriptor geo;
  geo.name = "geo";
  geo.values.assign(kStates.begin(), kStates.end());
  FeatureDescriptor gender;
  gender.name = "gender";
  gender.values = {"male", "female", "unknown"};

  schema.features = {std::move(birth_year), std::move(geo), std::move(gender)};
  return schema;
}

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::uint64_t n_samples = 0;
  FeatureSchema schema = default_synthetic_schema();
  // Per-feature sampling weights; an empty inner vector means uniform.
  std::vector<std::vector<double>> feature_weights;
  // 1-based sample index at which the ruleset is swapped; samples with
  // timestamp >= trend_switch draw rewards from the post-switch rules.
  std::optional<std::uint64_t> trend_switch;

  void validate() const {
    schema.validate();
    if (trend_switch && (*trend_switch < 1 || *trend_switch > n_samples)) {
      throw InvalidConfig("generator: trend_switch must lie in [1, n_samples]");
    }
    if (!feature_weights.empty()) {
      if (feature_weights.size() != schema.feature_count()) {
        throw InvalidConfig("generator: feature_weights must have one entry per feature");
      }
      for (std::size_t k = 0; k < feature_weights.size(); ++k) {
        const auto& w = feature_weights[k];
        if (!w.empty() && w.size() != schema.features[k].values.size()) {
          throw InvalidConfig("generator: weights for feature '" + schema.features[k].name +
                              "' do not match its domain size");
        }
      }
    }
  }
};

// Synthetic click stream with timestamps 1..n_samples. Each observation draws
// a profile from the configured marginals, a variant uniformly at random, and
// a reward from a coin with the pair's accumulated CTR under the ruleset
// active at that timestamp. Deterministic per seed.
class GeneratorSource : public ObservationSource {
public:
  GeneratorSource(GeneratorConfig cfg, RuleSet rules,
                  std::optional<RuleSet> rules_after = std::nullopt)
      : cfg_(std::move(cfg)),
        rules_(std::move(rules)),
        compiled_before_(rules_, cfg_.schema),
        rng_(cfg_.seed) {
    cfg_.validate();
    if (cfg_.trend_switch && !rules_after) {
      throw InvalidConfig("generator: trend_switch set but no post-switch ruleset given");
    }
    if (rules_after && !cfg_.trend_switch) {
      throw InvalidConfig("generator: post-switch ruleset given but trend_switch not set");
    }
    validate_ruleset(rules_, cfg_.schema);
    if (rules_after) {
      if (rules_after->variant_count != rules_.variant_count) {
        throw InvalidConfig("generator: rulesets disagree on the variant count");
      }
      validate_ruleset(*rules_after, cfg_.schema);
      compiled_after_.emplace(*rules_after, cfg_.schema);
    }
  }

  const FeatureSchema& schema() const override { return cfg_.schema; }
  std::uint32_t variant_count() const override { return rules_.variant_count; }

  bool next(Observation& out) override {
    if (emitted_ >= cfg_.n_samples) {
      return false;
    }
    const std::uint64_t t = ++emitted_;
    out.profile.values.resize(cfg_.schema.feature_count());
    for (std::size_t k = 0; k < cfg_.schema.feature_count(); ++k) {
      const auto& domain = cfg_.schema.features[k].values;
      const bool weighted = !cfg_.feature_weights.empty() && !cfg_.feature_weights[k].empty();
      out.profile.values[k] = weighted
          ? static_cast<std::uint32_t>(pick_weighted(rng_, cfg_.feature_weights[k]))
          : static_cast<std::uint32_t>(uniform_below(rng_, domain.size()));
    }
    out.variant = static_cast<std::uint32_t>(uniform_below(rng_, rules_.variant_count));
    const CompiledRuleSet& active =
        (cfg_.trend_switch && t >= *cfg_.trend_switch) ? *compiled_after_ : compiled_before_;
    const double p = active.true_ctr(out.profile, out.variant);
    out.clicked = canonical_double(rng_) < p;
    out.timestamp = t;
    return true;
  }

private:
  GeneratorConfig cfg_;
  RuleSet rules_;
  CompiledRuleSet compiled_before_;
  std::optional<CompiledRuleSet> compiled_after_;
  Rng rng_;
  std::uint64_t emitted_ = 0;
};

// Push-style wrapper over GeneratorSource; both emit identical streams.
template <typename Sink>
void generate(const GeneratorConfig& cfg, const RuleSet& rules, const RuleSet* rules_after,
              Sink&& sink) {
  GeneratorSource source(cfg, rules,
                         rules_after ? std::optional<RuleSet>(*rules_after) : std::nullopt);
  Observation obs;
  while (source.next(obs)) {
    sink(obs);
  }
}

}  // namespace offset
