#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "offset/errors.hpp"
#include "offset/schema.hpp"

namespace offset {

// One accumulative CTR-lift rule. An absent field matches everything.
struct Rule {
  std::optional<std::pair<int, int>> birth_year_range;  // inclusive
  std::optional<std::string> geo;
  std::optional<std::string> gender;
  std::optional<std::uint32_t> variant;
  double ctr_lift = 0.0;

  bool operator==(const Rule&) const = default;
};

struct RuleSet {
  std::vector<Rule> rules;
  std::uint32_t variant_count = 0;

  bool operator==(const RuleSet&) const = default;
};

namespace detail {

inline std::optional<int> parse_int(const std::string& text) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    return std::nullopt;
  }
  return value;
}

inline std::size_t find_feature(const FeatureSchema& schema, const std::string& name) {
  for (std::size_t k = 0; k < schema.features.size(); ++k) {
    if (schema.features[k].name == name) {
      return k;
    }
  }
  throw InvalidConfig("ruleset requires feature '" + name + "' which the schema lacks");
}

}  // namespace detail

// Rules bound to a schema: per-feature value-id masks, evaluated per
// observation on the generator's hot path.
class CompiledRuleSet {
public:
  CompiledRuleSet(const RuleSet& rules, const FeatureSchema& schema)
      : variant_count_(rules.variant_count) {
    schema.validate();
    if (variant_count_ == 0) {
      throw InvalidConfig("ruleset: variant_count must be positive");
    }
    for (const auto& rule : rules.rules) {
      if (rule.ctr_lift < 0.0 || rule.ctr_lift > 1.0) {
        throw InvalidConfig("ruleset: ctr_lift must lie in [0, 1]");
      }
      if (rule.variant && *rule.variant >= variant_count_) {
        throw InvalidConfig("ruleset: rule targets variant " + std::to_string(*rule.variant) +
                            " but only " + std::to_string(variant_count_) + " exist");
      }
      CompiledRule compiled;
      compiled.variant = rule.variant;
      compiled.lift = rule.ctr_lift;
      if (rule.birth_year_range) {
        const std::size_t k = detail::find_feature(schema, "birth_year");
        compiled.masks.push_back(year_mask(schema.features[k], *rule.birth_year_range, k));
      }
      if (rule.geo) {
        const std::size_t k = detail::find_feature(schema, "geo");
        compiled.masks.push_back(value_mask(schema.features[k], *rule.geo, k));
      }
      if (rule.gender) {
        const std::size_t k = detail::find_feature(schema, "gender");
        compiled.masks.push_back(value_mask(schema.features[k], *rule.gender, k));
      }
      rules_.push_back(std::move(compiled));
    }
  }

  std::uint32_t variant_count() const { return variant_count_; }

  // Accumulated click probability for one (profile, variant) pair.
  double true_ctr(const UserProfile& profile, std::uint32_t variant) const {
    double total = 0.0;
    for (const auto& rule : rules_) {
      if (rule.variant && *rule.variant != variant) {
        continue;
      }
      bool matched = true;
      for (const auto& mask : rule.masks) {
        if (!mask.allowed[profile.values[mask.feature]]) {
          matched = false;
          break;
        }
      }
      if (matched) {
        total += rule.lift;
      }
    }
    return total;
  }

private:
  struct FeatureMask {
    std::size_t feature = 0;
    std::vector<char> allowed;  // indexed by value id
  };
  struct CompiledRule {
    std::vector<FeatureMask> masks;
    std::optional<std::uint32_t> variant;
    double lift = 0.0;
  };

  static FeatureMask year_mask(const FeatureDescriptor& feature, std::pair<int, int> range,
                               std::size_t index) {
    FeatureMask mask;
    mask.feature = index;
    mask.allowed.resize(feature.values.size(), 0);
    for (std::size_t v = 0; v < feature.values.size(); ++v) {
      const auto year = detail::parse_int(feature.values[v]);
      if (!year) {
        throw InvalidConfig("ruleset: birth_year value '" + feature.values[v] +
                            "' is not a number");
      }
      if (*year >= range.first && *year <= range.second) {
        mask.allowed[v] = 1;
      }
    }
    return mask;
  }

  static FeatureMask value_mask(const FeatureDescriptor& feature, const std::string& value,
                                std::size_t index) {
    FeatureMask mask;
    mask.feature = index;
    mask.allowed.resize(feature.values.size(), 0);
    bool found = false;
    for (std::size_t v = 0; v < feature.values.size(); ++v) {
      if (feature.values[v] == value) {
        mask.allowed[v] = 1;
        found = true;
      }
    }
    if (!found) {
      throw InvalidConfig("ruleset: value '" + value + "' not in feature '" + feature.name +
                          "'");
    }
    return mask;
  }

  std::vector<CompiledRule> rules_;
  std::uint32_t variant_count_ = 0;
};

inline double true_ctr(const UserProfile& profile, std::uint32_t variant, const RuleSet& rules,
                       const FeatureSchema& schema) {
  return CompiledRuleSet(rules, schema).true_ctr(profile, variant);
}

// Largest accumulated CTR over the full (profile, variant) domain.
inline double max_total_ctr(const RuleSet& rules, const FeatureSchema& schema) {
  const CompiledRuleSet compiled(rules, schema);
  double worst = 0.0;
  UserProfile profile;
  profile.values.assign(schema.feature_count(), 0);
  // Odometer walk over every profile in the domain.
  while (true) {
    for (std::uint32_t v = 0; v < rules.variant_count; ++v) {
      worst = std::max(worst, compiled.true_ctr(profile, v));
    }
    std::size_t k = 0;
    for (; k < profile.values.size(); ++k) {
      if (++profile.values[k] < schema.features[k].values.size()) {
        break;
      }
      profile.values[k] = 0;
    }
    if (k == profile.values.size()) {
      break;
    }
  }
  return worst;
}

// Accumulated lifts are probabilities: no pair may exceed 1.
inline void validate_ruleset(const RuleSet& rules, const FeatureSchema& schema) {
  const double worst = max_total_ctr(rules, schema);
  if (worst > 1.0) {
    throw InvalidConfig("ruleset: accumulated CTR reaches " + std::to_string(worst) +
                        " for some (profile, variant) pair; probabilities must stay <= 1");
  }
}

// The five-variant benchmark rule table for stable synthetic traffic: a base
// rate everywhere, a global lift on variant 2, and four small (decade, state)
// audiences with a strong preference for variant 0 or 1.
inline RuleSet table2_stable_rules() {
  RuleSet rules;
  rules.variant_count = 5;
  rules.rules = {
      Rule{std::nullopt, std::nullopt, std::nullopt, std::nullopt, 0.001},
      Rule{std::nullopt, std::nullopt, std::nullopt, 2, 0.01},
      Rule{{{1980, 1989}}, "New York", std::nullopt, 0, 0.30},
      Rule{{{1950, 1959}}, "New York", std::nullopt, 1, 0.30},
      Rule{{{1980, 1989}}, "Arizona", std::nullopt, 1, 0.30},
      Rule{{{1950, 1959}}, "Arizona", std::nullopt, 0, 0.30},
  };
  return rules;
}

// Same table after the trend flip: the globally lifted variant becomes 3.
inline RuleSet table2_trending_rules() {
  RuleSet rules = table2_stable_rules();
  rules.rules[1].variant = 3;
  return rules;
}

}  // namespace offset
