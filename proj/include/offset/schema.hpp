#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "offset/errors.hpp"

namespace offset {

// One categorical user feature. Dense value ids are positions in `values`.
struct FeatureDescriptor {
  std::string name;
  std::vector<std::string> values;

  bool operator==(const FeatureDescriptor&) const = default;
};

struct FeatureSchema {
  std::vector<FeatureDescriptor> features;

  std::size_t feature_count() const { return features.size(); }

  void validate() const {
    if (features.empty()) {
      throw InvalidArgument("schema: needs at least one feature");
    }
    std::unordered_set<std::string> names;
    for (const auto& f : features) {
      if (f.values.empty()) {
        throw InvalidArgument("schema: feature '" + f.name + "' has an empty value domain");
      }
      if (!names.insert(f.name).second) {
        throw InvalidArgument("schema: duplicate feature name '" + f.name + "'");
      }
      std::unordered_set<std::string> vals;
      for (const auto& v : f.values) {
        if (!vals.insert(v).second) {
          throw InvalidArgument("schema: duplicate value '" + v + "' in feature '" + f.name + "'");
        }
      }
    }
  }

  bool operator==(const FeatureSchema&) const = default;
};

// One value id per feature, in schema order.
struct UserProfile {
  std::vector<std::uint32_t> values;

  bool operator==(const UserProfile&) const = default;
};

// One logged impression: who saw which ad variant and whether they clicked.
struct Observation {
  std::uint64_t timestamp = 0;
  UserProfile profile;
  std::uint32_t variant = 0;
  bool clicked = false;

  bool operator==(const Observation&) const = default;
};

}  // namespace offset
