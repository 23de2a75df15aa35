#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "offset/errors.hpp"
#include "offset/layout.hpp"
#include "offset/rng.hpp"
#include "offset/schema.hpp"

namespace offset {

// Latent factor model: one per_feature_dim vector per feature value, one
// total_dim vector per ad variant. Plain value type; copies are deep, so a
// snapshot taken between updates can be scored concurrently while the
// original keeps training.
struct Model {
  FeatureSchema schema;
  IndexLayout layout;
  // feature_vectors[k] stores the vectors of every value of feature k,
  // row-major: value id v occupies [v*d, (v+1)*d).
  std::vector<std::vector<double>> feature_vectors;
  // Row-major [variant_count x total_dim].
  std::vector<double> variant_vectors;
  std::uint32_t variant_count = 0;
  double bound_b = 1.0;

  std::span<const double> feature_vector(int feature, std::uint32_t value) const {
    check_value(feature, value);
    const std::size_t d = static_cast<std::size_t>(layout.per_feature_dim);
    return {feature_vectors[static_cast<std::size_t>(feature)].data() + value * d, d};
  }

  std::span<double> feature_vector(int feature, std::uint32_t value) {
    check_value(feature, value);
    const std::size_t d = static_cast<std::size_t>(layout.per_feature_dim);
    return {feature_vectors[static_cast<std::size_t>(feature)].data() + value * d, d};
  }

  std::span<const double> variant_vector(std::uint32_t variant) const {
    check_variant(variant);
    const std::size_t dim = static_cast<std::size_t>(layout.total_dim);
    return {variant_vectors.data() + variant * dim, dim};
  }

  std::span<double> variant_vector(std::uint32_t variant) {
    check_variant(variant);
    const std::size_t dim = static_cast<std::size_t>(layout.total_dim);
    return {variant_vectors.data() + variant * dim, dim};
  }

  void check_variant(std::uint32_t variant) const {
    if (variant >= variant_count) {
      throw DataError("unknown variant id " + std::to_string(variant));
    }
  }

  void check_value(int feature, std::uint32_t value) const {
    if (feature < 0 || static_cast<std::size_t>(feature) >= schema.feature_count()) {
      throw DataError("unknown feature index " + std::to_string(feature));
    }
    if (value >= schema.features[static_cast<std::size_t>(feature)].values.size()) {
      throw DataError("unknown value id " + std::to_string(value) + " for feature '" +
                      schema.features[static_cast<std::size_t>(feature)].name + "'");
    }
  }

  void check_profile(const UserProfile& profile) const {
    if (profile.values.size() != schema.feature_count()) {
      throw InvalidArgument("profile has " + std::to_string(profile.values.size()) +
                            " values, schema has " + std::to_string(schema.feature_count()) +
                            " features");
    }
    for (std::size_t k = 0; k < profile.values.size(); ++k) {
      check_value(static_cast<int>(k), profile.values[k]);
    }
  }
};

// Fresh model with entries uniform in [0.5-eps, 0.5+eps]. Keeping entries
// near a positive constant keeps the element-wise products stable while the
// first observations arrive.
inline Model init_model(FeatureSchema schema, IndexLayout layout, std::uint32_t variant_count,
                        double bound_b, std::uint64_t seed, double init_spread = 0.1) {
  schema.validate();
  if (static_cast<int>(schema.feature_count()) != layout.feature_count) {
    throw InvalidArgument("init_model: schema has " + std::to_string(schema.feature_count()) +
                          " features, layout expects " + std::to_string(layout.feature_count));
  }
  if (variant_count == 0) {
    throw InvalidArgument("init_model: variant_count must be positive");
  }
  if (!(bound_b > 0.0)) {
    throw InvalidArgument("init_model: bound_b must be positive");
  }

  Model model;
  model.schema = std::move(schema);
  model.layout = std::move(layout);
  model.variant_count = variant_count;
  model.bound_b = bound_b;

  const double lo = 0.5 - init_spread;
  const double hi = 0.5 + init_spread;
  Rng rng(seed);
  const std::size_t d = static_cast<std::size_t>(model.layout.per_feature_dim);
  model.feature_vectors.resize(model.schema.feature_count());
  for (std::size_t k = 0; k < model.schema.feature_count(); ++k) {
    auto& flat = model.feature_vectors[k];
    flat.resize(model.schema.features[k].values.size() * d);
    for (double& x : flat) {
      x = uniform_real(rng, lo, hi);
    }
  }
  model.variant_vectors.resize(static_cast<std::size_t>(variant_count) *
                               static_cast<std::size_t>(model.layout.total_dim));
  for (double& x : model.variant_vectors) {
    x = uniform_real(rng, lo, hi);
  }
  return model;
}

// Places a feature vector into the full latent space: its entries land at the
// feature's slots, every other index gets 1 so that element-wise products
// across features compose cleanly.
inline std::vector<double> extend_feature_vector(std::span<const double> v, int feature,
                                                 const IndexLayout& layout) {
  if (feature < 0 || feature >= layout.feature_count) {
    throw InvalidArgument("extend_feature_vector: feature index out of range");
  }
  if (v.size() != static_cast<std::size_t>(layout.per_feature_dim)) {
    throw InvalidArgument("extend_feature_vector: vector has " + std::to_string(v.size()) +
                          " entries, layout expects " +
                          std::to_string(layout.per_feature_dim));
  }
  std::vector<double> out(static_cast<std::size_t>(layout.total_dim), 1.0);
  const auto& slots = layout.feature_slots[static_cast<std::size_t>(feature)];
  for (std::size_t p = 0; p < v.size(); ++p) {
    out[static_cast<std::size_t>(slots[p])] = v[p];
  }
  return out;
}

// Element-wise product of the K extended feature vectors, written into `out`.
// Every index is touched by each of its owners exactly once, so a standalone
// index carries the owner's entry and an overlap index the pair's product.
inline void compose_user_vector(const UserProfile& profile, const Model& model,
                                std::span<double> out) {
  model.check_profile(profile);
  if (out.size() != static_cast<std::size_t>(model.layout.total_dim)) {
    throw InvalidArgument("compose_user_vector: output span has wrong length");
  }
  for (double& x : out) {
    x = 1.0;
  }
  for (std::size_t k = 0; k < profile.values.size(); ++k) {
    const auto v = model.feature_vector(static_cast<int>(k), profile.values[k]);
    const auto& slots = model.layout.feature_slots[k];
    for (std::size_t p = 0; p < v.size(); ++p) {
      out[static_cast<std::size_t>(slots[p])] *= v[p];
    }
  }
}

inline std::vector<double> compose_user_vector(const UserProfile& profile, const Model& model) {
  std::vector<double> out(static_cast<std::size_t>(model.layout.total_dim));
  compose_user_vector(profile, model, out);
  return out;
}

// Match score: inner product of the composed user vector and the variant
// vector. Higher means a click is more likely.
inline double score(const UserProfile& profile, std::uint32_t variant, const Model& model) {
  const auto a = model.variant_vector(variant);
  thread_local std::vector<double> user;
  user.resize(static_cast<std::size_t>(model.layout.total_dim));
  compose_user_vector(profile, model, user);
  double total = 0.0;
  for (std::size_t i = 0; i < user.size(); ++i) {
    total += user[i] * a[i];
  }
  return total;
}

// Diagnostic cap on score magnitudes: 0.5 * ln(total / clicks). Scores keep a
// valid probabilistic reading while they stay within this bound; nothing
// enforces it during training since only the ranking matters.
inline double score_bound(std::uint64_t n_total, std::uint64_t n_clicks) {
  if (n_clicks == 0 || n_clicks > n_total) {
    throw InvalidArgument("score_bound: need 0 < n_clicks <= n_total");
  }
  return 0.5 * std::log(static_cast<double>(n_total) / static_cast<double>(n_clicks));
}

}  // namespace offset
