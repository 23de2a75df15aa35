#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "offset/errors.hpp"
#include "offset/model.hpp"
#include "offset/schema.hpp"

namespace offset {

enum class RescaleMode { off, linf_clip };

struct TrainerConfig {
  double alpha = 0.05;                     // learning rate for click steps
  double gamma = 0.02;                     // smoothing weight for mu refreshes
  std::uint64_t mu_update_cadence = 1000;  // impressions between mu refreshes
  double mu_initial = -0.01;               // until the first refresh
  RescaleMode rescale_mode = RescaleMode::off;

  void validate() const {
    if (!(alpha > 0.0)) {
      throw InvalidArgument("trainer config: alpha must be positive");
    }
    if (!(gamma > 0.0) || gamma > 1.0) {
      throw InvalidArgument("trainer config: gamma must be in (0, 1]");
    }
    if (mu_update_cadence < 1) {
      throw InvalidArgument("trainer config: mu_update_cadence must be at least 1");
    }
    if (!(mu_initial < 0.0)) {
      throw InvalidArgument("trainer config: mu_initial must be negative");
    }
  }
};

struct TrainerState {
  double mu = -0.01;  // negative ratio of non-click step to click step
  std::uint64_t window_clicks = 0;
  std::uint64_t window_nonclicks = 0;
  std::uint64_t total_clicks = 0;
  std::uint64_t total_impressions = 0;

  static TrainerState initial(const TrainerConfig& cfg) {
    cfg.validate();
    TrainerState state;
    state.mu = cfg.mu_initial;
    return state;
  }

  bool operator==(const TrainerState&) const = default;
};

// Step-size ratio between non-click and click updates: -clicks/nonclicks.
inline double step_ratio(std::uint64_t n_clicks, std::uint64_t n_nonclicks) {
  if (n_nonclicks == 0) {
    throw InvalidArgument("step_ratio: n_nonclicks must be positive");
  }
  return -(static_cast<double>(n_clicks) / static_cast<double>(n_nonclicks));
}

// Smooths the window's click/non-click ratio into mu and opens a new window.
// A window without non-clicks carries no usable ratio: keep the old mu.
inline void update_mu(TrainerState& state, const TrainerConfig& cfg) {
  if (state.window_nonclicks > 0) {
    const double window_ratio = step_ratio(state.window_clicks, state.window_nonclicks);
    state.mu = cfg.gamma * window_ratio + (1.0 - cfg.gamma) * state.mu;
  }
  state.window_clicks = 0;
  state.window_nonclicks = 0;
}

// Caps every factor family (all variant vectors; all value vectors of one
// feature) at max-norm bound_b by scaling the whole family with one common
// positive factor.
inline void rescale(Model& model) {
  const auto family_max = [](const std::vector<double>& flat) {
    double m = 0.0;
    for (double x : flat) {
      m = std::max(m, std::abs(x));
    }
    return m;
  };
  const auto clip = [&](std::vector<double>& flat) {
    const double m = family_max(flat);
    if (m > model.bound_b) {
      const double factor = model.bound_b / m;
      for (double& x : flat) {
        x *= factor;
      }
    }
  };
  for (auto& family : model.feature_vectors) {
    clip(family);
  }
  clip(model.variant_vectors);
}

// One stochastic gradient ascent step for a single observation.
//
// All gradients are taken at the pre-update parameters (simultaneous step):
// the variant vector moves along the composed user vector, and each feature
// value vector moves along the variant vector times the other features'
// extended entries. Clicks step by alpha, non-clicks by alpha*mu (mu < 0, so
// the score drops). Every mu_update_cadence impressions the window ratio is
// smoothed into mu and, in linf_clip mode, the norm cap is applied.
inline void update(Model& model, TrainerState& state, const Observation& obs,
                   const TrainerConfig& cfg) {
  model.check_profile(obs.profile);
  model.check_variant(obs.variant);

  const std::size_t total_dim = static_cast<std::size_t>(model.layout.total_dim);
  const std::size_t d = static_cast<std::size_t>(model.layout.per_feature_dim);
  const int standalone = model.layout.standalone_dim;
  const std::size_t feature_count = model.schema.feature_count();

  thread_local std::vector<double> user;
  thread_local std::vector<double> variant_pre;
  thread_local std::vector<double> feature_grads;
  user.resize(total_dim);
  variant_pre.resize(total_dim);
  feature_grads.resize(feature_count * d);

  compose_user_vector(obs.profile, model, user);
  auto variant = model.variant_vector(obs.variant);
  std::copy(variant.begin(), variant.end(), variant_pre.begin());

  // Feature gradients from pre-update values. At a standalone position the
  // other features' extended entries are all 1; at an overlap position,
  // exactly the partner's entry remains.
  for (std::size_t k = 0; k < feature_count; ++k) {
    const auto& slots = model.layout.feature_slots[k];
    const auto& partners = model.layout.partners[k];
    double* grad = feature_grads.data() + k * d;
    for (std::size_t p = 0; p < d; ++p) {
      double g = variant_pre[static_cast<std::size_t>(slots[p])];
      if (static_cast<int>(p) >= standalone) {
        const OverlapPartner partner = partners[p];
        const auto partner_vec = model.feature_vector(
            partner.feature, obs.profile.values[static_cast<std::size_t>(partner.feature)]);
        g *= partner_vec[static_cast<std::size_t>(partner.position)];
      }
      grad[p] = g;
    }
  }

  const double step = obs.clicked ? cfg.alpha : cfg.alpha * state.mu;

  for (std::size_t i = 0; i < total_dim; ++i) {
    variant[i] += step * user[i];
  }
  for (std::size_t k = 0; k < feature_count; ++k) {
    auto v = model.feature_vector(static_cast<int>(k), obs.profile.values[k]);
    const double* grad = feature_grads.data() + k * d;
    for (std::size_t p = 0; p < d; ++p) {
      v[p] += step * grad[p];
    }
  }

  state.total_impressions += 1;
  if (obs.clicked) {
    state.total_clicks += 1;
    state.window_clicks += 1;
  } else {
    state.window_nonclicks += 1;
  }
  if (state.total_impressions % cfg.mu_update_cadence == 0) {
    update_mu(state, cfg);
    if (cfg.rescale_mode == RescaleMode::linf_clip) {
      rescale(model);
    }
  }
}

}  // namespace offset
