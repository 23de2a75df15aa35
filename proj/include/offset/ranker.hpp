#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <utility>
#include <vector>

#include "offset/baselines.hpp"
#include "offset/model.hpp"
#include "offset/trainer.hpp"

namespace offset {

// The latent-factor engine behind the shared ranking contract: scores all
// variants against the composed user vector and trains online on every
// observation it sees.
class OffSetRanker : public RankingAlgorithm {
public:
  OffSetRanker(Model model, TrainerConfig cfg)
      : model_(std::move(model)), cfg_(cfg), state_(TrainerState::initial(cfg)) {}

  OffSetRanker(Model model, TrainerConfig cfg, TrainerState state)
      : model_(std::move(model)), cfg_(cfg), state_(state) {
    cfg_.validate();
  }

  std::string_view name() const override { return "OFF-Set"; }

  void rank(const UserProfile& profile, std::vector<std::uint32_t>& out) override {
    user_.resize(static_cast<std::size_t>(model_.layout.total_dim));
    compose_user_vector(profile, model_, user_);
    scores_.resize(model_.variant_count);
    const std::size_t dim = user_.size();
    for (std::uint32_t v = 0; v < model_.variant_count; ++v) {
      const double* a = model_.variant_vectors.data() + v * dim;
      double total = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        total += user_[i] * a[i];
      }
      scores_[v] = total;
    }
    out.resize(model_.variant_count);
    std::iota(out.begin(), out.end(), 0u);
    // Ties break toward the lower variant id.
    std::stable_sort(out.begin(), out.end(), [this](std::uint32_t a, std::uint32_t b) {
      return scores_[a] > scores_[b];
    });
  }

  void observe(const Observation& obs) override { update(model_, state_, obs, cfg_); }

  const Model& model() const { return model_; }
  const TrainerState& state() const { return state_; }
  const TrainerConfig& config() const { return cfg_; }

private:
  Model model_;
  TrainerConfig cfg_;
  TrainerState state_;
  std::vector<double> user_;
  std::vector<double> scores_;
};

}  // namespace offset
