#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "offset/errors.hpp"
#include "offset/rng.hpp"

namespace offset {

// For an overlap position of a feature vector: which other feature shares the
// underlying latent index, and at which position of that feature's vector.
struct OverlapPartner {
  int feature = -1;
  int position = -1;

  bool operator==(const OverlapPartner&) const = default;
};

// Assignment of the D latent indices to features and feature pairs.
//
// Each feature owns `standalone_dim` indices alone and shares `overlap_dim`
// indices with every other feature, so a feature vector has
// per_feature_dim = standalone_dim + (K-1)*overlap_dim entries and the full
// space has total_dim = K*standalone_dim + C(K,2)*overlap_dim. Positions
// 0..standalone_dim-1 of a feature vector are standalone; the rest come in
// blocks of overlap_dim, one block per partner feature in ascending order.
struct IndexLayout {
  int feature_count = 0;   // K
  int standalone_dim = 0;  // entries owned by a single feature
  int overlap_dim = 0;     // entries shared by a feature pair
  std::uint64_t seed = 0;
  int total_dim = 0;       // D
  int per_feature_dim = 0; // d

  // feature_slots[j][p] = latent index holding position p of feature j.
  std::vector<std::vector<int>> feature_slots;
  // pair_slots[pair_index(j,k)] = the overlap_dim indices shared by j and k.
  std::vector<std::vector<int>> pair_slots;
  // partners[j][p] identifies the sharing feature for overlap positions;
  // standalone positions keep the default {-1, -1}.
  std::vector<std::vector<OverlapPartner>> partners;

  static int pair_count(int feature_count) {
    return feature_count * (feature_count - 1) / 2;
  }

  // Canonical index of the unordered pair {j, k} among all pairs.
  int pair_index(int j, int k) const {
    if (j == k || j < 0 || k < 0 || j >= feature_count || k >= feature_count) {
      throw InvalidArgument("pair_index: invalid feature pair");
    }
    const int a = j < k ? j : k;
    const int b = j < k ? k : j;
    return a * (2 * feature_count - a - 1) / 2 + (b - a - 1);
  }

  // Position of the block entry feature j shares with feature k (offset t).
  int overlap_position(int j, int k, int t) const {
    const int block = k < j ? k : k - 1;
    return standalone_dim + block * overlap_dim + t;
  }

  bool operator==(const IndexLayout&) const = default;
};

// Builds the slot assignment. The partition structure (which positions are
// standalone, which are shared, and with whom) is fixed by (K, s, o); the
// seed only permutes which physical indices land in which slot.
inline IndexLayout build_layout(int feature_count, int standalone_dim, int overlap_dim,
                                std::uint64_t seed) {
  if (feature_count < 1) {
    throw InvalidArgument("build_layout: feature_count must be at least 1");
  }
  if (standalone_dim < 0 || overlap_dim < 0) {
    throw InvalidArgument("build_layout: dimensions must be non-negative");
  }
  if (standalone_dim + overlap_dim < 1) {
    throw InvalidArgument("build_layout: standalone_dim + overlap_dim must be at least 1");
  }

  IndexLayout layout;
  layout.feature_count = feature_count;
  layout.standalone_dim = standalone_dim;
  layout.overlap_dim = overlap_dim;
  layout.seed = seed;

  const int n_pairs = IndexLayout::pair_count(feature_count);
  layout.total_dim = feature_count * standalone_dim + n_pairs * overlap_dim;
  layout.per_feature_dim = standalone_dim + (feature_count - 1) * overlap_dim;

  std::vector<int> perm(static_cast<std::size_t>(layout.total_dim));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  shuffle(std::span<int>(perm), rng);

  layout.feature_slots.assign(feature_count, std::vector<int>(layout.per_feature_dim, -1));
  layout.partners.assign(feature_count,
                         std::vector<OverlapPartner>(layout.per_feature_dim));
  layout.pair_slots.assign(n_pairs, std::vector<int>(overlap_dim, -1));

  // Standalone slots: feature j takes permuted positions [j*s, (j+1)*s).
  for (int j = 0; j < feature_count; ++j) {
    for (int p = 0; p < standalone_dim; ++p) {
      layout.feature_slots[j][p] = perm[static_cast<std::size_t>(j) * standalone_dim + p];
    }
  }

  // Overlap slots: pair {a, b} takes a block of o permuted positions, wired
  // into both features' vectors at matching block offsets.
  const std::size_t pair_base = static_cast<std::size_t>(feature_count) * standalone_dim;
  for (int a = 0; a < feature_count; ++a) {
    for (int b = a + 1; b < feature_count; ++b) {
      const int pidx = layout.pair_index(a, b);
      for (int t = 0; t < overlap_dim; ++t) {
        const int idx = perm[pair_base + static_cast<std::size_t>(pidx) * overlap_dim + t];
        layout.pair_slots[pidx][t] = idx;
        const int pos_a = layout.overlap_position(a, b, t);
        const int pos_b = layout.overlap_position(b, a, t);
        layout.feature_slots[a][pos_a] = idx;
        layout.feature_slots[b][pos_b] = idx;
        layout.partners[a][pos_a] = OverlapPartner{b, pos_b};
        layout.partners[b][pos_b] = OverlapPartner{a, pos_a};
      }
    }
  }

  return layout;
}

}  // namespace offset
