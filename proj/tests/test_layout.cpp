#include "offset/layout.hpp"

#include <gtest/gtest.h>

#include <set>

#include "offset/errors.hpp"
#include "oracles.hpp"

using offset::build_layout;
using offset::IndexLayout;

TEST(Layout, DimensionsMatchClosedForms) {
  const IndexLayout a = build_layout(3, 2, 4, 1);
  EXPECT_EQ(a.total_dim, 18);
  EXPECT_EQ(a.per_feature_dim, 10);

  // A single feature has no pairs; the overlap dimension is unused.
  const IndexLayout b = build_layout(1, 5, 3, 1);
  EXPECT_EQ(b.total_dim, 5);
  EXPECT_EQ(b.per_feature_dim, 5);
  EXPECT_TRUE(b.pair_slots.empty());

  const IndexLayout c = build_layout(4, 1, 2, 1);
  EXPECT_EQ(c.total_dim, 16);
  EXPECT_EQ(c.per_feature_dim, 7);
  EXPECT_EQ(oracles::check_partition(c), "");
}

TEST(Layout, PartitionHoldsAcrossShapes) {
  offset::Rng rng(42);
  for (int k = 1; k <= 5; ++k) {
    for (int s : {0, 1, 2, 3}) {
      for (int o : {0, 1, 2, 4}) {
        if (s + o == 0) {
          continue;
        }
        const auto layout = build_layout(k, s, o, rng());
        EXPECT_EQ(oracles::check_partition(layout), "")
            << "k=" << k << " s=" << s << " o=" << o;
      }
    }
  }
}

TEST(Layout, DeterministicPerSeed) {
  const auto a = build_layout(4, 2, 3, 7);
  const auto b = build_layout(4, 2, 3, 7);
  EXPECT_EQ(a, b);

  const auto c = build_layout(4, 2, 3, 8);
  EXPECT_NE(a.feature_slots, c.feature_slots);
  // The partition structure is seed-independent; only physical indices move.
  EXPECT_EQ(oracles::check_partition(c), "");
}

TEST(Layout, SharedSlotsAgreeBetweenPartners) {
  const auto layout = build_layout(4, 2, 3, 11);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == b) {
        continue;
      }
      for (int t = 0; t < layout.overlap_dim; ++t) {
        const int pos_a = layout.overlap_position(a, b, t);
        const int pos_b = layout.overlap_position(b, a, t);
        EXPECT_EQ(layout.feature_slots[a][pos_a], layout.feature_slots[b][pos_b]);
        const auto partner = layout.partners[a][pos_a];
        EXPECT_EQ(partner.feature, b);
        EXPECT_EQ(partner.position, pos_b);
      }
    }
  }
  // Standalone positions have no partner.
  for (int j = 0; j < 4; ++j) {
    for (int p = 0; p < layout.standalone_dim; ++p) {
      EXPECT_EQ(layout.partners[j][p].feature, -1);
    }
  }
}

TEST(Layout, PairIndexEnumeratesUpperTriangle) {
  const auto layout = build_layout(5, 1, 1, 3);
  std::set<int> seen;
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) {
      const int idx = layout.pair_index(a, b);
      EXPECT_EQ(idx, layout.pair_index(b, a));
      EXPECT_TRUE(seen.insert(idx).second);
      EXPECT_GE(idx, 0);
      EXPECT_LT(idx, 10);
    }
  }
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_THROW(layout.pair_index(2, 2), offset::InvalidArgument);
}

TEST(Layout, RejectsInvalidDimensions) {
  EXPECT_THROW(build_layout(0, 1, 1, 0), offset::InvalidArgument);
  EXPECT_THROW(build_layout(-2, 1, 1, 0), offset::InvalidArgument);
  EXPECT_THROW(build_layout(3, -1, 1, 0), offset::InvalidArgument);
  EXPECT_THROW(build_layout(3, 1, -1, 0), offset::InvalidArgument);
  EXPECT_THROW(build_layout(3, 0, 0, 0), offset::InvalidArgument);
}
