#include "offset/snapshot.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "offset/datagen.hpp"
#include "offset/errors.hpp"
#include "offset/rules.hpp"
#include "offset/trainer.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using offset::load_snapshot;
using offset::Model;
using offset::save_snapshot;
using offset::TrainerConfig;
using offset::TrainerState;

namespace {

class SnapshotTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("offset-snap-" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  static void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  fs::path dir_;
};

// A model that has actually trained for a while, so its state is non-trivial.
std::pair<Model, TrainerState> trained_model() {
  const auto schema = offset::default_synthetic_schema();
  Model model = offset::init_model(schema, offset::build_layout(3, 2, 4, 77), 5, 1.0, 78);
  TrainerConfig cfg;
  TrainerState state = TrainerState::initial(cfg);
  offset::GeneratorConfig gen;
  gen.seed = 79;
  gen.n_samples = 20'000;
  offset::generate(gen, offset::table2_stable_rules(), nullptr,
                   [&](const offset::Observation& obs) { update(model, state, obs, cfg); });
  return {std::move(model), state};
}

}  // namespace

TEST_F(SnapshotTest, RoundTripIsBitExact) {
  const auto [model, state] = trained_model();
  save_snapshot(model, state, path("model.snap"));

  const auto snap = load_snapshot(path("model.snap"));
  EXPECT_EQ(snap.model.schema, model.schema);
  EXPECT_EQ(snap.model.layout, model.layout);
  EXPECT_EQ(snap.model.feature_vectors, model.feature_vectors);
  EXPECT_EQ(snap.model.variant_vectors, model.variant_vectors);
  EXPECT_EQ(snap.model.variant_count, model.variant_count);
  EXPECT_EQ(snap.model.bound_b, model.bound_b);
  EXPECT_EQ(snap.state, state);

  // Saving the loaded copy reproduces the file byte for byte.
  save_snapshot(snap.model, snap.state, path("model2.snap"));
  const auto original = slurp(path("model.snap"));
  EXPECT_FALSE(original.empty());
  EXPECT_EQ(original, slurp(path("model2.snap")));
}

TEST_F(SnapshotTest, FreshStateKeepsConfiguredInitialMu) {
  const auto schema = oracles::toy_schema({2, 2});
  const Model model = offset::init_model(schema, offset::build_layout(2, 1, 1, 5), 3, 1.0, 6);
  TrainerConfig cfg;
  cfg.mu_initial = -0.04;
  save_snapshot(model, TrainerState::initial(cfg), path("fresh.snap"));
  const auto snap = load_snapshot(path("fresh.snap"));
  EXPECT_DOUBLE_EQ(snap.state.mu, -0.04);
  EXPECT_EQ(snap.state.total_impressions, 0u);
}

TEST_F(SnapshotTest, DetectsCorruption) {
  const auto [model, state] = trained_model();
  save_snapshot(model, state, path("base.snap"));
  const std::string bytes = slurp(path("base.snap"));
  ASSERT_GT(bytes.size(), 64u);

  // Truncation at several depths.
  for (const std::size_t keep :
       {bytes.size() - 1, bytes.size() / 2, std::size_t{32}, std::size_t{4}}) {
    spit(path("cut.snap"), bytes.substr(0, keep));
    EXPECT_THROW(load_snapshot(path("cut.snap")), offset::DataError) << "keep=" << keep;
  }

  // Trailing garbage.
  spit(path("tail.snap"), bytes + "x");
  EXPECT_THROW(load_snapshot(path("tail.snap")), offset::DataError);

  // Wrong magic.
  std::string flipped = bytes;
  flipped[0] = 'X';
  spit(path("magic.snap"), flipped);
  EXPECT_THROW(load_snapshot(path("magic.snap")), offset::DataError);

  // Unsupported version.
  std::string version = bytes;
  version[8] = static_cast<char>(9);
  spit(path("version.snap"), version);
  EXPECT_THROW(load_snapshot(path("version.snap")), offset::DataError);

  EXPECT_THROW(load_snapshot(path("missing.snap")), offset::IoError);
}

TEST_F(SnapshotTest, ContinuedTrainingMatchesUninterruptedRun) {
  const auto schema = offset::default_synthetic_schema();
  const TrainerConfig cfg;
  offset::GeneratorConfig gen;
  gen.seed = 91;
  gen.n_samples = 30'000;
  std::vector<offset::Observation> stream;
  offset::generate(gen, offset::table2_stable_rules(), nullptr,
                   [&](const offset::Observation& obs) { stream.push_back(obs); });

  // Uninterrupted run over the whole stream.
  Model whole = offset::init_model(schema, offset::build_layout(3, 2, 4, 1), 5, 1.0, 2);
  TrainerState whole_state = TrainerState::initial(cfg);
  for (const auto& obs : stream) {
    update(whole, whole_state, obs, cfg);
  }

  // Split run: train half, snapshot, reload, train the rest.
  Model first = offset::init_model(schema, offset::build_layout(3, 2, 4, 1), 5, 1.0, 2);
  TrainerState first_state = TrainerState::initial(cfg);
  for (std::size_t i = 0; i < stream.size() / 2; ++i) {
    update(first, first_state, stream[i], cfg);
  }
  save_snapshot(first, first_state, path("half.snap"));
  auto resumed = load_snapshot(path("half.snap"));
  for (std::size_t i = stream.size() / 2; i < stream.size(); ++i) {
    update(resumed.model, resumed.state, stream[i], cfg);
  }

  EXPECT_EQ(resumed.model.feature_vectors, whole.feature_vectors);
  EXPECT_EQ(resumed.model.variant_vectors, whole.variant_vectors);
  EXPECT_EQ(resumed.state, whole_state);
}
