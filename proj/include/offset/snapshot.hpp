#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "offset/errors.hpp"
#include "offset/layout.hpp"
#include "offset/model.hpp"
#include "offset/trainer.hpp"

namespace offset {

// Versioned binary snapshot of a model plus its trainer state. All integers
// and doubles are stored little-endian, so load(save(m)) is bit-exact.

struct Snapshot {
  Model model;
  TrainerState state;
};

namespace detail {

constexpr char kSnapshotMagic[8] = {'O', 'F', 'S', 'E', 'T', 'S', 'N', 'P'};
constexpr std::uint32_t kSnapshotVersion = 1;

class SnapshotWriter {
public:
  explicit SnapshotWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary), path_(path.string()) {
    if (!out_) {
      throw IoError("cannot open snapshot for writing: " + path_);
    }
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  void u32(std::uint32_t v) { write_le(v); }
  void u64(std::uint64_t v) { write_le(v); }
  void f64(double v) { write_le(std::bit_cast<std::uint64_t>(v)); }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  void close() {
    out_.close();
    if (out_.fail()) {
      throw IoError("snapshot write failed: " + path_);
    }
  }

private:
  template <typename T>
  void write_le(T v) {
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    bytes(buf, sizeof(T));
  }

  std::ofstream out_;
  std::string path_;
};

class SnapshotReader {
public:
  explicit SnapshotReader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) {
      throw IoError("cannot open snapshot: " + path_);
    }
  }

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw DataError("corrupt snapshot (truncated): " + path_);
    }
  }

  std::uint32_t u32() { return read_le<std::uint32_t>(); }
  std::uint64_t u64() { return read_le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(read_le<std::uint64_t>()); }

  std::string str(std::uint32_t max_len = 1 << 20) {
    const std::uint32_t len = u32();
    if (len > max_len) {
      throw DataError("corrupt snapshot (oversized string): " + path_);
    }
    std::string s(len, '\0');
    bytes(s.data(), len);
    return s;
  }

  void expect_eof() {
    char extra;
    in_.read(&extra, 1);
    if (!in_.eof()) {
      throw DataError("corrupt snapshot (trailing bytes): " + path_);
    }
  }

  const std::string& path() const { return path_; }

private:
  template <typename T>
  T read_le() {
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(buf[i]) << (8 * i);
    }
    return v;
  }

  std::ifstream in_;
  std::string path_;
};

}  // namespace detail

inline void save_snapshot(const Model& model, const TrainerState& state,
                          const std::filesystem::path& path) {
  detail::SnapshotWriter w(path);
  w.bytes(detail::kSnapshotMagic, sizeof detail::kSnapshotMagic);
  w.u32(detail::kSnapshotVersion);

  // Schema.
  w.u32(static_cast<std::uint32_t>(model.schema.feature_count()));
  for (const auto& f : model.schema.features) {
    w.str(f.name);
    w.u32(static_cast<std::uint32_t>(f.values.size()));
    for (const auto& v : f.values) {
      w.str(v);
    }
  }

  // Layout: parameters plus explicit slot tables.
  const auto& layout = model.layout;
  w.u64(layout.seed);
  w.u32(static_cast<std::uint32_t>(layout.feature_count));
  w.u32(static_cast<std::uint32_t>(layout.standalone_dim));
  w.u32(static_cast<std::uint32_t>(layout.overlap_dim));
  for (const auto& row : layout.feature_slots) {
    for (int idx : row) {
      w.u32(static_cast<std::uint32_t>(idx));
    }
  }

  // Vectors and trainer state.
  w.u32(model.variant_count);
  w.f64(model.bound_b);
  for (const auto& family : model.feature_vectors) {
    for (double x : family) {
      w.f64(x);
    }
  }
  for (double x : model.variant_vectors) {
    w.f64(x);
  }
  w.f64(state.mu);
  w.u64(state.window_clicks);
  w.u64(state.window_nonclicks);
  w.u64(state.total_clicks);
  w.u64(state.total_impressions);
  w.close();
}

inline Snapshot load_snapshot(const std::filesystem::path& path) {
  detail::SnapshotReader r(path);
  char magic[sizeof detail::kSnapshotMagic];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, detail::kSnapshotMagic, sizeof magic) != 0) {
    throw DataError("corrupt snapshot (bad magic): " + r.path());
  }
  const std::uint32_t version = r.u32();
  if (version != detail::kSnapshotVersion) {
    throw DataError("unsupported snapshot version " + std::to_string(version) + ": " +
                    r.path());
  }

  Snapshot snap;
  const std::uint32_t feature_count = r.u32();
  if (feature_count == 0 || feature_count > 4096) {
    throw DataError("corrupt snapshot (feature count): " + r.path());
  }
  for (std::uint32_t k = 0; k < feature_count; ++k) {
    FeatureDescriptor f;
    f.name = r.str();
    const std::uint32_t n_values = r.u32();
    if (n_values == 0 || n_values > (1u << 24)) {
      throw DataError("corrupt snapshot (value count): " + r.path());
    }
    f.values.reserve(n_values);
    for (std::uint32_t v = 0; v < n_values; ++v) {
      f.values.push_back(r.str());
    }
    snap.model.schema.features.push_back(std::move(f));
  }
  try {
    snap.model.schema.validate();
  } catch (const InvalidArgument& e) {
    throw DataError("corrupt snapshot (schema): " + std::string(e.what()));
  }

  const std::uint64_t layout_seed = r.u64();
  const std::uint32_t layout_k = r.u32();
  const std::uint32_t layout_s = r.u32();
  const std::uint32_t layout_o = r.u32();
  if (layout_k != feature_count || layout_s > (1u << 20) || layout_o > (1u << 20) ||
      layout_s + layout_o == 0) {
    throw DataError("corrupt snapshot (layout parameters): " + r.path());
  }
  // Rebuild the derived tables, then overwrite the slot assignment with the
  // stored one so a snapshot never depends on the builder's permutation.
  IndexLayout layout = build_layout(static_cast<int>(layout_k), static_cast<int>(layout_s),
                                    static_cast<int>(layout_o), layout_seed);
  for (auto& row : layout.feature_slots) {
    for (int& idx : row) {
      const std::uint32_t stored = r.u32();
      if (stored >= static_cast<std::uint32_t>(layout.total_dim)) {
        throw DataError("corrupt snapshot (slot index): " + r.path());
      }
      idx = static_cast<int>(stored);
    }
  }
  for (int a = 0; a < layout.feature_count; ++a) {
    for (int b = a + 1; b < layout.feature_count; ++b) {
      const int pidx = layout.pair_index(a, b);
      for (int t = 0; t < layout.overlap_dim; ++t) {
        const int pos_a = layout.overlap_position(a, b, t);
        const int pos_b = layout.overlap_position(b, a, t);
        if (layout.feature_slots[a][pos_a] != layout.feature_slots[b][pos_b]) {
          throw DataError("corrupt snapshot (slot tables disagree): " + r.path());
        }
        layout.pair_slots[pidx][t] = layout.feature_slots[a][pos_a];
      }
    }
  }
  // The stored tables must still partition the index space.
  std::vector<int> last_owner(static_cast<std::size_t>(layout.total_dim), -1);
  std::vector<std::uint8_t> owner_count(static_cast<std::size_t>(layout.total_dim), 0);
  for (int j = 0; j < layout.feature_count; ++j) {
    for (int idx : layout.feature_slots[static_cast<std::size_t>(j)]) {
      auto& owner = last_owner[static_cast<std::size_t>(idx)];
      auto& count = owner_count[static_cast<std::size_t>(idx)];
      if (owner == j || count >= 2) {
        throw DataError("corrupt snapshot (slots are not a partition): " + r.path());
      }
      owner = j;
      ++count;
    }
  }
  int standalone_total = 0;
  for (std::uint8_t count : owner_count) {
    if (count == 0) {
      throw DataError("corrupt snapshot (slots are not a partition): " + r.path());
    }
    standalone_total += (count == 1);
  }
  if (standalone_total != layout.feature_count * layout.standalone_dim) {
    throw DataError("corrupt snapshot (slots are not a partition): " + r.path());
  }
  snap.model.layout = std::move(layout);

  snap.model.variant_count = r.u32();
  if (snap.model.variant_count == 0 || snap.model.variant_count > (1u << 24)) {
    throw DataError("corrupt snapshot (variant count): " + r.path());
  }
  snap.model.bound_b = r.f64();
  const std::size_t d = static_cast<std::size_t>(snap.model.layout.per_feature_dim);
  snap.model.feature_vectors.resize(feature_count);
  for (std::uint32_t k = 0; k < feature_count; ++k) {
    auto& family = snap.model.feature_vectors[k];
    family.resize(snap.model.schema.features[k].values.size() * d);
    for (double& x : family) {
      x = r.f64();
    }
  }
  snap.model.variant_vectors.resize(static_cast<std::size_t>(snap.model.variant_count) *
                                    static_cast<std::size_t>(snap.model.layout.total_dim));
  for (double& x : snap.model.variant_vectors) {
    x = r.f64();
  }
  snap.state.mu = r.f64();
  snap.state.window_clicks = r.u64();
  snap.state.window_nonclicks = r.u64();
  snap.state.total_clicks = r.u64();
  snap.state.total_impressions = r.u64();
  r.expect_eof();
  return snap;
}

}  // namespace offset
