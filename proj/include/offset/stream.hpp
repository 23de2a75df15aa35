#pragma once

#include <cstdint>
#include <vector>

#include "offset/schema.hpp"

namespace offset {

// Sequential observation stream. Sources carry their own schema and variant
// universe so consumers can size models and reports without a pre-scan.
class ObservationSource {
public:
  virtual ~ObservationSource() = default;
  virtual const FeatureSchema& schema() const = 0;
  virtual std::uint32_t variant_count() const = 0;
  // Fills `out` and returns true, or returns false at end of stream.
  virtual bool next(Observation& out) = 0;
};

class VectorSource : public ObservationSource {
public:
  VectorSource(FeatureSchema schema, std::uint32_t variant_count,
               std::vector<Observation> observations)
      : schema_(std::move(schema)),
        variant_count_(variant_count),
        observations_(std::move(observations)) {}

  const FeatureSchema& schema() const override { return schema_; }
  std::uint32_t variant_count() const override { return variant_count_; }

  bool next(Observation& out) override {
    if (position_ >= observations_.size()) {
      return false;
    }
    out = observations_[position_++];
    return true;
  }

  void rewind() { position_ = 0; }

private:
  FeatureSchema schema_;
  std::uint32_t variant_count_ = 0;
  std::vector<Observation> observations_;
  std::size_t position_ = 0;
};

}  // namespace offset
