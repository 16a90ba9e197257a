#pragma once

// Record-based encoding. An ItemMemory holds one quasi-orthogonal random
// hypervector per feature position and a chain of correlated level
// hypervectors per quantized value; a sample is encoded by binding each
// position with its value level, accumulating across features, and taking the
// majority sign.

#include <cstdint>
#include <span>
#include <vector>

#include "hdc/dataset.hpp"
#include "hdc/hypervector.hpp"
#include "hdc/rng.hpp"

namespace hdc {

// Per-feature min/max over the training data; quantization clamps everything
// else into this range.
struct FeatureStats {
  std::vector<double> min_values;
  std::vector<double> max_values;

  std::size_t n_features() const noexcept { return min_values.size(); }
};

FeatureStats fit_stats(const RawDataset& data);

// Fixed random material for the encoder. Position hypervectors are
// independent draws. Level hypervectors form a chain: level 0 is random, a
// fixed random set of floor(dim/2) positions is split into n_levels-1 slices
// whose sizes differ by at most one, and each next level flips the next
// slice. Distance between levels a and b is then 0.5*|a-b|/(n_levels-1) up to
// less than one bit, hitting 0.5 between the extreme levels.
class ItemMemory {
 public:
  ItemMemory(std::uint32_t dim, std::uint32_t n_features, std::uint32_t n_levels,
             FeatureStats stats, std::uint64_t seed);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t n_features() const noexcept { return static_cast<std::uint32_t>(position_hvs_.size()); }
  std::uint32_t n_levels() const noexcept { return static_cast<std::uint32_t>(level_hvs_.size()); }
  std::uint64_t seed() const noexcept { return seed_; }
  const FeatureStats& stats() const noexcept { return stats_; }

  const Hypervector& position(std::uint32_t feature) const { return position_hvs_[feature]; }
  const Hypervector& level(std::uint32_t level) const { return level_hvs_[level]; }

  // Deserialization entry: reassemble from stored parts instead of
  // regenerating from the seed.
  static ItemMemory from_parts(std::uint32_t dim, FeatureStats stats, std::uint64_t seed,
                               std::vector<Hypervector> position_hvs,
                               std::vector<Hypervector> level_hvs);

 private:
  ItemMemory() : dim_(0), seed_(0) {}
  std::uint32_t dim_;
  std::uint64_t seed_;
  FeatureStats stats_;
  std::vector<Hypervector> position_hvs_;
  std::vector<Hypervector> level_hvs_;
};

inline ItemMemory build_item_memory(std::uint32_t dim, std::uint32_t n_features,
                                    std::uint32_t n_levels, FeatureStats stats,
                                    std::uint64_t seed) {
  return ItemMemory(dim, n_features, n_levels, std::move(stats), seed);
}

// Uniform min-max binning: floor((value - min) / (max - min) * n_levels),
// clamped into [0, n_levels). Out-of-range values clamp; a constant feature
// (min == max) always maps to level 0.
std::uint32_t quantize(double value, std::uint32_t feature_index, const ItemMemory& im);

// Majority sign over bind(position_i, level(quantize(f_i))) across features.
// Deterministic given (features, item memory, tie rng state).
Hypervector encode(std::span<const double> features, const ItemMemory& im, Rng& tie_rng);

struct EncodedDataset {
  std::uint32_t dim = 0;
  std::vector<Hypervector> samples;
  std::vector<std::int32_t> labels;

  std::size_t size() const noexcept { return samples.size(); }
};

// Order-preserving batch encode. Each sample's tie rng is seeded from
// (seed, sample index), so the output is a pure function of inputs and does
// not depend on evaluation order.
EncodedDataset encode_dataset(const RawDataset& data, const ItemMemory& im, std::uint64_t seed);

}  // namespace hdc
