#include "hdc/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hdc {

namespace {

std::uint64_t tail_mask(std::uint32_t dim) {
  const std::uint32_t rem = dim % Hypervector::kWordBits;
  return rem == 0 ? ~0ULL : ((1ULL << rem) - 1);
}

}  // namespace

FeatureStats fit_stats(const RawDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("fit_stats: empty dataset");
  if (data.n_features == 0) throw std::invalid_argument("fit_stats: dataset has no features");
  if (data.features.size() != data.size() * data.n_features) {
    throw std::invalid_argument("fit_stats: inconsistent feature counts");
  }
  FeatureStats stats;
  stats.min_values.assign(data.row(0).begin(), data.row(0).end());
  stats.max_values = stats.min_values;
  for (std::size_t s = 1; s < data.size(); ++s) {
    const auto row = data.row(s);
    for (std::uint32_t f = 0; f < data.n_features; ++f) {
      stats.min_values[f] = std::min(stats.min_values[f], row[f]);
      stats.max_values[f] = std::max(stats.max_values[f], row[f]);
    }
  }
  return stats;
}

ItemMemory::ItemMemory(std::uint32_t dim, std::uint32_t n_features, std::uint32_t n_levels,
                       FeatureStats stats, std::uint64_t seed)
    : dim_(dim), seed_(seed), stats_(std::move(stats)) {
  if (n_levels < 2) throw std::invalid_argument("ItemMemory: need at least 2 levels");
  if (dim < n_levels) throw std::invalid_argument("ItemMemory: dim must be >= n_levels");
  if (n_features == 0) throw std::invalid_argument("ItemMemory: need at least 1 feature");
  if (stats_.n_features() != n_features || stats_.max_values.size() != n_features) {
    throw std::invalid_argument("ItemMemory: stats cover a different feature count");
  }
  for (std::uint32_t f = 0; f < n_features; ++f) {
    if (!(stats_.min_values[f] <= stats_.max_values[f])) {
      throw std::invalid_argument("ItemMemory: stats min > max for feature " + std::to_string(f));
    }
  }

  Rng pos_rng = make_rng(derive_seed(seed, 0));
  position_hvs_.reserve(n_features);
  for (std::uint32_t f = 0; f < n_features; ++f) position_hvs_.push_back(random_hv(dim, pos_rng));

  // Level chain: flipping disjoint slices of a fixed floor(dim/2)-position set
  // makes hamming(level a, level b) exactly (slice span)/dim, linear in |a-b|.
  Rng lev_rng = make_rng(derive_seed(seed, 1));
  level_hvs_.reserve(n_levels);
  level_hvs_.push_back(random_hv(dim, lev_rng));
  std::vector<std::uint32_t> flip_order(dim);
  std::iota(flip_order.begin(), flip_order.end(), 0u);
  shuffle_values(flip_order, lev_rng);
  const std::uint64_t total_flips = dim / 2;
  for (std::uint32_t l = 0; l + 1 < n_levels; ++l) {
    const std::uint64_t lo = total_flips * l / (n_levels - 1);
    const std::uint64_t hi = total_flips * (l + 1) / (n_levels - 1);
    Hypervector next = level_hvs_.back();
    for (std::uint64_t j = lo; j < hi; ++j) {
      const std::uint32_t pos = flip_order[j];
      next.set_bit(pos, !next.bit(pos));
    }
    level_hvs_.push_back(std::move(next));
  }
}

ItemMemory ItemMemory::from_parts(std::uint32_t dim, FeatureStats stats, std::uint64_t seed,
                                  std::vector<Hypervector> position_hvs,
                                  std::vector<Hypervector> level_hvs) {
  if (position_hvs.empty()) throw std::invalid_argument("ItemMemory: no position hypervectors");
  if (level_hvs.size() < 2) throw std::invalid_argument("ItemMemory: need at least 2 levels");
  if (stats.n_features() != position_hvs.size() || stats.max_values.size() != position_hvs.size()) {
    throw std::invalid_argument("ItemMemory: stats cover a different feature count");
  }
  for (const auto& hv : position_hvs) {
    if (hv.dim() != dim) throw std::invalid_argument("ItemMemory: position dim mismatch");
  }
  for (const auto& hv : level_hvs) {
    if (hv.dim() != dim) throw std::invalid_argument("ItemMemory: level dim mismatch");
  }
  for (std::size_t f = 0; f < stats.n_features(); ++f) {
    if (!(stats.min_values[f] <= stats.max_values[f])) {
      throw std::invalid_argument("ItemMemory: stats min > max for feature " + std::to_string(f));
    }
  }
  ItemMemory im;
  im.dim_ = dim;
  im.seed_ = seed;
  im.stats_ = std::move(stats);
  im.position_hvs_ = std::move(position_hvs);
  im.level_hvs_ = std::move(level_hvs);
  return im;
}

std::uint32_t quantize(double value, std::uint32_t feature_index, const ItemMemory& im) {
  const double lo = im.stats().min_values[feature_index];
  const double hi = im.stats().max_values[feature_index];
  const std::uint32_t q = im.n_levels();
  if (!(hi > lo)) return 0;
  const double scaled = std::floor((value - lo) / (hi - lo) * static_cast<double>(q));
  if (!(scaled > 0.0)) return 0;
  if (scaled >= static_cast<double>(q)) return q - 1;
  return static_cast<std::uint32_t>(scaled);
}

// Bundling via bit-plane counters: planes[p] holds bit p of the per-position
// running count of +1 bits, so each feature costs one ripple-carry add over
// whole words instead of a per-bit loop.
Hypervector encode(std::span<const double> features, const ItemMemory& im, Rng& tie_rng) {
  const std::uint32_t n = im.n_features();
  if (features.size() != n) {
    throw std::invalid_argument("encode: expected " + std::to_string(n) + " features, got " +
                                std::to_string(features.size()));
  }
  const std::uint32_t dim = im.dim();
  const std::size_t n_words = (static_cast<std::size_t>(dim) + 63) / 64;
  const std::uint32_t n_planes = std::bit_width(n);  // counts never exceed n

  std::vector<std::vector<std::uint64_t>> planes(n_planes,
                                                 std::vector<std::uint64_t>(n_words, 0));
  std::vector<std::uint64_t> carry(n_words);
  const std::uint64_t tail = tail_mask(dim);

  for (std::uint32_t f = 0; f < n; ++f) {
    const std::uint32_t level = quantize(features[f], f, im);
    const auto pos = im.position(f).words();
    const auto lev = im.level(level).words();
    for (std::size_t w = 0; w < n_words; ++w) carry[w] = ~(pos[w] ^ lev[w]);
    carry[n_words - 1] &= tail;
    for (std::uint32_t p = 0; p < n_planes; ++p) {
      std::uint64_t any = 0;
      std::uint64_t* plane = planes[p].data();
      for (std::size_t w = 0; w < n_words; ++w) {
        const std::uint64_t c = plane[w] & carry[w];
        plane[w] ^= carry[w];
        carry[w] = c;
        any |= c;
      }
      if (!any) break;
    }
  }

  // count = 2*ones - n; sign threshold on ones vs n, ties drawn in ascending
  // dimension order (same contract as binarize_sign).
  Hypervector out(dim);
  std::vector<std::uint64_t> raw(n_words, 0);
  std::vector<std::uint64_t> local(n_planes);
  for (std::size_t w = 0; w < n_words; ++w) {
    for (std::uint32_t p = 0; p < n_planes; ++p) local[p] = planes[p][w];
    const std::uint32_t bits = static_cast<std::uint32_t>(
        std::min<std::size_t>(64, dim - w * 64));
    std::uint64_t word = 0;
    for (std::uint32_t j = 0; j < bits; ++j) {
      std::uint32_t ones = 0;
      for (std::uint32_t p = 0; p < n_planes; ++p) {
        ones |= static_cast<std::uint32_t>((local[p] >> j) & 1ULL) << p;
      }
      bool plus_one;
      if (2 * ones > n) {
        plus_one = true;
      } else if (2 * ones < n) {
        plus_one = false;
      } else {
        plus_one = random_sign_bit(tie_rng);
      }
      word |= static_cast<std::uint64_t>(plus_one) << j;
    }
    raw[w] = word;
  }
  out.assign_words(raw);
  return out;
}

EncodedDataset encode_dataset(const RawDataset& data, const ItemMemory& im, std::uint64_t seed) {
  if (data.size() == 0) {
    throw std::invalid_argument("encode_dataset: empty dataset");
  }
  if (data.n_features != im.n_features()) {
    throw std::invalid_argument("encode_dataset: dataset has " + std::to_string(data.n_features) +
                                " features, item memory expects " +
                                std::to_string(im.n_features()));
  }
  EncodedDataset out;
  out.dim = im.dim();
  out.samples.reserve(data.size());
  out.labels = data.labels;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Rng tie_rng = make_rng(derive_seed(seed, i));
    out.samples.push_back(encode(data.row(i), im, tie_rng));
  }
  return out;
}

}  // namespace hdc
