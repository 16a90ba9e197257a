#pragma once

// Naive per-element ±1 reference implementations. These are the oracles the
// bit-packed kernels are tested against: every operation is spelled out on
// int vectors with no word tricks. Tie-breaking draws follow the library
// contract (one draw per zero, ascending dimension order) so seeded streams
// can be compared draw for draw.

#include <cstdint>
#include <span>
#include <vector>

#include "hdc/encoder.hpp"
#include "hdc/hypervector.hpp"
#include "hdc/rng.hpp"

namespace ref {

using Bipolar = std::vector<int>;  // entries are +1 or -1

inline Bipolar from_packed(const hdc::Hypervector& hv) {
  Bipolar v(hv.dim());
  for (std::uint32_t i = 0; i < hv.dim(); ++i) v[i] = hv.bit(i) ? 1 : -1;
  return v;
}

inline hdc::Hypervector to_packed(const Bipolar& v) {
  hdc::Hypervector hv(static_cast<std::uint32_t>(v.size()));
  for (std::uint32_t i = 0; i < v.size(); ++i) hv.set_bit(i, v[i] > 0);
  return hv;
}

inline Bipolar random_bipolar(std::size_t dim, hdc::Rng& rng) {
  Bipolar v(dim);
  for (auto& e : v) e = hdc::random_sign_bit(rng) ? 1 : -1;
  return v;
}

inline Bipolar bind(const Bipolar& a, const Bipolar& b) {
  Bipolar c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
  return c;
}

inline std::uint64_t differing(const Bipolar& a, const Bipolar& b) {
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) count += a[i] != b[i];
  return count;
}

inline double hamming(const Bipolar& a, const Bipolar& b) {
  return static_cast<double>(differing(a, b)) / static_cast<double>(a.size());
}

inline long long dot(const Bipolar& a, const Bipolar& b) {
  long long sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline std::vector<long long> accumulate(const std::vector<Bipolar>& hvs) {
  std::vector<long long> counts(hvs.front().size(), 0);
  for (const auto& hv : hvs) {
    for (std::size_t i = 0; i < hv.size(); ++i) counts[i] += hv[i];
  }
  return counts;
}

inline Bipolar sign(const std::vector<long long>& counts, hdc::Rng& rng) {
  Bipolar v(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) {
      v[i] = 1;
    } else if (counts[i] < 0) {
      v[i] = -1;
    } else {
      v[i] = hdc::random_sign_bit(rng) ? 1 : -1;
    }
  }
  return v;
}

// Independent restatement of the uniform min-max binning rule.
inline std::uint32_t quantize(double value, double lo, double hi, std::uint32_t n_levels) {
  if (lo >= hi) return 0;
  const double width = (hi - lo) / static_cast<double>(n_levels);
  std::uint32_t level = 0;
  // Walk the bins instead of dividing; clamp at the ends.
  while (level + 1 < n_levels && value >= lo + width * static_cast<double>(level + 1)) ++level;
  if (value < lo) level = 0;
  return level;
}

inline Bipolar encode(std::span<const double> features, const hdc::ItemMemory& im,
                      hdc::Rng& tie_rng) {
  std::vector<long long> counts(im.dim(), 0);
  for (std::uint32_t f = 0; f < im.n_features(); ++f) {
    const std::uint32_t q = quantize(features[f], im.stats().min_values[f],
                                     im.stats().max_values[f], im.n_levels());
    const Bipolar pos = from_packed(im.position(f));
    const Bipolar lev = from_packed(im.level(q));
    for (std::uint32_t i = 0; i < im.dim(); ++i) counts[i] += pos[i] * lev[i];
  }
  return sign(counts, tie_rng);
}

// Argmin of per-bit mismatch counts; ties go to the lowest index.
inline int predict(const Bipolar& x, const std::vector<Bipolar>& classes) {
  int best = 0;
  std::uint64_t best_differing = differing(x, classes[0]);
  for (std::size_t k = 1; k < classes.size(); ++k) {
    const std::uint64_t d = differing(x, classes[k]);
    if (d < best_differing) {
      best_differing = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace ref
