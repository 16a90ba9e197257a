#pragma once

// Seeded random streams. Every random draw in the library flows through an
// explicitly passed Rng, never global state, so outputs are reproducible.
// Helper draws are hand-rolled on raw 64-bit words: std::distribution
// internals differ across standard libraries, raw mt19937_64 words do not.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace hdc {

using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to spread structured seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for substream `stream` of `base`. Per-sample / per-epoch / per-class
// streams are derived this way so results do not depend on processing order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x517cc1b727220a95ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform sign draw; true means +1.
inline bool random_sign_bit(Rng& rng) { return (rng() & 1ULL) != 0; }

// Uniform double in [0, 1) with 53 random bits.
inline double random_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound). bound must be nonzero. The modulo bias is
// below 2^-50 for every bound used here (shuffles, index picks).
inline std::uint64_t random_below(Rng& rng, std::uint64_t bound) {
  return rng() % bound;
}

// Fisher-Yates shuffle with draws specified above, identical on every platform.
template <typename T>
void shuffle_values(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(random_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace hdc
