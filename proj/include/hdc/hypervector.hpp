#pragma once

// Bit-packed bipolar hypervectors and the integer algebra everything else is
// built on: binding, bundling accumulation, Hamming distance, sign
// binarization.
//
// Bit convention: stored bit 1 means +1, stored bit 0 means -1. Under that
// convention the element-wise bipolar product (binding) is XNOR and the
// all-ones word pattern is the binding identity. Words past the dimension are
// kept at 0 so popcounts over whole words are exact.

#include <cstdint>
#include <span>
#include <vector>

#include "hdc/rng.hpp"

namespace hdc {

class Hypervector {
 public:
  static constexpr std::uint32_t kWordBits = 64;

  // All bits 0, i.e. bipolar all -1.
  explicit Hypervector(std::uint32_t dim);

  // Binding identity: all elements +1.
  static Hypervector all_plus_one(std::uint32_t dim);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t word_count() const noexcept { return words_.size(); }
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  bool bit(std::uint32_t i) const;  // true <=> +1
  void set_bit(std::uint32_t i, bool plus_one);
  int bipolar(std::uint32_t i) const { return bit(i) ? 1 : -1; }

  // Bulk word load (deserialization); tail bits beyond dim are cleared.
  void assign_words(std::span<const std::uint64_t> raw);

  // Element-wise negation.
  Hypervector complement() const;

  friend bool operator==(const Hypervector&, const Hypervector&) = default;

 private:
  std::uint32_t dim_;
  std::vector<std::uint64_t> words_;  // invariant: bits >= dim_ are 0
};

// Exact rational Hamming distance: differing positions over dimension.
struct Hamming {
  std::uint64_t differing = 0;
  std::uint32_t dim = 0;
  double normalized() const noexcept {
    return dim == 0 ? 0.0 : static_cast<double>(differing) / static_cast<double>(dim);
  }
};

// Each bit independently uniform. Words are drawn straight from the Rng, so
// equal seeds give identical hypervectors.
Hypervector random_hv(std::uint32_t dim, Rng& rng);

// Normalized Hamming distance as an exact count/dim pair.
Hamming hamming(const Hypervector& a, const Hypervector& b);

// cosine = 1 - 2 * h for h in [0, 1].
double cosine_from_hamming(double h);

// Element-wise bipolar product (XNOR in bit form). bind(x, x) is all +1.
Hypervector bind(const Hypervector& a, const Hypervector& b);

// Integer inner product of the bipolar views: dim - 2 * differing.
std::int64_t bipolar_dot(const Hypervector& a, const Hypervector& b);

// Element-wise running sum of bipolar values. |counts[i]| never exceeds the
// number of accumulated hypervectors.
class Accumulator {
 public:
  explicit Accumulator(std::uint32_t dim);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint64_t accumulated() const noexcept { return accumulated_; }

  // counts[i] += hv.bipolar(i)
  void add(const Hypervector& hv);

  std::int32_t count(std::uint32_t i) const { return counts_[i]; }
  std::span<const std::int32_t> counts() const noexcept { return counts_; }

 private:
  std::uint32_t dim_;
  std::uint64_t accumulated_ = 0;
  std::vector<std::int32_t> counts_;
};

// Majority sign: bit i is +1 when counts[i] > 0, -1 when counts[i] < 0, and a
// fresh uniform sign from rng when counts[i] == 0. Zero counts are resolved
// in ascending dimension order, one draw each; that consumption order is part
// of the contract so callers can reproduce results.
Hypervector binarize_sign(const Accumulator& acc, Rng& rng);

}  // namespace hdc
