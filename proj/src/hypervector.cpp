#include "hdc/hypervector.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace hdc {

namespace {

std::size_t words_for(std::uint32_t dim) {
  return (static_cast<std::size_t>(dim) + Hypervector::kWordBits - 1) / Hypervector::kWordBits;
}

// Mask covering the valid bits of the final word; all-ones when dim is a
// multiple of the word size.
std::uint64_t tail_mask(std::uint32_t dim) {
  const std::uint32_t rem = dim % Hypervector::kWordBits;
  return rem == 0 ? ~0ULL : ((1ULL << rem) - 1);
}

void require_same_dim(const Hypervector& a, const Hypervector& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace

Hypervector::Hypervector(std::uint32_t dim) : dim_(dim), words_(words_for(dim), 0ULL) {
  if (dim == 0) throw std::invalid_argument("Hypervector: dim must be >= 1");
}

Hypervector Hypervector::all_plus_one(std::uint32_t dim) {
  Hypervector hv(dim);
  for (auto& w : hv.words_) w = ~0ULL;
  hv.words_.back() &= tail_mask(dim);
  return hv;
}

bool Hypervector::bit(std::uint32_t i) const {
  if (i >= dim_) throw std::out_of_range("Hypervector::bit: index out of range");
  return (words_[i / kWordBits] >> (i % kWordBits)) & 1ULL;
}

void Hypervector::set_bit(std::uint32_t i, bool plus_one) {
  if (i >= dim_) throw std::out_of_range("Hypervector::set_bit: index out of range");
  const std::uint64_t mask = 1ULL << (i % kWordBits);
  if (plus_one) {
    words_[i / kWordBits] |= mask;
  } else {
    words_[i / kWordBits] &= ~mask;
  }
}

void Hypervector::assign_words(std::span<const std::uint64_t> raw) {
  if (raw.size() != words_.size()) {
    throw std::invalid_argument("Hypervector::assign_words: word count mismatch");
  }
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] = raw[w];
  words_.back() &= tail_mask(dim_);
}

Hypervector Hypervector::complement() const {
  Hypervector out(dim_);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] = ~words_[w];
  out.words_.back() &= tail_mask(dim_);
  return out;
}

Hypervector random_hv(std::uint32_t dim, Rng& rng) {
  Hypervector hv(dim);
  std::vector<std::uint64_t> raw(hv.word_count());
  for (auto& w : raw) w = rng();
  hv.assign_words(raw);
  return hv;
}

Hamming hamming(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b, "hamming");
  std::uint64_t differing = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t w = 0; w < wa.size(); ++w) {
    differing += static_cast<std::uint64_t>(std::popcount(wa[w] ^ wb[w]));
  }
  return Hamming{differing, a.dim()};
}

double cosine_from_hamming(double h) {
  if (!(h >= 0.0 && h <= 1.0)) {
    throw std::invalid_argument("cosine_from_hamming: h must lie in [0, 1]");
  }
  return 1.0 - 2.0 * h;
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b, "bind");
  Hypervector out(a.dim());
  std::vector<std::uint64_t> raw(out.word_count());
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t w = 0; w < raw.size(); ++w) raw[w] = ~(wa[w] ^ wb[w]);
  out.assign_words(raw);
  return out;
}

std::int64_t bipolar_dot(const Hypervector& a, const Hypervector& b) {
  const Hamming h = hamming(a, b);
  return static_cast<std::int64_t>(h.dim) - 2 * static_cast<std::int64_t>(h.differing);
}

Accumulator::Accumulator(std::uint32_t dim) : dim_(dim), counts_(dim, 0) {
  if (dim == 0) throw std::invalid_argument("Accumulator: dim must be >= 1");
}

void Accumulator::add(const Hypervector& hv) {
  if (hv.dim() != dim_) throw std::invalid_argument("Accumulator::add: dimension mismatch");
  const auto words = hv.words();
  for (std::uint32_t i = 0; i < dim_; ++i) {
    const std::uint64_t bit = (words[i / Hypervector::kWordBits] >> (i % Hypervector::kWordBits)) & 1ULL;
    counts_[i] += bit ? 1 : -1;
  }
  ++accumulated_;
}

Hypervector binarize_sign(const Accumulator& acc, Rng& rng) {
  Hypervector out(acc.dim());
  const auto counts = acc.counts();
  for (std::uint32_t i = 0; i < acc.dim(); ++i) {
    bool plus_one;
    if (counts[i] > 0) {
      plus_one = true;
    } else if (counts[i] < 0) {
      plus_one = false;
    } else {
      plus_one = random_sign_bit(rng);
    }
    out.set_bit(i, plus_one);
  }
  return out;
}

}  // namespace hdc
