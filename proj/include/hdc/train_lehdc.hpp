#pragma once

// Learned trainer: the binary model viewed as one wide single-layer binary
// network. Real-valued latent weights accumulate adaptive-moment gradient
// steps of a softmax cross-entropy loss with L2 weight decay and input
// dropout; the sign of the latent matrix is the binary model and is what
// forward passes use (straight-through binarization).

#include <cstdint>
#include <span>
#include <vector>

#include "hdc/classifier.hpp"
#include "hdc/encoder.hpp"
#include "hdc/run_metrics.hpp"

namespace hdc {

struct LeHDCConfig {
  double weight_decay = 0.05;
  double learning_rate = 0.01;
  std::uint32_t batch_size = 64;
  double dropout_rate = 0.5;
  std::uint32_t epochs = 100;
  double lr_decay_factor = 0.5;  // applied when epoch loss rises, once per epoch
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double validation_fraction = 0.1;  // stratified; 0 selects on training accuracy
  std::uint64_t seed = 1;
  bool warm_start = true;   // initialize latents from averaging-based counts
  double latent_clip = 1.0;
};

// Latent real matrix (dim x classes, dimension-major) plus its binary view.
// Sign convention: latent >= 0 maps to +1.
class LatentWeights {
 public:
  LatentWeights(std::uint32_t dim, std::uint32_t n_classes);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t n_classes() const noexcept { return n_classes_; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double at(std::uint32_t i, std::uint32_t k) const { return values_[std::size_t(i) * n_classes_ + k]; }
  void set(std::uint32_t i, std::uint32_t k, double v) { values_[std::size_t(i) * n_classes_ + k] = v; }

  // Recompute the binary view from the current latents.
  void refresh_binary();

  const std::vector<Hypervector>& binary_classes() const noexcept { return binary_; }
  ClassModel to_class_model(ModelMeta meta = {}) const;

 private:
  std::uint32_t dim_;
  std::uint32_t n_classes_;
  std::vector<double> values_;     // dim-major, size dim * n_classes
  std::vector<Hypervector> binary_;
};

struct OptimizerState {
  std::vector<double> m;  // first moment, dim-major
  std::vector<double> v;  // second moment
  std::uint64_t step = 0;

  explicit OptimizerState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// Input dropout mask: bit set = dimension kept; survivors are scaled by
// 1/(1-rate) so the expected masked input equals the input.
struct DropoutMask {
  std::uint32_t dim = 0;
  double scale = 1.0;
  std::vector<std::uint64_t> keep_words;  // tail bits zero
  std::uint64_t kept = 0;

  bool keeps(std::uint32_t i) const {
    return (keep_words[i / 64] >> (i % 64)) & 1ULL;
  }
};

DropoutMask full_mask(std::uint32_t dim);
DropoutMask sample_dropout_mask(std::uint32_t dim, double rate, Rng& rng);

// o[b * K + k] = sum_i x_bi * mask_i * weights[i * K + k]. `weights` is any
// real dim x classes matrix (dimension-major).
std::vector<double> forward_logits(std::span<const Hypervector> batch,
                                   std::span<const double> weights,
                                   std::uint32_t n_classes, const DropoutMask& mask);

// Same contract with a binary class view; computed on packed words.
std::vector<double> forward_logits(std::span<const Hypervector> batch,
                                   const std::vector<Hypervector>& class_bits,
                                   const DropoutMask& mask);

// Row-wise max-subtracted softmax over rows of length n_classes.
std::vector<double> softmax_rows(std::span<const double> logits, std::uint32_t n_classes);

// Mean cross-entropy of softmax(logits) against labels, plus
// weight_decay / 2 * ||latent||^2. Non-finite logits raise NumericError.
double loss(std::span<const double> logits, std::span<const std::int32_t> labels,
            std::uint32_t n_classes, std::span<const double> latent, double weight_decay);

// Gradient of the loss with respect to the latents under the
// straight-through convention: probabilities are computed by forwarding with
// `forward_weights` (the binary view during training; pass the latents
// themselves for a fully relaxed gradient), the binarization backpropagates
// as identity, and the decay term differentiates against `latent`.
// Entry (i, k) = mean over the batch of (softmax_k - onehot_k) * x_i * mask_i,
// plus weight_decay * latent[i, k].
std::vector<double> gradient(std::span<const Hypervector> batch,
                             std::span<const std::int32_t> labels,
                             std::span<const double> forward_weights,
                             std::span<const double> latent, std::uint32_t n_classes,
                             double weight_decay, const DropoutMask& mask);

// Bias-corrected adaptive-moment step, then clip latents to [-clip, clip].
void adam_step(OptimizerState& state, std::span<const double> grad,
               std::span<double> latent, double lr, double beta1, double beta2,
               double eps, double clip);

struct LeHDCTrainResult {
  ClassModel model;
  RunMetrics metrics;
};

// Full training loop: stratified validation split, latent warm start from
// averaging counts (or small uniform values), shuffled mini-batches with a
// fresh dropout mask each, adaptive-moment steps with latent clipping, binary
// view refreshed every step, learning rate halved after any epoch whose loss
// rose. Returns the binary snapshot with the best validation accuracy (best
// training accuracy when validation_fraction is 0), considering the initial
// model and every epoch end; earliest wins ties. Deterministic in
// (data, n_classes, cfg).
LeHDCTrainResult train_lehdc(const EncodedDataset& data, std::uint32_t n_classes,
                             const LeHDCConfig& cfg);

}  // namespace hdc
