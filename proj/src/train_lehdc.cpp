#include "hdc/train_lehdc.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hdc/errors.hpp"
#include "hdc/format.hpp"
#include "hdc/train_classic.hpp"
#include "hdc/version.hpp"

namespace hdc {

namespace {

std::uint64_t tail_mask(std::uint32_t dim) {
  const std::uint32_t rem = dim % 64;
  return rem == 0 ? ~0ULL : ((1ULL << rem) - 1);
}

void check_batch(std::span<const Hypervector> batch, std::uint32_t dim) {
  for (const auto& hv : batch) {
    if (hv.dim() != dim) throw std::invalid_argument("forward_logits: sample dim mismatch");
  }
}

}  // namespace

LatentWeights::LatentWeights(std::uint32_t dim, std::uint32_t n_classes)
    : dim_(dim), n_classes_(n_classes),
      values_(static_cast<std::size_t>(dim) * n_classes, 0.0) {
  if (dim == 0) throw std::invalid_argument("LatentWeights: dim must be >= 1");
  if (n_classes == 0) throw std::invalid_argument("LatentWeights: need at least 1 class");
  refresh_binary();
}

void LatentWeights::refresh_binary() {
  binary_.clear();
  binary_.reserve(n_classes_);
  const std::size_t n_words = (static_cast<std::size_t>(dim_) + 63) / 64;
  std::vector<std::uint64_t> raw(n_words);
  for (std::uint32_t k = 0; k < n_classes_; ++k) {
    std::fill(raw.begin(), raw.end(), 0ULL);
    for (std::uint32_t i = 0; i < dim_; ++i) {
      if (values_[static_cast<std::size_t>(i) * n_classes_ + k] >= 0.0) {
        raw[i / 64] |= 1ULL << (i % 64);
      }
    }
    Hypervector hv(dim_);
    hv.assign_words(raw);
    binary_.push_back(std::move(hv));
  }
}

ClassModel LatentWeights::to_class_model(ModelMeta meta) const {
  return ClassModel(dim_, binary_, meta);
}

DropoutMask full_mask(std::uint32_t dim) {
  DropoutMask mask;
  mask.dim = dim;
  mask.scale = 1.0;
  mask.kept = dim;
  mask.keep_words.assign((static_cast<std::size_t>(dim) + 63) / 64, ~0ULL);
  mask.keep_words.back() &= tail_mask(dim);
  return mask;
}

DropoutMask sample_dropout_mask(std::uint32_t dim, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("sample_dropout_mask: rate must lie in [0, 1)");
  }
  if (rate == 0.0) return full_mask(dim);
  DropoutMask mask;
  mask.dim = dim;
  mask.scale = 1.0 / (1.0 - rate);
  mask.keep_words.assign((static_cast<std::size_t>(dim) + 63) / 64, 0ULL);
  for (std::uint32_t i = 0; i < dim; ++i) {
    if (random_unit(rng) >= rate) {
      mask.keep_words[i / 64] |= 1ULL << (i % 64);
      ++mask.kept;
    }
  }
  return mask;
}

std::vector<double> forward_logits(std::span<const Hypervector> batch,
                                   std::span<const double> weights,
                                   std::uint32_t n_classes, const DropoutMask& mask) {
  check_batch(batch, mask.dim);
  if (weights.size() != static_cast<std::size_t>(mask.dim) * n_classes) {
    throw std::invalid_argument("forward_logits: weight matrix shape mismatch");
  }
  std::vector<double> out(batch.size() * n_classes, 0.0);
  std::vector<double> acc(n_classes);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const auto xw = batch[b].words();
    for (std::size_t w = 0; w < xw.size(); ++w) {
      std::uint64_t keep = mask.keep_words[w];
      while (keep) {
        const std::uint32_t j = static_cast<std::uint32_t>(std::countr_zero(keep));
        keep &= keep - 1;
        const std::size_t i = w * 64 + j;
        const double* row = &weights[i * n_classes];
        if ((xw[w] >> j) & 1ULL) {
          for (std::uint32_t k = 0; k < n_classes; ++k) acc[k] += row[k];
        } else {
          for (std::uint32_t k = 0; k < n_classes; ++k) acc[k] -= row[k];
        }
      }
    }
    for (std::uint32_t k = 0; k < n_classes; ++k) out[b * n_classes + k] = mask.scale * acc[k];
  }
  return out;
}

std::vector<double> forward_logits(std::span<const Hypervector> batch,
                                   const std::vector<Hypervector>& class_bits,
                                   const DropoutMask& mask) {
  check_batch(batch, mask.dim);
  if (class_bits.empty()) throw std::invalid_argument("forward_logits: no classes");
  for (const auto& hv : class_bits) {
    if (hv.dim() != mask.dim) throw std::invalid_argument("forward_logits: class dim mismatch");
  }
  const std::uint32_t n_classes = static_cast<std::uint32_t>(class_bits.size());
  std::vector<double> out(batch.size() * n_classes);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto xw = batch[b].words();
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      const auto cw = class_bits[k].words();
      std::uint64_t differing = 0;
      for (std::size_t w = 0; w < xw.size(); ++w) {
        differing += static_cast<std::uint64_t>(
            std::popcount((xw[w] ^ cw[w]) & mask.keep_words[w]));
      }
      // Sum over kept dims of x_i * c_i = kept - 2 * differing, exactly.
      out[b * n_classes + k] =
          mask.scale * static_cast<double>(static_cast<std::int64_t>(mask.kept) -
                                           2 * static_cast<std::int64_t>(differing));
    }
  }
  return out;
}

std::vector<double> softmax_rows(std::span<const double> logits, std::uint32_t n_classes) {
  if (n_classes == 0 || logits.size() % n_classes != 0) {
    throw std::invalid_argument("softmax_rows: logits not divisible into rows");
  }
  std::vector<double> probs(logits.size());
  const std::size_t rows = logits.size() / n_classes;
  for (std::size_t b = 0; b < rows; ++b) {
    const double* row = &logits[b * n_classes];
    double row_max = row[0];
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      if (!std::isfinite(row[k])) throw NumericError("softmax_rows: non-finite logit");
      row_max = std::max(row_max, row[k]);
    }
    double sum = 0.0;
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      const double e = std::exp(row[k] - row_max);
      probs[b * n_classes + k] = e;
      sum += e;
    }
    for (std::uint32_t k = 0; k < n_classes; ++k) probs[b * n_classes + k] /= sum;
  }
  return probs;
}

double loss(std::span<const double> logits, std::span<const std::int32_t> labels,
            std::uint32_t n_classes, std::span<const double> latent, double weight_decay) {
  if (labels.empty() || logits.size() != labels.size() * n_classes) {
    throw std::invalid_argument("loss: logits/labels shape mismatch");
  }
  double ce = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const std::int32_t y = labels[b];
    if (y < 0 || static_cast<std::uint32_t>(y) >= n_classes) {
      throw std::invalid_argument("loss: label outside [0, n_classes)");
    }
    const double* row = &logits[b * n_classes];
    double row_max = row[0];
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      if (!std::isfinite(row[k])) throw NumericError("loss: non-finite logit");
      row_max = std::max(row_max, row[k]);
    }
    double sum = 0.0;
    for (std::uint32_t k = 0; k < n_classes; ++k) sum += std::exp(row[k] - row_max);
    ce += std::log(sum) - (row[y] - row_max);
  }
  double sq = 0.0;
  for (const double v : latent) sq += v * v;
  return ce / static_cast<double>(labels.size()) + 0.5 * weight_decay * sq;
}

namespace {

// Data term of the gradient, dim-major, without the decay term:
// grad[i*K + k] += mean_b (p_bk - y_bk) * x_bi * mask_i * scale.
void accumulate_data_grad(std::span<const Hypervector> batch,
                          std::span<const std::int32_t> labels,
                          std::span<const double> probs, std::uint32_t n_classes,
                          const DropoutMask& mask, double* grad) {
  const double inv_batch = mask.scale / static_cast<double>(batch.size());
  std::vector<double> delta(n_classes);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      const double onehot = labels[b] == static_cast<std::int32_t>(k) ? 1.0 : 0.0;
      delta[k] = (probs[b * n_classes + k] - onehot) * inv_batch;
    }
    const auto xw = batch[b].words();
    for (std::size_t w = 0; w < xw.size(); ++w) {
      std::uint64_t keep = mask.keep_words[w];
      while (keep) {
        const std::uint32_t j = static_cast<std::uint32_t>(std::countr_zero(keep));
        keep &= keep - 1;
        double* g = grad + (w * 64 + j) * n_classes;
        if ((xw[w] >> j) & 1ULL) {
          for (std::uint32_t k = 0; k < n_classes; ++k) g[k] += delta[k];
        } else {
          for (std::uint32_t k = 0; k < n_classes; ++k) g[k] -= delta[k];
        }
      }
    }
  }
}

}  // namespace

std::vector<double> gradient(std::span<const Hypervector> batch,
                             std::span<const std::int32_t> labels,
                             std::span<const double> forward_weights,
                             std::span<const double> latent, std::uint32_t n_classes,
                             double weight_decay, const DropoutMask& mask) {
  if (batch.size() != labels.size() || batch.empty()) {
    throw std::invalid_argument("gradient: batch/labels size mismatch");
  }
  if (latent.size() != static_cast<std::size_t>(mask.dim) * n_classes) {
    throw std::invalid_argument("gradient: latent shape mismatch");
  }
  const std::vector<double> logits = forward_logits(batch, forward_weights, n_classes, mask);
  const std::vector<double> probs = softmax_rows(logits, n_classes);
  std::vector<double> grad(latent.size(), 0.0);
  accumulate_data_grad(batch, labels, probs, n_classes, mask, grad.data());
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += weight_decay * latent[j];
  return grad;
}

void adam_step(OptimizerState& state, std::span<const double> grad,
               std::span<double> latent, double lr, double beta1, double beta2,
               double eps, double clip) {
  if (grad.size() != latent.size() || state.m.size() != latent.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t j = 0; j < latent.size(); ++j) {
    const double g = grad[j];
    state.m[j] = beta1 * state.m[j] + (1.0 - beta1) * g;
    state.v[j] = beta2 * state.v[j] + (1.0 - beta2) * g * g;
    const double m_hat = state.m[j] / bc1;
    const double v_hat = state.v[j] / bc2;
    latent[j] = std::clamp(latent[j] - lr * m_hat / (std::sqrt(v_hat) + eps), -clip, clip);
  }
}

namespace {

void check_lehdc_config(const LeHDCConfig& cfg) {
  if (!(cfg.weight_decay >= 0.0)) throw std::invalid_argument("train_lehdc: weight_decay < 0");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train_lehdc: learning_rate <= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("train_lehdc: batch_size < 1");
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) {
    throw std::invalid_argument("train_lehdc: dropout_rate outside [0, 1)");
  }
  if (!(cfg.lr_decay_factor > 0.0 && cfg.lr_decay_factor <= 1.0)) {
    throw std::invalid_argument("train_lehdc: lr_decay_factor outside (0, 1]");
  }
  if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0) ||
      !(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0)) {
    throw std::invalid_argument("train_lehdc: adam betas outside [0, 1)");
  }
  if (!(cfg.adam_eps > 0.0)) throw std::invalid_argument("train_lehdc: adam_eps <= 0");
  if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0)) {
    throw std::invalid_argument("train_lehdc: validation_fraction outside [0, 1)");
  }
  if (!(cfg.latent_clip > 0.0)) throw std::invalid_argument("train_lehdc: latent_clip <= 0");
}

double subset_accuracy(const EncodedDataset& data, const std::vector<std::uint32_t>& idx,
                       const ClassModel& model) {
  std::uint64_t correct = 0;
  for (const std::uint32_t i : idx) {
    if (predict(data.samples[i], model).label == data.labels[i]) ++correct;
  }
  return idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(idx.size());
}

}  // namespace

LeHDCTrainResult train_lehdc(const EncodedDataset& data, std::uint32_t n_classes,
                             const LeHDCConfig& cfg) {
  check_lehdc_config(cfg);
  if (data.size() == 0) throw std::invalid_argument("train_lehdc: empty dataset");
  if (n_classes < 2) throw std::invalid_argument("train_lehdc: need at least 2 classes");
  const std::uint32_t dim = data.dim;

  std::vector<std::vector<std::uint32_t>> by_class(n_classes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::int32_t label = data.labels[i];
    if (label < 0 || static_cast<std::uint32_t>(label) >= n_classes) {
      throw std::invalid_argument("train_lehdc: label outside [0, n_classes)");
    }
    by_class[label].push_back(static_cast<std::uint32_t>(i));
  }
  for (std::uint32_t k = 0; k < n_classes; ++k) {
    if (by_class[k].empty()) {
      throw std::invalid_argument("train_lehdc: class " + std::to_string(k) + " has no samples");
    }
  }

  // Stratified validation split; floor() keeps at least one training sample
  // per class since validation_fraction < 1.
  const std::uint64_t split_base = derive_seed(cfg.seed, 1);
  std::vector<std::uint32_t> train_idx;
  std::vector<std::uint32_t> val_idx;
  for (std::uint32_t k = 0; k < n_classes; ++k) {
    auto& members = by_class[k];
    const std::size_t n_val =
        static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(members.size()));
    if (n_val > 0) {
      Rng class_rng = make_rng(derive_seed(split_base, k));
      shuffle_values(members, class_rng);
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
      (j < n_val ? val_idx : train_idx).push_back(members[j]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  const bool use_val = !val_idx.empty();

  LatentWeights latent(dim, n_classes);
  if (cfg.warm_start) {
    std::vector<Accumulator> acc;
    acc.reserve(n_classes);
    for (std::uint32_t k = 0; k < n_classes; ++k) acc.emplace_back(dim);
    for (const std::uint32_t i : train_idx) acc[data.labels[i]].add(data.samples[i]);
    std::int64_t max_abs = 0;
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      for (const std::int32_t c : acc[k].counts()) {
        max_abs = std::max<std::int64_t>(max_abs, c < 0 ? -static_cast<std::int64_t>(c) : c);
      }
    }
    if (max_abs > 0) {
      for (std::uint32_t k = 0; k < n_classes; ++k) {
        const auto counts = acc[k].counts();
        for (std::uint32_t i = 0; i < dim; ++i) {
          latent.set(i, k, static_cast<double>(counts[i]) / static_cast<double>(max_abs));
        }
      }
    }
  } else {
    Rng init_rng = make_rng(derive_seed(cfg.seed, 4));
    for (auto& v : latent.values()) v = (random_unit(init_rng) * 2.0 - 1.0) * 0.01;
  }
  latent.refresh_binary();

  RunMetrics metrics;
  metrics.strategy = "lehdc";
  metrics.seed = cfg.seed;
  metrics.version = kVersion;
  metrics.config = {
      {"weight_decay", format_double(cfg.weight_decay)},
      {"learning_rate", format_double(cfg.learning_rate)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"dropout_rate", format_double(cfg.dropout_rate)},
      {"epochs", std::to_string(cfg.epochs)},
      {"lr_decay_factor", format_double(cfg.lr_decay_factor)},
      {"adam_beta1", format_double(cfg.adam_beta1)},
      {"adam_beta2", format_double(cfg.adam_beta2)},
      {"adam_eps", format_double(cfg.adam_eps)},
      {"validation_fraction", format_double(cfg.validation_fraction)},
      {"warm_start", cfg.warm_start ? "true" : "false"},
      {"latent_clip", format_double(cfg.latent_clip)},
  };

  ClassModel best_model = latent.to_class_model();
  double best_metric = subset_accuracy(data, use_val ? val_idx : train_idx, best_model);

  OptimizerState opt(latent.values().size());
  double lr = cfg.learning_rate;
  double prev_epoch_loss = std::numeric_limits<double>::infinity();
  const std::uint64_t shuffle_base = derive_seed(cfg.seed, 2);
  const std::uint64_t dropout_base = derive_seed(cfg.seed, 3);
  std::vector<std::uint32_t> order;
  std::vector<double> grad(latent.values().size());

  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    order = train_idx;
    Rng shuffle_rng = make_rng(derive_seed(shuffle_base, epoch));
    shuffle_values(order, shuffle_rng);
    Rng dropout_rng = make_rng(derive_seed(dropout_base, epoch));

    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t batch_n = std::min<std::size_t>(cfg.batch_size, order.size() - start);
      std::vector<Hypervector> batch;
      batch.reserve(batch_n);
      std::vector<std::int32_t> labels(batch_n);
      for (std::size_t b = 0; b < batch_n; ++b) {
        batch.push_back(data.samples[order[start + b]]);
        labels[b] = data.labels[order[start + b]];
      }
      const DropoutMask mask = cfg.dropout_rate > 0.0
                                   ? sample_dropout_mask(dim, cfg.dropout_rate, dropout_rng)
                                   : full_mask(dim);

      const std::vector<double> logits = forward_logits(batch, latent.binary_classes(), mask);
      loss_sum += loss(logits, labels, n_classes, latent.values(), cfg.weight_decay);
      ++n_batches;

      const std::vector<double> probs = softmax_rows(logits, n_classes);
      std::fill(grad.begin(), grad.end(), 0.0);
      accumulate_data_grad(batch, labels, probs, n_classes, mask, grad.data());
      const auto values = latent.values();
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += cfg.weight_decay * values[j];
      adam_step(opt, grad, latent.values(), lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
                cfg.latent_clip);
      latent.refresh_binary();
    }

    const double epoch_loss = loss_sum / static_cast<double>(n_batches);
    const ClassModel current = latent.to_class_model();
    const double train_acc = subset_accuracy(data, train_idx, current);
    const double val_acc = use_val ? subset_accuracy(data, val_idx, current) : std::nan("");
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    metrics.epochs.push_back(EpochRecord{epoch, epoch_loss, train_acc, val_acc, lr, wall_ms});

    const double selection_metric = use_val ? val_acc : train_acc;
    if (selection_metric > best_metric) {
      best_metric = selection_metric;
      best_model = current;
    }
    if (epoch_loss > prev_epoch_loss) lr *= cfg.lr_decay_factor;
    prev_epoch_loss = epoch_loss;
  }

  return LeHDCTrainResult{std::move(best_model), std::move(metrics)};
}

}  // namespace hdc
