#include "hdc/train_classic.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hdc/format.hpp"
#include "hdc/version.hpp"

namespace hdc {

NonBinaryClassModel::NonBinaryClassModel(std::vector<std::vector<double>> counts,
                                         ClassModel binary)
    : counts_(std::move(counts)), binary_(std::move(binary)) {
  if (counts_.size() != binary_.n_classes()) {
    throw std::invalid_argument("NonBinaryClassModel: count rows != classes");
  }
  for (const auto& row : counts_) {
    if (row.size() != binary_.dim()) {
      throw std::invalid_argument("NonBinaryClassModel: count row length != dim");
    }
  }
}

void NonBinaryClassModel::add_scaled(std::uint32_t k, const Hypervector& hv, double step) {
  if (k >= counts_.size()) throw std::out_of_range("NonBinaryClassModel::add_scaled: class");
  if (hv.dim() != dim()) throw std::invalid_argument("NonBinaryClassModel::add_scaled: dim");
  double* row = counts_[k].data();
  const auto words = hv.words();
  const std::uint32_t d = dim();
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::uint64_t word = words[w];
    const std::uint32_t base = static_cast<std::uint32_t>(w * 64);
    const std::uint32_t bits = std::min<std::uint32_t>(64, d - base);
    for (std::uint32_t j = 0; j < bits; ++j) {
      if ((word >> j) & 1ULL) {
        row[base + j] += step;
      } else {
        row[base + j] -= step;
      }
    }
  }
}

void NonBinaryClassModel::rebinarize_class(std::uint32_t k) {
  if (k >= counts_.size()) throw std::out_of_range("NonBinaryClassModel::rebinarize_class");
  Hypervector hv = binary_.class_hv(k);  // zero counts keep the previous bit
  const double* row = counts_[k].data();
  for (std::uint32_t i = 0; i < dim(); ++i) {
    if (row[i] > 0.0) {
      hv.set_bit(i, true);
    } else if (row[i] < 0.0) {
      hv.set_bit(i, false);
    }
  }
  binary_.set_class_hv(k, std::move(hv));
}

void NonBinaryClassModel::rebinarize_all() {
  for (std::uint32_t k = 0; k < n_classes(); ++k) rebinarize_class(k);
}

BaselineResult train_baseline(const EncodedDataset& data, std::uint32_t n_classes,
                              std::uint64_t seed) {
  if (data.size() == 0) throw std::invalid_argument("train_baseline: empty dataset");
  if (n_classes < 2) throw std::invalid_argument("train_baseline: need at least 2 classes");

  std::vector<Accumulator> acc;
  acc.reserve(n_classes);
  for (std::uint32_t k = 0; k < n_classes; ++k) acc.emplace_back(data.dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::int32_t label = data.labels[i];
    if (label < 0 || static_cast<std::uint32_t>(label) >= n_classes) {
      throw std::invalid_argument("train_baseline: label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(n_classes) + ")");
    }
    acc[label].add(data.samples[i]);
  }
  for (std::uint32_t k = 0; k < n_classes; ++k) {
    if (acc[k].accumulated() == 0) {
      throw std::invalid_argument("train_baseline: class " + std::to_string(k) +
                                  " has no samples");
    }
  }

  std::vector<Hypervector> class_hvs;
  class_hvs.reserve(n_classes);
  std::vector<std::vector<double>> counts(n_classes);
  for (std::uint32_t k = 0; k < n_classes; ++k) {
    Rng tie_rng = make_rng(derive_seed(seed, k));
    class_hvs.push_back(binarize_sign(acc[k], tie_rng));
    counts[k].assign(acc[k].counts().begin(), acc[k].counts().end());
  }
  ClassModel model(data.dim, std::move(class_hvs));
  return BaselineResult{model, NonBinaryClassModel(std::move(counts), model)};
}

namespace {

void check_retrain_inputs(const EncodedDataset& data, const NonBinaryClassModel& model,
                          const RetrainConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("retrain: empty dataset");
  if (data.dim != model.dim()) throw std::invalid_argument("retrain: dimension mismatch");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("retrain: alpha must be > 0");
  if (cfg.max_epochs < 1) throw std::invalid_argument("retrain: max_epochs must be >= 1");
  for (const auto label : data.labels) {
    if (label < 0 || static_cast<std::uint32_t>(label) >= model.n_classes()) {
      throw std::invalid_argument("retrain: label outside [0, n_classes)");
    }
  }
}

// Shared epoch loop; `update` applies one misclassified-sample step.
template <typename UpdateFn>
ClassicTrainResult run_retrain(const EncodedDataset& data, NonBinaryClassModel& model,
                               const RetrainConfig& cfg, const char* strategy,
                               UpdateFn&& update) {
  check_retrain_inputs(data, model, cfg);
  const std::size_t n = data.size();

  RunMetrics metrics;
  metrics.strategy = strategy;
  metrics.seed = cfg.seed;
  metrics.version = kVersion;
  metrics.config = {
      {"alpha", format_double(cfg.alpha)},
      {"alpha_first_epoch", format_double(cfg.alpha_first_epoch)},
      {"max_epochs", std::to_string(cfg.max_epochs)},
      {"convergence_window", std::to_string(cfg.convergence_window)},
      {"convergence_tolerance", format_double(cfg.convergence_tolerance)},
      {"rebinarize_per_epoch", cfg.rebinarize_per_epoch ? "true" : "false"},
      {"return_last_epoch", cfg.return_last_epoch ? "true" : "false"},
  };

  ClassModel best = model.binary();
  double best_acc = evaluate(data, best).accuracy;

  std::vector<std::uint32_t> order(n);
  std::uint64_t prev_misses = 0;
  std::uint32_t stable_epochs = 0;
  for (std::uint32_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double alpha = epoch == 1 ? cfg.alpha_first_epoch : cfg.alpha;
    std::iota(order.begin(), order.end(), 0u);
    Rng shuffle_rng = make_rng(derive_seed(cfg.seed, epoch));
    shuffle_values(order, shuffle_rng);

    std::uint64_t misses = 0;
    for (const std::uint32_t idx : order) {
      const Prediction pred = predict(data.samples[idx], model.binary());
      if (pred.label != data.labels[idx]) {
        ++misses;
        update(idx, pred, alpha);
      }
    }
    if (cfg.rebinarize_per_epoch) model.rebinarize_all();

    const double train_acc = evaluate(data, model.binary()).accuracy;
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    metrics.epochs.push_back(EpochRecord{
        epoch, static_cast<double>(misses) / static_cast<double>(n), train_acc,
        std::nan(""), alpha, wall_ms});
    if (train_acc > best_acc) {
      best_acc = train_acc;
      best = model.binary();
    }

    if (misses == 0) break;  // fixed point: no further epoch can update
    if (epoch > 1) {
      const double change = misses > prev_misses
                                ? static_cast<double>(misses - prev_misses)
                                : static_cast<double>(prev_misses - misses);
      if (change <= cfg.convergence_tolerance * static_cast<double>(n)) {
        ++stable_epochs;
      } else {
        stable_epochs = 0;
      }
      if (stable_epochs >= cfg.convergence_window) break;
    }
    prev_misses = misses;
  }

  return ClassicTrainResult{cfg.return_last_epoch ? model.binary() : best, std::move(metrics)};
}

}  // namespace

ClassicTrainResult retrain(const EncodedDataset& data, NonBinaryClassModel& model,
                           const RetrainConfig& cfg) {
  return run_retrain(data, model, cfg, "retrain",
                     [&](std::uint32_t idx, const Prediction& pred, double alpha) {
                       const std::int32_t truth = data.labels[idx];
                       model.add_scaled(truth, data.samples[idx], alpha);
                       model.add_scaled(pred.label, data.samples[idx], -alpha);
                       if (!cfg.rebinarize_per_epoch) {
                         model.rebinarize_class(truth);
                         model.rebinarize_class(pred.label);
                       }
                     });
}

ClassicTrainResult retrain_enhanced(const EncodedDataset& data, NonBinaryClassModel& model,
                                    const RetrainConfig& cfg) {
  return run_retrain(
      data, model, cfg, "retrain-enhanced",
      [&](std::uint32_t idx, const Prediction& pred, double alpha) {
        const std::int32_t truth = data.labels[idx];
        const double d_true = pred.distances[truth];
        model.add_scaled(truth, data.samples[idx], alpha * d_true);
        if (!cfg.rebinarize_per_epoch) model.rebinarize_class(truth);
        for (std::uint32_t k = 0; k < model.n_classes(); ++k) {
          if (static_cast<std::int32_t>(k) == truth) continue;
          if (pred.distances[k] < d_true) {
            const double pull = std::max(0.0, 0.5 - pred.distances[k]);
            model.add_scaled(k, data.samples[idx], -alpha * pull);
            if (!cfg.rebinarize_per_epoch) model.rebinarize_class(k);
          }
        }
      });
}

}  // namespace hdc
