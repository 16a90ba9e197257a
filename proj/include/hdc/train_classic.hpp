#pragma once

// Averaging-based training and the two fine-tuning loops on top of it:
// plain retraining (add the misclassified sample to the true class
// accumulator, subtract it from the offending one) and enhanced retraining
// (update every class closer than the true one, with distance-to-ideal
// scaling).

#include <cstdint>
#include <span>
#include <vector>

#include "hdc/classifier.hpp"
#include "hdc/encoder.hpp"
#include "hdc/run_metrics.hpp"

namespace hdc {

// Real-valued class accumulators paired with their binary (sign) view. The
// binary view is what classifies; the counts absorb fractional updates.
// Signing a zero count keeps the previous binary bit rather than drawing a
// fresh one, so exact cancellations do not flip bits.
class NonBinaryClassModel {
 public:
  // Takes ownership of baseline accumulator counts and the matching binary
  // model (whose zero ties were already resolved by the baseline's rng).
  NonBinaryClassModel(std::vector<std::vector<double>> counts, ClassModel binary);

  std::uint32_t dim() const noexcept { return binary_.dim(); }
  std::uint32_t n_classes() const noexcept { return binary_.n_classes(); }

  const ClassModel& binary() const noexcept { return binary_; }
  std::span<const double> counts(std::uint32_t k) const { return counts_[k]; }

  // counts[k] += step * bipolar(hv), leaving the binary view stale until the
  // next rebinarize call.
  void add_scaled(std::uint32_t k, const Hypervector& hv, double step);

  void rebinarize_class(std::uint32_t k);
  void rebinarize_all();

 private:
  std::vector<std::vector<double>> counts_;
  ClassModel binary_;
};

struct RetrainConfig {
  double alpha = 0.05;
  double alpha_first_epoch = 1.5;
  std::uint32_t max_epochs = 150;
  // Stop when the per-epoch misclassification count changes by at most
  // tolerance * dataset size for `window` consecutive epochs.
  std::uint32_t convergence_window = 5;
  double convergence_tolerance = 1e-3;
  std::uint64_t seed = 1;
  bool rebinarize_per_epoch = false;  // default: touched rows, immediately
  bool return_last_epoch = false;     // default: best training accuracy
};

struct BaselineResult {
  ClassModel model;
  NonBinaryClassModel accumulators;
};

// Class hypervector k = majority sign over all sample hypervectors of class
// k; sign ties resolved by a per-class rng derived from `seed`. Every class
// in [0, n_classes) must have at least one sample.
BaselineResult train_baseline(const EncodedDataset& data, std::uint32_t n_classes,
                              std::uint64_t seed);

struct ClassicTrainResult {
  ClassModel model;
  RunMetrics metrics;
};

// Online fine-tuning over shuffled epochs: each misclassified sample moves
// the true class accumulator toward it and the predicted-wrong accumulator
// away by the same amount. Mutates `model` in place; the returned ClassModel
// is the selected snapshot. train_loss in the metrics is the online
// misclassification fraction for the epoch.
ClassicTrainResult retrain(const EncodedDataset& data, NonBinaryClassModel& model,
                           const RetrainConfig& cfg);

// Variant with distance-scaled, multi-class updates: the true class is pulled
// with step alpha * d_true (its ideal distance is 0), and every wrong class
// strictly closer than the true one is pushed with step
// alpha * max(0, 0.5 - d_k) (its ideal distance is 0.5).
ClassicTrainResult retrain_enhanced(const EncodedDataset& data, NonBinaryClassModel& model,
                                    const RetrainConfig& cfg);

}  // namespace hdc
