#pragma once

// Class-hypervector model and nearest-class inference. Prediction is the
// argmin of normalized Hamming distance; the equivalent integer similarity
// scores (bipolar dot products) are carried alongside for trainers.

#include <cstdint>
#include <vector>

#include "hdc/encoder.hpp"
#include "hdc/hypervector.hpp"

namespace hdc {

// Encoder fingerprint carried with a model so a saved model can refuse
// incompatible data at evaluation time.
struct ModelMeta {
  std::uint64_t encoder_seed = 0;
  std::uint32_t n_features = 0;
  std::uint32_t n_levels = 0;

  friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

class ClassModel {
 public:
  // Requires at least two classes, all hypervectors of equal dimension.
  ClassModel(std::uint32_t dim, std::vector<Hypervector> class_hvs, ModelMeta meta = {});

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t n_classes() const noexcept { return static_cast<std::uint32_t>(class_hvs_.size()); }
  const Hypervector& class_hv(std::uint32_t k) const { return class_hvs_[k]; }

  // Model-building mutation (trainers rebinarize rows in place).
  void set_class_hv(std::uint32_t k, Hypervector hv);

  const ModelMeta& meta() const noexcept { return meta_; }
  void set_meta(ModelMeta meta) noexcept { meta_ = meta; }

 private:
  std::uint32_t dim_;
  std::vector<Hypervector> class_hvs_;
  ModelMeta meta_;
};

struct Prediction {
  std::int32_t label = 0;             // argmin distance; ties -> lowest index
  std::vector<double> distances;      // normalized Hamming per class
  std::vector<std::int64_t> scores;   // dim - 2 * differing, per class
};

Prediction predict(const Hypervector& hv, const ClassModel& model);

struct Evaluation {
  double accuracy = 0.0;
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  std::uint32_t n_classes = 0;
  std::vector<std::uint64_t> confusion;  // row-major K x K, row = true class

  std::uint64_t at(std::uint32_t true_class, std::uint32_t predicted) const {
    return confusion[static_cast<std::size_t>(true_class) * n_classes + predicted];
  }
};

Evaluation evaluate(const EncodedDataset& data, const ClassModel& model);

}  // namespace hdc
