#include "hdc/classifier.hpp"

#include <stdexcept>
#include <string>

namespace hdc {

ClassModel::ClassModel(std::uint32_t dim, std::vector<Hypervector> class_hvs, ModelMeta meta)
    : dim_(dim), class_hvs_(std::move(class_hvs)), meta_(meta) {
  if (class_hvs_.size() < 2) throw std::invalid_argument("ClassModel: need at least 2 classes");
  for (const auto& hv : class_hvs_) {
    if (hv.dim() != dim_) throw std::invalid_argument("ClassModel: class hypervector dim mismatch");
  }
}

void ClassModel::set_class_hv(std::uint32_t k, Hypervector hv) {
  if (k >= class_hvs_.size()) throw std::out_of_range("ClassModel::set_class_hv: class index");
  if (hv.dim() != dim_) throw std::invalid_argument("ClassModel::set_class_hv: dim mismatch");
  class_hvs_[k] = std::move(hv);
}

Prediction predict(const Hypervector& hv, const ClassModel& model) {
  if (hv.dim() != model.dim()) throw std::invalid_argument("predict: dimension mismatch");
  const std::uint32_t k_n = model.n_classes();
  Prediction pred;
  pred.distances.resize(k_n);
  pred.scores.resize(k_n);
  std::uint64_t best_differing = 0;
  for (std::uint32_t k = 0; k < k_n; ++k) {
    const Hamming h = hamming(hv, model.class_hv(k));
    pred.distances[k] = h.normalized();
    pred.scores[k] = static_cast<std::int64_t>(h.dim) - 2 * static_cast<std::int64_t>(h.differing);
    // Integer compare keeps the argmin exact; strict < breaks ties low.
    if (k == 0 || h.differing < best_differing) {
      best_differing = h.differing;
      pred.label = static_cast<std::int32_t>(k);
    }
  }
  return pred;
}

Evaluation evaluate(const EncodedDataset& data, const ClassModel& model) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  if (data.dim != model.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  const std::uint32_t k_n = model.n_classes();
  Evaluation ev;
  ev.n_classes = k_n;
  ev.confusion.assign(static_cast<std::size_t>(k_n) * k_n, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::int32_t truth = data.labels[i];
    if (truth < 0 || static_cast<std::uint32_t>(truth) >= k_n) {
      throw std::invalid_argument("evaluate: label " + std::to_string(truth) +
                                  " outside [0, " + std::to_string(k_n) + ")");
    }
    const Prediction pred = predict(data.samples[i], model);
    ++ev.confusion[static_cast<std::size_t>(truth) * k_n + pred.label];
    if (pred.label == truth) ++ev.correct;
  }
  ev.total = data.size();
  ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.total);
  return ev;
}

}  // namespace hdc
