#pragma once

// In-memory form of a loaded dataset: row-major feature matrix plus integer
// labels in [0, K). Loaders (data_io) guarantee finite features and
// contiguous labels before handing one of these out.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hdc {

struct RawDataset {
  std::uint32_t n_features = 0;
  std::vector<double> features;      // size() == samples * n_features, row-major
  std::vector<std::int32_t> labels;  // one per sample, in [0, n_classes)
  std::vector<std::string> class_names;  // optional; raw label values when mapped

  std::size_t size() const noexcept { return labels.size(); }

  std::int32_t n_classes() const noexcept {
    std::int32_t max_label = -1;
    for (const auto label : labels) max_label = label > max_label ? label : max_label;
    return max_label + 1;
  }

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features, n_features};
  }
};

}  // namespace hdc
