// Python face of the library: hypervector algebra, encoding, the trainers,
// inference, and model persistence. Thin translation layer only; all
// behavior lives in the C++ core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hdc/data_io.hpp"
#include "hdc/train_classic.hpp"
#include "hdc/train_lehdc.hpp"
#include "hdc/version.hpp"

namespace py = pybind11;
using namespace hdc;

namespace {

RawDataset make_raw_dataset(const std::vector<std::vector<double>>& rows,
                            std::vector<std::int32_t> labels) {
  if (rows.empty() || rows.size() != labels.size()) {
    throw std::invalid_argument("rows and labels must be equally sized and non-empty");
  }
  RawDataset data;
  data.n_features = static_cast<std::uint32_t>(rows.front().size());
  for (const auto& row : rows) {
    if (row.size() != rows.front().size()) {
      throw std::invalid_argument("all rows must have the same length");
    }
    data.features.insert(data.features.end(), row.begin(), row.end());
  }
  for (const std::int32_t label : labels) {
    if (label < 0) throw std::invalid_argument("labels must be non-negative");
  }
  data.labels = std::move(labels);
  return data;
}

EncodedDataset make_encoded_dataset(std::vector<Hypervector> samples,
                                    std::vector<std::int32_t> labels) {
  if (samples.empty() || samples.size() != labels.size()) {
    throw std::invalid_argument("samples and labels must be equally sized and non-empty");
  }
  EncodedDataset data;
  data.dim = samples.front().dim();
  for (const Hypervector& hv : samples) {
    if (hv.dim() != data.dim) throw std::invalid_argument("mixed dimensions in samples");
  }
  for (const std::int32_t label : labels) {
    if (label < 0) throw std::invalid_argument("labels must be non-negative");
  }
  data.samples = std::move(samples);
  data.labels = std::move(labels);
  return data;
}

py::dict metrics_to_dict(const RunMetrics& m) {
  py::list epochs;
  for (const EpochRecord& rec : m.epochs) {
    py::dict e;
    e["epoch"] = rec.epoch;
    e["train_loss"] = rec.train_loss;
    e["train_acc"] = rec.train_acc;
    e["val_acc"] = rec.val_acc;
    e["lr"] = rec.lr;
    e["wall_ms"] = rec.wall_ms;
    epochs.append(std::move(e));
  }
  py::dict out;
  out["strategy"] = m.strategy;
  out["seed"] = m.seed;
  out["epochs"] = std::move(epochs);
  out["config"] = py::cast(m.config);
  out["version"] = m.version;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "binary hyperdimensional-computing classifier core";
  m.attr("__version__") = kVersion;

  py::class_<Hypervector>(m, "Hypervector")
      .def(py::init<std::uint32_t>(), py::arg("dim"))
      .def_static("all_plus_one", &Hypervector::all_plus_one, py::arg("dim"))
      .def_property_readonly("dim", &Hypervector::dim)
      .def("bit", &Hypervector::bit, py::arg("i"))
      .def("set_bit", &Hypervector::set_bit, py::arg("i"), py::arg("plus_one"))
      .def("bipolar", &Hypervector::bipolar, py::arg("i"))
      .def("complement", &Hypervector::complement)
      .def("to_bipolar",
           [](const Hypervector& hv) {
             std::vector<int> values(hv.dim());
             for (std::uint32_t i = 0; i < hv.dim(); ++i) values[i] = hv.bipolar(i);
             return values;
           })
      .def("__eq__", [](const Hypervector& a, const Hypervector& b) { return a == b; })
      .def("__len__", &Hypervector::dim);

  m.def(
      "random_hv",
      [](std::uint32_t dim, std::uint64_t seed) {
        Rng rng = make_rng(seed);
        return random_hv(dim, rng);
      },
      py::arg("dim"), py::arg("seed"));
  m.def("bind", &bind, py::arg("a"), py::arg("b"));
  m.def(
      "hamming", [](const Hypervector& a, const Hypervector& b) { return hamming(a, b).normalized(); },
      py::arg("a"), py::arg("b"), "normalized Hamming distance");
  m.def("bipolar_dot", &bipolar_dot, py::arg("a"), py::arg("b"));
  m.def("cosine_from_hamming", &cosine_from_hamming, py::arg("h"));
  m.def("derive_seed", [](std::uint64_t base, std::uint64_t stream) { return derive_seed(base, stream); },
        py::arg("base"), py::arg("stream"));

  py::class_<RawDataset>(m, "RawDataset")
      .def(py::init(&make_raw_dataset), py::arg("rows"), py::arg("labels"))
      .def_readonly("n_features", &RawDataset::n_features)
      .def_property_readonly("labels", [](const RawDataset& d) { return d.labels; })
      .def_property_readonly("n_classes", &RawDataset::n_classes)
      .def("__len__", &RawDataset::size);

  m.def("load_csv",
        [](const std::string& path, char delimiter, int label_column, bool has_header,
           bool merge_delimiters) {
          CsvOptions opts;
          opts.delimiter = delimiter;
          opts.label_column = label_column;
          opts.has_header = has_header;
          opts.merge_delimiters = merge_delimiters;
          return load_csv(path, opts);
        },
        py::arg("path"), py::arg("delimiter") = ',', py::arg("label_column") = -1,
        py::arg("has_header") = false, py::arg("merge_delimiters") = false);
  m.def("load_idx", &load_idx, py::arg("images_path"), py::arg("labels_path"));

  py::class_<ItemMemory>(m, "ItemMemory")
      .def(py::init([](std::uint32_t dim, std::uint32_t n_levels, const RawDataset& data,
                       std::uint64_t seed) {
             return ItemMemory(dim, data.n_features, n_levels, fit_stats(data), seed);
           }),
           py::arg("dim"), py::arg("n_levels"), py::arg("data"), py::arg("seed"),
           "item memory with per-feature ranges fitted to `data`")
      .def(py::init([](std::uint32_t dim, std::uint32_t n_levels, std::vector<double> mins,
                       std::vector<double> maxs, std::uint64_t seed) {
             FeatureStats stats{std::move(mins), std::move(maxs)};
             const auto n_features = static_cast<std::uint32_t>(stats.n_features());
             return ItemMemory(dim, n_features, n_levels, std::move(stats), seed);
           }),
           py::arg("dim"), py::arg("n_levels"), py::arg("min_values"), py::arg("max_values"),
           py::arg("seed"))
      .def_property_readonly("dim", &ItemMemory::dim)
      .def_property_readonly("n_features", &ItemMemory::n_features)
      .def_property_readonly("n_levels", &ItemMemory::n_levels)
      .def_property_readonly("seed", &ItemMemory::seed)
      .def("position", &ItemMemory::position, py::arg("feature"))
      .def("level", &ItemMemory::level, py::arg("level"));

  m.def("quantize", &quantize, py::arg("value"), py::arg("feature_index"), py::arg("item_memory"));

  py::class_<EncodedDataset>(m, "EncodedDataset")
      .def(py::init(&make_encoded_dataset), py::arg("samples"), py::arg("labels"))
      .def_readonly("dim", &EncodedDataset::dim)
      .def_property_readonly("labels", [](const EncodedDataset& d) { return d.labels; })
      .def("sample", [](const EncodedDataset& d, std::size_t i) { return d.samples.at(i); },
           py::arg("i"))
      .def("__len__", &EncodedDataset::size);

  m.def("encode_dataset", &encode_dataset, py::arg("data"), py::arg("item_memory"),
        py::arg("seed"));
  m.def(
      "encode_row",
      [](const std::vector<double>& features, const ItemMemory& im, std::uint64_t seed) {
        Rng tie_rng = make_rng(seed);
        return encode(features, im, tie_rng);
      },
      py::arg("features"), py::arg("item_memory"), py::arg("seed"));

  py::class_<ClassModel>(m, "ClassModel")
      .def_property_readonly("dim", &ClassModel::dim)
      .def_property_readonly("n_classes", &ClassModel::n_classes)
      .def("class_hv", &ClassModel::class_hv, py::arg("k"));

  m.def(
      "predict",
      [](const Hypervector& hv, const ClassModel& model) {
        const Prediction p = predict(hv, model);
        py::dict out;
        out["label"] = p.label;
        out["distances"] = p.distances;
        out["scores"] = p.scores;
        return out;
      },
      py::arg("hv"), py::arg("model"));

  m.def(
      "evaluate",
      [](const EncodedDataset& data, const ClassModel& model) {
        const Evaluation ev = evaluate(data, model);
        py::list confusion;
        for (std::uint32_t t = 0; t < ev.n_classes; ++t) {
          py::list row;
          for (std::uint32_t p = 0; p < ev.n_classes; ++p) row.append(ev.at(t, p));
          confusion.append(std::move(row));
        }
        py::dict out;
        out["accuracy"] = ev.accuracy;
        out["correct"] = ev.correct;
        out["total"] = ev.total;
        out["confusion"] = std::move(confusion);
        return out;
      },
      py::arg("data"), py::arg("model"));

  m.def(
      "train_baseline",
      [](const EncodedDataset& data, std::uint32_t n_classes, std::uint64_t seed) {
        return train_baseline(data, n_classes, seed).model;
      },
      py::arg("data"), py::arg("n_classes"), py::arg("seed") = 1);

  m.def(
      "retrain",
      [](const EncodedDataset& data, std::uint32_t n_classes, double alpha,
         double alpha_first_epoch, std::uint32_t max_epochs, std::uint64_t seed,
         bool enhanced) {
        RetrainConfig cfg;
        cfg.alpha = alpha;
        cfg.alpha_first_epoch = alpha_first_epoch;
        cfg.max_epochs = max_epochs;
        cfg.seed = seed;
        BaselineResult base = train_baseline(data, n_classes, seed);
        const ClassicTrainResult result = enhanced
                                              ? retrain_enhanced(data, base.accumulators, cfg)
                                              : retrain(data, base.accumulators, cfg);
        return py::make_tuple(result.model, metrics_to_dict(result.metrics));
      },
      py::arg("data"), py::arg("n_classes"), py::arg("alpha") = 0.05,
      py::arg("alpha_first_epoch") = 1.5, py::arg("max_epochs") = 150, py::arg("seed") = 1,
      py::arg("enhanced") = false);

  m.def(
      "train_lehdc",
      [](const EncodedDataset& data, std::uint32_t n_classes, double weight_decay,
         double learning_rate, std::uint32_t batch_size, double dropout_rate,
         std::uint32_t epochs, double validation_fraction, std::uint64_t seed,
         bool warm_start, double latent_clip) {
        LeHDCConfig cfg;
        cfg.weight_decay = weight_decay;
        cfg.learning_rate = learning_rate;
        cfg.batch_size = batch_size;
        cfg.dropout_rate = dropout_rate;
        cfg.epochs = epochs;
        cfg.validation_fraction = validation_fraction;
        cfg.seed = seed;
        cfg.warm_start = warm_start;
        cfg.latent_clip = latent_clip;
        const LeHDCTrainResult result = train_lehdc(data, n_classes, cfg);
        return py::make_tuple(result.model, metrics_to_dict(result.metrics));
      },
      py::arg("data"), py::arg("n_classes"), py::arg("weight_decay") = 0.05,
      py::arg("learning_rate") = 0.01, py::arg("batch_size") = 64,
      py::arg("dropout_rate") = 0.5, py::arg("epochs") = 100,
      py::arg("validation_fraction") = 0.1, py::arg("seed") = 1, py::arg("warm_start") = true,
      py::arg("latent_clip") = 1.0);

  m.def(
      "save_model",
      [](const ClassModel& model, const std::string& path,
         const std::optional<ItemMemory>& item_memory) {
        ModelBundle bundle{model, std::nullopt, item_memory};
        save_model(bundle, path);
      },
      py::arg("model"), py::arg("path"), py::arg("item_memory") = std::nullopt);
  m.def(
      "load_model",
      [](const std::string& path) {
        ModelBundle bundle = load_model(path);
        return py::make_tuple(std::move(bundle.model), std::move(bundle.item_memory));
      },
      py::arg("path"));
}
