// Command-line frontend: encode / train / eval / compare / sweep-dim.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.
// Machine-readable metrics go to JSONL (one record per epoch or cell plus a
// summary record); a flat TSV with the same numbers is written alongside for
// direct plotting. Everything is deterministic in the echoed config + seeds.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hdc/data_io.hpp"
#include "hdc/format.hpp"
#include "hdc/train_classic.hpp"
#include "hdc/train_lehdc.hpp"
#include "hdc/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace hdc;

namespace {

// Post-parse problems that are still the caller's fault (mutually exclusive
// flags, out-of-range combinations). Mapped to exit code 2 like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string key_hex(std::uint64_t key) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(key));
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// dataset flags shared by every subcommand

struct DatasetFlags {
  std::string csv;
  std::string images;
  std::string labels;
  std::vector<std::string> cifar;
  std::string cache;  // encoded .hdce input, only where registered
};

void add_dataset_options(CLI::App* cmd, DatasetFlags& f, const std::string& prefix,
                         const std::string& noun, bool allow_cache) {
  const std::string p = prefix.empty() ? "--" : "--" + prefix + "-";
  cmd->add_option(p + "data", f.csv, noun + " delimited text file");
  cmd->add_option(p + "images", f.images, noun + " IDX image file");
  cmd->add_option(p + "labels", f.labels, noun + " IDX label file");
  cmd->add_option(p + "cifar", f.cifar, noun + " CIFAR-10-style binary batches")
      ->delimiter(',');
  if (allow_cache) {
    cmd->add_option(p + "cache", f.cache, noun + " encoded cache (.hdce)");
  }
}

struct CsvFlags {
  std::string delimiter = ",";
  int label_column = -1;
  bool header = false;
  bool merge = false;

  CsvOptions to_options() const {
    CsvOptions opts;
    if (delimiter == "\\t" || delimiter == "tab") {
      opts.delimiter = '\t';
    } else if (delimiter.size() == 1) {
      opts.delimiter = delimiter[0];
    } else {
      throw UsageError("--delimiter must be a single character (or \\t)");
    }
    opts.label_column = label_column;
    opts.has_header = header;
    opts.merge_delimiters = merge;
    return opts;
  }
};

void add_csv_options(CLI::App* cmd, CsvFlags& f) {
  cmd->add_option("--delimiter", f.delimiter, "text-file field delimiter (default ,)");
  cmd->add_option("--label-column", f.label_column, "label column index, -1 = last");
  cmd->add_flag("--header", f.header, "skip one header line in text files");
  cmd->add_flag("--merge-delimiters", f.merge, "collapse delimiter runs (space-padded tables)");
}

int raw_source_count(const DatasetFlags& f) {
  int n = 0;
  if (!f.csv.empty()) ++n;
  if (!f.images.empty() || !f.labels.empty()) ++n;
  if (!f.cifar.empty()) ++n;
  return n;
}

RawDataset load_raw(const DatasetFlags& f, const CsvOptions& csv, const std::string& noun) {
  if (raw_source_count(f) != 1) {
    throw UsageError("give exactly one " + noun +
                     " source (--data, --images + --labels, or --cifar)");
  }
  if (!f.csv.empty()) return load_csv(f.csv, csv);
  if (!f.images.empty() || !f.labels.empty()) {
    if (f.images.empty() || f.labels.empty()) {
      throw UsageError("--images and --labels must be given together");
    }
    return load_idx(f.images, f.labels);
  }
  return load_cifar10(f.cifar);
}

// Byte-valued image data quantizes to 256 levels by default; continuous
// sensor tables to 64.
std::uint32_t resolve_levels(std::uint32_t flag_value, const DatasetFlags& f) {
  if (flag_value != 0) return flag_value;
  return (!f.images.empty() || !f.cifar.empty()) ? 256u : 64u;
}

// ---------------------------------------------------------------------------
// encoded-dataset cache plumbing

fs::path cache_directory() {
  const char* env = std::getenv("HDC_CACHE_DIR");
  return env && *env ? fs::path(env) : fs::path(".hdc-cache");
}

struct EncodedInput {
  EncodedDataset data;
  ItemMemory im;
  std::uint64_t key = 0;
  bool cache_hit = false;
  fs::path path;
  double encode_seconds = 0.0;
};

// Reuse a cache file whose stored key matches the requested encoding; build
// and persist the encoding otherwise.
EncodedInput obtain_encoded(const RawDataset& raw, std::uint32_t dim, std::uint32_t levels,
                            std::uint64_t seed, fs::path out_path) {
  if (dim < levels) throw UsageError("--dim must be at least the number of levels");
  const std::uint64_t key = encoding_key(raw, dim, levels, seed);
  std::error_code ec;
  if (out_path.empty()) {
    const fs::path dir = cache_directory();
    fs::create_directories(dir, ec);
    out_path = dir / ("hdc-" + key_hex(key) + ".hdce");
  } else if (out_path.has_parent_path()) {
    fs::create_directories(out_path.parent_path(), ec);
  }
  if (fs::exists(out_path)) {
    const std::optional<std::uint64_t> stored = peek_encoded_key(out_path.string());
    if (stored && *stored == key) {
      EncodedCache cached = load_encoded(out_path.string());
      return {std::move(cached.data), std::move(cached.item_memory), key, true, out_path, 0.0};
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  ItemMemory im(dim, raw.n_features, levels, fit_stats(raw), seed);
  EncodedDataset enc = encode_dataset(raw, im, seed);
  const double secs = seconds_since(t0);
  save_encoded(enc, im, key, out_path.string());
  return {std::move(enc), std::move(im), key, false, out_path, secs};
}

// ---------------------------------------------------------------------------
// strategies and presets

enum class Strategy { baseline, retrain, retrain_enhanced, lehdc };

const std::set<std::string> kStrategyNames = {"baseline", "retrain", "retrain-enhanced",
                                              "lehdc"};

Strategy parse_strategy(const std::string& name) {
  if (name == "baseline") return Strategy::baseline;
  if (name == "retrain") return Strategy::retrain;
  if (name == "retrain-enhanced") return Strategy::retrain_enhanced;
  if (name == "lehdc") return Strategy::lehdc;
  throw UsageError("unknown strategy: " + name);
}

// Per-dataset learned-trainer hyperparameters; the first four datasets share
// one row.
struct Preset {
  double weight_decay;
  double learning_rate;
  std::uint32_t batch_size;
  double dropout_rate;
  std::uint32_t epochs;
};

const std::map<std::string, Preset> kPresets = {
    {"mnist", {0.05, 0.01, 64, 0.5, 100}},
    {"ucihar", {0.05, 0.01, 64, 0.5, 100}},
    {"isolet", {0.05, 0.01, 64, 0.5, 100}},
    {"pamap", {0.05, 0.01, 64, 0.5, 100}},
    {"fashion-mnist", {0.03, 0.1, 256, 0.3, 200}},
    {"cifar-10", {0.03, 0.001, 512, 0.3, 200}},
};

std::set<std::string> preset_names() {
  std::set<std::string> names;
  for (const auto& [name, preset] : kPresets) names.insert(name);
  return names;
}

struct TrainOutcome {
  ClassModel model;
  RunMetrics metrics;
};

TrainOutcome run_strategy(Strategy strategy, const EncodedDataset& data,
                          std::uint32_t n_classes, std::uint64_t seed, RetrainConfig rcfg,
                          LeHDCConfig lcfg) {
  rcfg.seed = seed;
  lcfg.seed = seed;
  switch (strategy) {
    case Strategy::baseline: {
      const auto t0 = std::chrono::steady_clock::now();
      BaselineResult result = train_baseline(data, n_classes, seed);
      RunMetrics metrics;
      metrics.strategy = "baseline";
      metrics.seed = seed;
      metrics.version = kVersion;
      EpochRecord rec;
      rec.epoch = 1;
      rec.train_acc = evaluate(data, result.model).accuracy;
      rec.train_loss = 1.0 - rec.train_acc;
      rec.lr = 0.0;
      rec.wall_ms = seconds_since(t0) * 1000.0;
      metrics.epochs.push_back(rec);
      return {std::move(result.model), std::move(metrics)};
    }
    case Strategy::retrain:
    case Strategy::retrain_enhanced: {
      BaselineResult base = train_baseline(data, n_classes, seed);
      ClassicTrainResult result = strategy == Strategy::retrain
                                      ? retrain(data, base.accumulators, rcfg)
                                      : retrain_enhanced(data, base.accumulators, rcfg);
      return {std::move(result.model), std::move(result.metrics)};
    }
    case Strategy::lehdc: {
      LeHDCTrainResult result = train_lehdc(data, n_classes, lcfg);
      return {std::move(result.model), std::move(result.metrics)};
    }
  }
  throw std::logic_error("unhandled strategy");
}

std::uint32_t count_classes(const std::vector<std::int32_t>& labels) {
  std::int32_t max_label = -1;
  for (const std::int32_t label : labels) max_label = std::max(max_label, label);
  if (max_label < 1) throw std::runtime_error("dataset needs at least two classes");
  return static_cast<std::uint32_t>(max_label + 1);
}

// ---------------------------------------------------------------------------
// metrics emission

void write_metrics_files(const RunMetrics& m, const fs::path& jsonl_path) {
  std::ofstream out(jsonl_path);
  if (!out) throw std::runtime_error("cannot open " + jsonl_path.string() + " for writing");
  for (const EpochRecord& rec : m.epochs) {
    const ordered_json j{{"type", "epoch"},         {"strategy", m.strategy},
                         {"seed", m.seed},          {"epoch", rec.epoch},
                         {"train_loss", rec.train_loss}, {"train_acc", rec.train_acc},
                         {"val_acc", rec.val_acc},  {"lr", rec.lr},
                         {"wall_ms", rec.wall_ms}};
    out << j.dump() << "\n";
  }
  const double final_train =
      m.epochs.empty() ? std::nan("") : m.epochs.back().train_acc;
  const ordered_json summary{{"type", "summary"},
                             {"strategy", m.strategy},
                             {"seed", m.seed},
                             {"epochs", m.epochs.size()},
                             {"final_train_acc", final_train},
                             {"final_test_acc", m.final_test_acc},
                             {"version", m.version},
                             {"config", m.config}};
  out << summary.dump() << "\n";

  fs::path tsv_path = jsonl_path;
  tsv_path.replace_extension(".tsv");
  std::ofstream tsv(tsv_path);
  if (!tsv) throw std::runtime_error("cannot open " + tsv_path.string() + " for writing");
  tsv << "epoch\ttrain_loss\ttrain_acc\tval_acc\tlr\twall_ms\n";
  for (const EpochRecord& rec : m.epochs) {
    tsv << rec.epoch << "\t" << format_double(rec.train_loss) << "\t"
        << format_double(rec.train_acc) << "\t" << format_double(rec.val_acc) << "\t"
        << format_double(rec.lr) << "\t" << format_double(rec.wall_ms) << "\n";
  }
}

using ConfigPairs = std::vector<std::pair<std::string, std::string>>;

void echo_config(const ConfigPairs& pairs) {
  for (const auto& [key, value] : pairs) std::cout << "config " << key << "=" << value << "\n";
}

void merge_config(RunMetrics& metrics, const ConfigPairs& pairs) {
  for (const auto& [key, value] : pairs) metrics.config[key] = value;
}

ConfigPairs lehdc_config_pairs(const LeHDCConfig& cfg) {
  return {{"weight_decay", format_double(cfg.weight_decay)},
          {"learning_rate", format_double(cfg.learning_rate)},
          {"batch_size", std::to_string(cfg.batch_size)},
          {"dropout_rate", format_double(cfg.dropout_rate)},
          {"epochs", std::to_string(cfg.epochs)},
          {"lr_decay_factor", format_double(cfg.lr_decay_factor)},
          {"validation_fraction", format_double(cfg.validation_fraction)},
          {"warm_start", cfg.warm_start ? "true" : "false"},
          {"latent_clip", format_double(cfg.latent_clip)}};
}

ConfigPairs retrain_config_pairs(const RetrainConfig& cfg) {
  return {{"alpha", format_double(cfg.alpha)},
          {"alpha_first_epoch", format_double(cfg.alpha_first_epoch)},
          {"max_epochs", std::to_string(cfg.max_epochs)},
          {"convergence_window", std::to_string(cfg.convergence_window)},
          {"convergence_tolerance", format_double(cfg.convergence_tolerance)}};
}

// ---------------------------------------------------------------------------
// encode

struct EncodeCmd {
  DatasetFlags data;
  CsvFlags csv;
  std::uint32_t dim = 10000;
  std::uint32_t levels = 0;  // 0 = pick by data kind
  std::uint64_t seed = 1;
  std::string out;

  void run() const {
    const auto t0 = std::chrono::steady_clock::now();
    const RawDataset raw = load_raw(data, csv.to_options(), "input");
    const std::uint32_t q = resolve_levels(levels, data);
    const EncodedInput enc = obtain_encoded(raw, dim, q, seed, fs::path(out));
    std::cout << "D=" << enc.data.dim << " N=" << enc.data.size() << " Q=" << q
              << " L=" << raw.n_features << " elapsed " << fixed2(seconds_since(t0))
              << " s\n";
    if (enc.cache_hit) {
      std::cout << "cache hit " << enc.path.string() << " (key " << key_hex(enc.key) << ")\n";
    } else {
      std::cout << "wrote " << enc.path.string() << " (key " << key_hex(enc.key) << ")\n";
    }
  }
};

void register_encode(CLI::App& app, EncodeCmd& state) {
  CLI::App* cmd = app.add_subcommand("encode", "encode a raw dataset into hypervectors");
  add_dataset_options(cmd, state.data, "", "input", false);
  add_csv_options(cmd, state.csv);
  cmd->add_option("--dim", state.dim, "hypervector dimension (default 10000)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--levels", state.levels,
                  "quantization levels (default 256 for image bytes, 64 otherwise)");
  cmd->add_option("--seed", state.seed, "encoder seed (default 1)");
  cmd->add_option("--out", state.out, "output cache path (default under the cache dir)");
  cmd->callback([&state] { state.run(); });
}

// ---------------------------------------------------------------------------
// train

struct TrainCmd {
  DatasetFlags data;
  CsvFlags csv;
  std::string strategy;
  std::string preset;
  std::uint32_t dim = 10000;
  std::uint32_t levels = 0;
  std::uint64_t seed = 1;
  std::string model_out = "model.hdcm";
  std::string metrics_out = "metrics.jsonl";
  // learned-trainer overrides
  double weight_decay = 0.0;
  double learning_rate = 0.0;
  std::uint32_t batch_size = 0;
  double dropout = 0.0;
  std::uint32_t epochs = 0;
  double val_fraction = 0.0;
  double latent_clip = 0.0;
  bool cold_start = false;
  // fine-tuning overrides
  double alpha = 0.0;
  double alpha_first = 0.0;
  std::uint32_t max_epochs = 0;
  CLI::App* cmd = nullptr;

  bool given(const std::string& name) const { return cmd->count(name) > 0; }

  void run() const {
    const Strategy s = parse_strategy(strategy);
    if (!preset.empty() && s != Strategy::lehdc) {
      throw UsageError("--preset selects lehdc hyperparameters; use it with --strategy lehdc");
    }

    // Input: an explicit encoded cache, or a raw dataset encoded through the
    // transparent cache.
    std::optional<EncodedInput> input;
    if (!data.cache.empty()) {
      if (raw_source_count(data) != 0 || given("--dim") || given("--levels")) {
        throw UsageError("--cache already fixes the encoding; drop raw-data/--dim/--levels");
      }
      EncodedCache cached = load_encoded(data.cache);
      input.emplace(EncodedInput{std::move(cached.data), std::move(cached.item_memory),
                                 cached.key, true, fs::path(data.cache), 0.0});
    } else {
      const RawDataset raw = load_raw(data, csv.to_options(), "training");
      input.emplace(obtain_encoded(raw, dim, resolve_levels(levels, data), seed, {}));
    }
    const EncodedDataset& enc = input->data;
    const ItemMemory& im = input->im;
    if (input->cache_hit) {
      std::cout << "using encoded cache " << input->path.string() << " (key "
                << key_hex(input->key) << ")\n";
    } else {
      std::cout << "encoded D=" << enc.dim << " N=" << enc.size() << " in "
                << fixed2(input->encode_seconds) << " s, cached at " << input->path.string()
                << "\n";
    }
    const std::uint32_t n_classes = count_classes(enc.labels);

    // Configs: defaults -> preset row -> explicit flag overrides.
    LeHDCConfig lcfg;
    RetrainConfig rcfg;
    if (!preset.empty()) {
      const Preset& p = kPresets.at(preset);
      lcfg.weight_decay = p.weight_decay;
      lcfg.learning_rate = p.learning_rate;
      lcfg.batch_size = p.batch_size;
      lcfg.dropout_rate = p.dropout_rate;
      lcfg.epochs = p.epochs;
    }
    if (given("--weight-decay")) lcfg.weight_decay = weight_decay;
    if (given("--learning-rate")) lcfg.learning_rate = learning_rate;
    if (given("--batch-size")) lcfg.batch_size = batch_size;
    if (given("--dropout")) lcfg.dropout_rate = dropout;
    if (given("--epochs")) lcfg.epochs = epochs;
    if (given("--val-fraction")) lcfg.validation_fraction = val_fraction;
    if (given("--latent-clip")) lcfg.latent_clip = latent_clip;
    if (cold_start) lcfg.warm_start = false;
    if (given("--alpha")) rcfg.alpha = alpha;
    if (given("--alpha-first")) rcfg.alpha_first_epoch = alpha_first;
    if (given("--max-epochs")) rcfg.max_epochs = max_epochs;

    ConfigPairs pairs = {{"strategy", strategy},
                         {"seed", std::to_string(seed)},
                         {"dim", std::to_string(enc.dim)},
                         {"levels", std::to_string(im.n_levels())},
                         {"encoder_seed", std::to_string(im.seed())},
                         {"n_features", std::to_string(im.n_features())},
                         {"n_classes", std::to_string(n_classes)}};
    if (!preset.empty()) pairs.emplace_back("preset", preset);
    if (s == Strategy::lehdc) {
      const ConfigPairs extra = lehdc_config_pairs(lcfg);
      pairs.insert(pairs.end(), extra.begin(), extra.end());
    } else if (s != Strategy::baseline) {
      const ConfigPairs extra = retrain_config_pairs(rcfg);
      pairs.insert(pairs.end(), extra.begin(), extra.end());
    }
    echo_config(pairs);

    const auto t0 = std::chrono::steady_clock::now();
    TrainOutcome outcome = run_strategy(s, enc, n_classes, seed, rcfg, lcfg);
    merge_config(outcome.metrics, pairs);
    if (!outcome.metrics.epochs.empty()) {
      const EpochRecord& last = outcome.metrics.epochs.back();
      std::cout << "trained " << strategy << ": " << outcome.metrics.epochs.size()
                << " epoch(s) in " << fixed2(seconds_since(t0)) << " s, final train accuracy "
                << fixed2(last.train_acc * 100.0) << "%";
      if (!std::isnan(last.val_acc)) {
        std::cout << ", final val accuracy " << fixed2(last.val_acc * 100.0) << "%";
      }
      std::cout << "\n";
    }

    outcome.model.set_meta(ModelMeta{im.seed(), im.n_features(), im.n_levels()});
    ModelBundle bundle{std::move(outcome.model), std::nullopt, im};
    save_model(bundle, model_out);
    std::cout << "wrote model " << model_out << "\n";

    write_metrics_files(outcome.metrics, fs::path(metrics_out));
    fs::path tsv = fs::path(metrics_out).replace_extension(".tsv");
    std::cout << "wrote metrics " << metrics_out << " and " << tsv.string() << "\n";
  }
};

void register_train(CLI::App& app, TrainCmd& state) {
  CLI::App* cmd = app.add_subcommand("train", "train class hypervectors");
  state.cmd = cmd;
  add_dataset_options(cmd, state.data, "", "training", true);
  add_csv_options(cmd, state.csv);
  cmd->add_option("--strategy", state.strategy, "baseline | retrain | retrain-enhanced | lehdc")
      ->required()
      ->check(CLI::IsMember(kStrategyNames));
  cmd->add_option("--preset", state.preset, "per-dataset lehdc hyperparameter row")
      ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--dim", state.dim, "hypervector dimension (default 10000)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--levels", state.levels, "quantization levels (default by data kind)");
  cmd->add_option("--seed", state.seed, "seed for encoding and training (default 1)");
  cmd->add_option("--model-out", state.model_out, "model file (default model.hdcm)");
  cmd->add_option("--metrics-out", state.metrics_out, "metrics JSONL (default metrics.jsonl)");
  cmd->add_option("--weight-decay", state.weight_decay, "lehdc L2 coefficient");
  cmd->add_option("--learning-rate", state.learning_rate, "lehdc step size");
  cmd->add_option("--batch-size", state.batch_size, "lehdc mini-batch size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--dropout", state.dropout, "lehdc input dropout rate");
  cmd->add_option("--epochs", state.epochs, "lehdc epoch count");
  cmd->add_option("--val-fraction", state.val_fraction, "lehdc validation fraction");
  cmd->add_option("--latent-clip", state.latent_clip, "lehdc latent clip bound");
  cmd->add_flag("--cold-start", state.cold_start, "skip the averaging warm start");
  cmd->add_option("--alpha", state.alpha, "retraining step size");
  cmd->add_option("--alpha-first", state.alpha_first, "retraining first-epoch step size");
  cmd->add_option("--max-epochs", state.max_epochs, "retraining epoch cap");
  cmd->callback([&state] { state.run(); });
}

// ---------------------------------------------------------------------------
// eval

struct EvalCmd {
  DatasetFlags data;
  CsvFlags csv;
  std::string model_path;

  static void refuse(const std::string& field, const std::string& model_value,
                     const std::string& data_value) {
    throw std::runtime_error("refusing to evaluate: mismatched " + field + " (model " +
                             model_value + ", data " + data_value + ")");
  }

  void run() const {
    ModelBundle bundle = load_model(model_path);
    const ModelMeta& meta = bundle.model.meta();

    EncodedDataset enc;
    if (!data.cache.empty()) {
      if (raw_source_count(data) != 0) {
        throw UsageError("give either --cache or one raw dataset source, not both");
      }
      EncodedCache cached = load_encoded(data.cache);
      if (cached.data.dim != bundle.model.dim()) {
        refuse("dim", std::to_string(bundle.model.dim()), std::to_string(cached.data.dim));
      }
      if (cached.item_memory.n_features() != meta.n_features) {
        refuse("n_features", std::to_string(meta.n_features),
               std::to_string(cached.item_memory.n_features()));
      }
      if (cached.item_memory.n_levels() != meta.n_levels) {
        refuse("levels", std::to_string(meta.n_levels),
               std::to_string(cached.item_memory.n_levels()));
      }
      if (cached.item_memory.seed() != meta.encoder_seed) {
        refuse("encoder_seed", std::to_string(meta.encoder_seed),
               std::to_string(cached.item_memory.seed()));
      }
      enc = std::move(cached.data);
    } else {
      const RawDataset raw = load_raw(data, csv.to_options(), "evaluation");
      if (!bundle.item_memory) {
        throw std::runtime_error(
            "model file carries no item memory; evaluate against an encoded cache instead");
      }
      const ItemMemory& im = *bundle.item_memory;
      if (im.dim() != bundle.model.dim()) {
        refuse("dim", std::to_string(bundle.model.dim()), std::to_string(im.dim()));
      }
      if (raw.n_features != meta.n_features) {
        refuse("n_features", std::to_string(meta.n_features), std::to_string(raw.n_features));
      }
      enc = encode_dataset(raw, im, meta.encoder_seed);
    }

    const Evaluation ev = evaluate(enc, bundle.model);
    std::cout << "accuracy: " << fixed2(ev.accuracy * 100.0) << "%  (" << ev.correct << "/"
              << ev.total << ")\n";

    std::cout << "confusion matrix (rows = true class, columns = predicted):\n";
    std::cout << std::setw(6) << "";
    for (std::uint32_t k = 0; k < ev.n_classes; ++k) std::cout << std::setw(8) << k;
    std::cout << "\n";
    for (std::uint32_t t = 0; t < ev.n_classes; ++t) {
      std::cout << std::setw(6) << t;
      for (std::uint32_t p = 0; p < ev.n_classes; ++p) std::cout << std::setw(8) << ev.at(t, p);
      std::cout << "\n";
    }

    ordered_json record{{"type", "evaluation"},
                        {"accuracy", ev.accuracy},
                        {"correct", ev.correct},
                        {"total", ev.total},
                        {"n_classes", ev.n_classes}};
    ordered_json matrix = ordered_json::array();
    for (std::uint32_t t = 0; t < ev.n_classes; ++t) {
      ordered_json row = ordered_json::array();
      for (std::uint32_t p = 0; p < ev.n_classes; ++p) row.push_back(ev.at(t, p));
      matrix.push_back(std::move(row));
    }
    record["confusion"] = std::move(matrix);
    std::cout << record.dump() << "\n";
  }
};

void register_eval(CLI::App& app, EvalCmd& state) {
  CLI::App* cmd = app.add_subcommand("eval", "evaluate a saved model on a dataset");
  cmd->add_option("--model", state.model_path, "model file")->required();
  add_dataset_options(cmd, state.data, "", "evaluation", true);
  add_csv_options(cmd, state.csv);
  cmd->callback([&state] { state.run(); });
}

// ---------------------------------------------------------------------------
// compare and sweep-dim share one experiment-cell construction

struct CellEncodings {
  EncodedDataset train;
  EncodedDataset test;
};

// One deterministic experiment cell. The item memory is seeded from
// (seed, dim) so dimension sweeps regenerate fresh random material per dim
// and a compare run at the same dim reproduces the identical cell.
CellEncodings encode_cell(const RawDataset& train, const RawDataset& test, std::uint32_t dim,
                          std::uint32_t levels, std::uint64_t seed) {
  if (dim < levels) throw UsageError("dimension must be at least the number of levels");
  const std::uint64_t im_seed = derive_seed(seed, dim);
  const ItemMemory im(dim, train.n_features, levels, fit_stats(train), im_seed);
  return {encode_dataset(train, im, im_seed),
          encode_dataset(test, im, derive_seed(im_seed, 1))};
}

struct ComparePair {
  RawDataset train;
  RawDataset test;
  std::uint32_t levels = 0;
  std::uint32_t n_classes = 0;
};

ComparePair load_pair(const DatasetFlags& train_flags, const DatasetFlags& test_flags,
                      const CsvFlags& csv, std::uint32_t levels_flag) {
  ComparePair pair{load_raw(train_flags, csv.to_options(), "training"),
                   load_raw(test_flags, csv.to_options(), "test"), 0, 0};
  if (pair.train.n_features != pair.test.n_features) {
    throw std::runtime_error("training data has " + std::to_string(pair.train.n_features) +
                             " features but test data has " +
                             std::to_string(pair.test.n_features));
  }
  pair.levels = resolve_levels(levels_flag, train_flags);
  pair.n_classes = std::max(count_classes(pair.train.labels), count_classes(pair.test.labels));
  return pair;
}

struct CompareCmd {
  DatasetFlags train_flags;
  DatasetFlags test_flags;
  CsvFlags csv;
  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds;
  std::uint32_t dim = 10000;
  std::uint32_t levels = 0;
  std::string preset;
  std::uint32_t epochs = 0;
  std::string metrics_out;
  CLI::App* cmd = nullptr;

  void run() const {
    const ComparePair pair = load_pair(train_flags, test_flags, csv, levels);
    const std::vector<std::uint64_t> seed_list = seeds.empty() ? std::vector<std::uint64_t>{1}
                                                               : seeds;
    LeHDCConfig lcfg;
    if (!preset.empty()) {
      const Preset& p = kPresets.at(preset);
      lcfg.weight_decay = p.weight_decay;
      lcfg.learning_rate = p.learning_rate;
      lcfg.batch_size = p.batch_size;
      lcfg.dropout_rate = p.dropout_rate;
      lcfg.epochs = p.epochs;
    }
    if (cmd->count("--epochs") > 0) lcfg.epochs = epochs;
    RetrainConfig rcfg;

    // accs[strategy index][seed index], filled seed-major so each seed's
    // encodings are built once and shared across strategies.
    std::vector<std::vector<double>> accs(strategies.size());
    std::vector<ordered_json> cells;
    for (const std::uint64_t seed : seed_list) {
      const CellEncodings cell = encode_cell(pair.train, pair.test, dim, pair.levels, seed);
      for (std::size_t si = 0; si < strategies.size(); ++si) {
        const TrainOutcome outcome = run_strategy(parse_strategy(strategies[si]), cell.train,
                                                  pair.n_classes, seed, rcfg, lcfg);
        const double acc = evaluate(cell.test, outcome.model).accuracy * 100.0;
        accs[si].push_back(acc);
        cells.push_back(ordered_json{{"type", "cell"},
                                     {"strategy", strategies[si]},
                                     {"seed", seed},
                                     {"dim", dim},
                                     {"accuracy", acc}});
        std::cout << "cell strategy=" << strategies[si] << " seed=" << seed
                  << " accuracy=" << fixed2(acc) << "\n";
      }
    }

    std::cout << "dim=" << dim << " levels=" << pair.levels << " seeds=" << seed_list.size()
              << "\n";
    std::cout << std::left << std::setw(20) << "strategy" << "accuracy (mean±std %)\n";
    std::vector<ordered_json> summaries;
    for (std::size_t si = 0; si < strategies.size(); ++si) {
      double mean = 0.0;
      for (const double a : accs[si]) mean += a;
      mean /= static_cast<double>(accs[si].size());
      double var = 0.0;
      for (const double a : accs[si]) var += (a - mean) * (a - mean);
      var /= static_cast<double>(accs[si].size());
      const double sd = std::sqrt(var);
      std::cout << std::left << std::setw(20) << strategies[si] << fixed2(mean) << "±"
                << fixed2(sd) << "\n";
      summaries.push_back(ordered_json{{"type", "compare-summary"},
                                       {"strategy", strategies[si]},
                                       {"mean", mean},
                                       {"std", sd},
                                       {"n", accs[si].size()},
                                       {"dim", dim}});
    }

    if (!metrics_out.empty()) {
      std::ofstream out(metrics_out);
      if (!out) throw std::runtime_error("cannot open " + metrics_out + " for writing");
      for (const auto& j : cells) out << j.dump() << "\n";
      for (const auto& j : summaries) out << j.dump() << "\n";
      fs::path tsv_path = fs::path(metrics_out).replace_extension(".tsv");
      std::ofstream tsv(tsv_path);
      if (!tsv) throw std::runtime_error("cannot open " + tsv_path.string() + " for writing");
      tsv << "strategy\tseed\taccuracy\n";
      for (std::size_t si = 0; si < strategies.size(); ++si) {
        for (std::size_t j = 0; j < seed_list.size(); ++j) {
          tsv << strategies[si] << "\t" << seed_list[j] << "\t" << format_double(accs[si][j])
              << "\n";
        }
      }
      std::cout << "wrote metrics " << metrics_out << " and " << tsv_path.string() << "\n";
    }
  }
};

void register_compare(CLI::App& app, CompareCmd& state) {
  CLI::App* cmd = app.add_subcommand("compare", "run strategies x seeds, report mean±std");
  state.cmd = cmd;
  add_dataset_options(cmd, state.train_flags, "", "training", false);
  add_dataset_options(cmd, state.test_flags, "test", "test", false);
  add_csv_options(cmd, state.csv);
  cmd->add_option("--strategies", state.strategies, "comma-separated strategy list")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember(kStrategyNames));
  cmd->add_option("--seeds", state.seeds, "comma-separated seed list (default 1)")
      ->delimiter(',');
  cmd->add_option("--dim", state.dim, "hypervector dimension (default 10000)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--levels", state.levels, "quantization levels (default by data kind)");
  cmd->add_option("--preset", state.preset, "lehdc hyperparameter row")
      ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--epochs", state.epochs, "override lehdc epoch count");
  cmd->add_option("--metrics-out", state.metrics_out, "write cell records as JSONL + TSV");
  cmd->callback([&state] { state.run(); });
}

struct SweepCmd {
  DatasetFlags train_flags;
  DatasetFlags test_flags;
  CsvFlags csv;
  std::vector<std::uint32_t> dims;
  std::vector<std::string> strategies;
  std::uint64_t seed = 1;
  std::uint32_t levels = 0;
  std::string preset;
  std::uint32_t epochs = 0;
  std::string metrics_out;
  CLI::App* cmd = nullptr;

  void run() const {
    const ComparePair pair = load_pair(train_flags, test_flags, csv, levels);
    for (const std::uint32_t dim : dims) {
      if (dim < pair.levels) {
        throw UsageError("every dimension must be at least the number of levels (" +
                         std::to_string(dim) + " < " + std::to_string(pair.levels) + ")");
      }
    }
    LeHDCConfig lcfg;
    if (!preset.empty()) {
      const Preset& p = kPresets.at(preset);
      lcfg.weight_decay = p.weight_decay;
      lcfg.learning_rate = p.learning_rate;
      lcfg.batch_size = p.batch_size;
      lcfg.dropout_rate = p.dropout_rate;
      lcfg.epochs = p.epochs;
    }
    if (cmd->count("--epochs") > 0) lcfg.epochs = epochs;
    RetrainConfig rcfg;

    std::vector<ordered_json> records;
    for (const std::uint32_t dim : dims) {
      const CellEncodings cell = encode_cell(pair.train, pair.test, dim, pair.levels, seed);
      for (const std::string& strategy : strategies) {
        const TrainOutcome outcome = run_strategy(parse_strategy(strategy), cell.train,
                                                  pair.n_classes, seed, rcfg, lcfg);
        const double acc = evaluate(cell.test, outcome.model).accuracy * 100.0;
        std::cout << "dim=" << dim << " strategy=" << strategy << " accuracy=" << fixed2(acc)
                  << "\n";
        records.push_back(ordered_json{{"type", "sweep-cell"},
                                       {"dim", dim},
                                       {"strategy", strategy},
                                       {"seed", seed},
                                       {"accuracy", acc}});
      }
    }

    if (!metrics_out.empty()) {
      std::ofstream out(metrics_out);
      if (!out) throw std::runtime_error("cannot open " + metrics_out + " for writing");
      for (const auto& j : records) out << j.dump() << "\n";
      fs::path tsv_path = fs::path(metrics_out).replace_extension(".tsv");
      std::ofstream tsv(tsv_path);
      if (!tsv) throw std::runtime_error("cannot open " + tsv_path.string() + " for writing");
      tsv << "dim\tstrategy\taccuracy\n";
      for (const auto& j : records) {
        tsv << j.at("dim").get<std::uint32_t>() << "\t" << j.at("strategy").get<std::string>()
            << "\t" << format_double(j.at("accuracy").get<double>()) << "\n";
      }
      std::cout << "wrote metrics " << metrics_out << " and " << tsv_path.string() << "\n";
    }
  }
};

void register_sweep(CLI::App& app, SweepCmd& state) {
  CLI::App* cmd = app.add_subcommand("sweep-dim", "accuracy across hypervector dimensions");
  state.cmd = cmd;
  add_dataset_options(cmd, state.train_flags, "", "training", false);
  add_dataset_options(cmd, state.test_flags, "test", "test", false);
  add_csv_options(cmd, state.csv);
  cmd->add_option("--dims", state.dims, "comma-separated dimension list")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  cmd->add_option("--strategies", state.strategies, "comma-separated strategy list")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember(kStrategyNames));
  cmd->add_option("--seed", state.seed, "base seed (default 1)");
  cmd->add_option("--levels", state.levels, "quantization levels (default by data kind)");
  cmd->add_option("--preset", state.preset, "lehdc hyperparameter row")
      ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--epochs", state.epochs, "override lehdc epoch count");
  cmd->add_option("--metrics-out", state.metrics_out, "write sweep records as JSONL + TSV");
  cmd->callback([&state] { state.run(); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary hyperdimensional-computing classifier toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  EncodeCmd encode_state;
  TrainCmd train_state;
  EvalCmd eval_state;
  CompareCmd compare_state;
  SweepCmd sweep_state;
  register_encode(app, encode_state);
  register_train(app, train_state);
  register_eval(app, eval_state);
  register_compare(app, compare_state);
  register_sweep(app, sweep_state);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);       // prints help or the parse error
    return code == 0 ? 0 : 2;           // any genuine parse failure is a usage error
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
