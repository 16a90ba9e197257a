#pragma once

// Dataset ingestion (IDX, delimited text, CIFAR-10-style binary batches),
// train/validation splitting, model serialization, and the encoded-dataset
// cache. All loaders either return a complete dataset or throw FormatError;
// no partial objects escape.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hdc/classifier.hpp"
#include "hdc/dataset.hpp"
#include "hdc/encoder.hpp"
#include "hdc/errors.hpp"

namespace hdc {

// Big-endian IDX pair: images magic 0x00000803, labels magic 0x00000801.
// Images are flattened row-major to rows*cols features in [0, 255].
RawDataset load_idx(const std::string& images_path, const std::string& labels_path);

struct CsvOptions {
  char delimiter = ',';
  int label_column = -1;  // -1 = last column
  bool has_header = false;
  bool merge_delimiters = false;  // collapse delimiter runs (space-padded tables)
};

// Rectangular numeric table with one label column. Integral numeric labels
// already spanning 0..K-1 are taken as-is; other integral label sets are
// mapped to contiguous ids in ascending value order (stable across files of
// the same benchmark); string labels map in first-appearance order. The raw
// values are recorded in class_names.
RawDataset load_csv(const std::string& path, const CsvOptions& opts = {});

// Binary batches of records (1 label byte + 3072 channel bytes), concatenated.
RawDataset load_cifar10(const std::vector<std::string>& batch_paths);

// Serialized model: binary class hypervectors, optional latent class vectors
// (class-major rows of dim doubles), optional item memory. Little-endian,
// version byte, trailing checksum.
struct ModelBundle {
  ClassModel model;
  std::optional<std::vector<std::vector<double>>> latent;
  std::optional<ItemMemory> item_memory;
};

void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

struct SplitResult {
  RawDataset first;     // the `fraction` share
  RawDataset second;    // the remainder
  std::string warning;  // nonempty when stratification was not applicable
};

// Disjoint, exhaustive split. Stratified mode samples per class to preserve
// proportions within rounding and falls back to plain sampling (with a
// warning) when some class is too small to stratify.
SplitResult split(const RawDataset& data, double fraction, bool stratified,
                  std::uint64_t seed);

// Content hash of (raw dataset bytes, dim, n_levels, seed); the cache key.
std::uint64_t encoding_key(const RawDataset& data, std::uint32_t dim,
                           std::uint32_t n_levels, std::uint64_t seed);

struct EncodedCache {
  EncodedDataset data;
  ItemMemory item_memory;
  std::uint64_t key = 0;
};

// Cache writes go through a temp file and rename, so readers never observe a
// half-written cache.
void save_encoded(const EncodedDataset& data, const ItemMemory& im, std::uint64_t key,
                  const std::string& path);
EncodedCache load_encoded(const std::string& path);

// Stored cache key without loading the payload; nullopt when the file is
// missing or not a cache file.
std::optional<std::uint64_t> peek_encoded_key(const std::string& path);

}  // namespace hdc
