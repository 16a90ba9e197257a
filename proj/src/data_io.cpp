#include "hdc/data_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "hdc/rng.hpp"

namespace hdc {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t hash = kFnvOffset) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= bytes[i];
    hash *= kFnvPrime;
  }
  return hash;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw FormatError(path + ": read failed");
  return data;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw FormatError(path + ": write failed");
}

std::uint32_t read_be32(const unsigned char* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

// Little-endian byte assembly for the model/cache formats.
struct Writer {
  std::string buf;

  void u8(std::uint8_t v) { buf.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void tag(const char* t) { buf.append(t, 4); }
  void checksum() { u64(fnv1a(buf.data(), buf.size())); }
};

struct Reader {
  const std::string& data;
  const std::string& path;
  std::size_t pos = 0;
  std::size_t limit;  // bytes before the trailing checksum

  Reader(const std::string& d, const std::string& p, std::size_t lim)
      : data(d), path(p), limit(lim) {}

  void require(std::size_t n) const {
    if (pos + n > limit) {
      throw FormatError(path + ": truncated at byte " + std::to_string(pos));
    }
  }
  std::uint8_t u8() {
    require(1);
    return static_cast<std::uint8_t>(data[pos++]);
  }
  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    require(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  void done() const {
    if (pos != limit) throw FormatError(path + ": trailing bytes after payload");
  }
};

// Verifies magic and the trailing FNV-1a checksum, returns the payload limit.
std::size_t open_checked(const std::string& data, const std::string& path, const char* magic) {
  if (data.size() < 4 || data.compare(0, 4, magic) != 0) {
    throw FormatError(path + ": bad magic (not a " + magic + " file)");
  }
  if (data.size() < 13) throw FormatError(path + ": truncated header");
  const std::size_t limit = data.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= std::uint64_t(static_cast<unsigned char>(data[limit + i])) << (8 * i);
  }
  if (fnv1a(data.data(), limit) != stored) throw FormatError(path + ": checksum mismatch");
  return limit;
}

void write_hv(Writer& w, const Hypervector& hv) {
  for (const std::uint64_t word : hv.words()) w.u64(word);
}

Hypervector read_hv(Reader& r, std::uint32_t dim) {
  Hypervector hv(dim);
  std::vector<std::uint64_t> raw(hv.word_count());
  for (auto& word : raw) word = r.u64();
  hv.assign_words(raw);
  return hv;
}

void write_item_memory(Writer& w, const ItemMemory& im) {
  w.u32(im.dim());
  w.u32(im.n_features());
  w.u32(im.n_levels());
  w.u64(im.seed());
  for (const double v : im.stats().min_values) w.f64(v);
  for (const double v : im.stats().max_values) w.f64(v);
  for (std::uint32_t f = 0; f < im.n_features(); ++f) write_hv(w, im.position(f));
  for (std::uint32_t q = 0; q < im.n_levels(); ++q) write_hv(w, im.level(q));
}

ItemMemory read_item_memory(Reader& r) {
  const std::uint32_t dim = r.u32();
  const std::uint32_t n_features = r.u32();
  const std::uint32_t n_levels = r.u32();
  const std::uint64_t seed = r.u64();
  if (dim == 0 || n_features == 0 || n_levels < 2) {
    throw FormatError(r.path + ": invalid item memory header");
  }
  FeatureStats stats;
  stats.min_values.resize(n_features);
  stats.max_values.resize(n_features);
  for (auto& v : stats.min_values) v = r.f64();
  for (auto& v : stats.max_values) v = r.f64();
  std::vector<Hypervector> positions;
  positions.reserve(n_features);
  for (std::uint32_t f = 0; f < n_features; ++f) positions.push_back(read_hv(r, dim));
  std::vector<Hypervector> levels;
  levels.reserve(n_levels);
  for (std::uint32_t q = 0; q < n_levels; ++q) levels.push_back(read_hv(r, dim));
  try {
    return ItemMemory::from_parts(dim, std::move(stats), seed, std::move(positions),
                                  std::move(levels));
  } catch (const std::invalid_argument& e) {
    throw FormatError(r.path + ": " + e.what());
  }
}

}  // namespace

RawDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const std::string img = read_file(images_path);
  if (img.size() < 16) throw FormatError(images_path + ": truncated at byte 0 (header)");
  const auto* ib = reinterpret_cast<const unsigned char*>(img.data());
  const std::uint32_t img_magic = read_be32(ib);
  if (img_magic != 0x00000803) {
    throw FormatError(images_path + ": bad magic at offset 0 (expected 0x00000803)");
  }
  const std::uint32_t count = read_be32(ib + 4);
  const std::uint32_t rows = read_be32(ib + 8);
  const std::uint32_t cols = read_be32(ib + 12);
  if (rows == 0 || cols == 0) throw FormatError(images_path + ": zero image dimensions");
  const std::uint64_t n_features = std::uint64_t(rows) * cols;
  const std::uint64_t expected = 16 + std::uint64_t(count) * n_features;
  if (img.size() != expected) {
    throw FormatError(images_path + ": size " + std::to_string(img.size()) + " != expected " +
                      std::to_string(expected) + " (truncated at byte " +
                      std::to_string(std::min<std::uint64_t>(img.size(), expected)) + ")");
  }

  const std::string lab = read_file(labels_path);
  if (lab.size() < 8) throw FormatError(labels_path + ": truncated at byte 0 (header)");
  const auto* lb = reinterpret_cast<const unsigned char*>(lab.data());
  const std::uint32_t lab_magic = read_be32(lb);
  if (lab_magic != 0x00000801) {
    throw FormatError(labels_path + ": bad magic at offset 0 (expected 0x00000801)");
  }
  const std::uint32_t lab_count = read_be32(lb + 4);
  if (lab_count != count) {
    throw FormatError(labels_path + ": label count " + std::to_string(lab_count) +
                      " != image count " + std::to_string(count));
  }
  if (lab.size() != 8 + std::uint64_t(count)) {
    throw FormatError(labels_path + ": size mismatch (truncated at byte " +
                      std::to_string(lab.size()) + ")");
  }

  RawDataset out;
  out.n_features = static_cast<std::uint32_t>(n_features);
  out.features.resize(std::uint64_t(count) * n_features);
  for (std::uint64_t i = 0; i < std::uint64_t(count) * n_features; ++i) {
    out.features[i] = static_cast<double>(ib[16 + i]);
  }
  out.labels.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) out.labels[i] = lb[8 + i];
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char delimiter,
                                      bool merge_delimiters) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == delimiter) {
      if (merge_delimiters && cur.empty()) continue;
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty() || (!merge_delimiters && !fields.empty())) fields.push_back(std::move(cur));
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin == end) return false;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

}  // namespace

RawDataset load_csv(const std::string& path, const CsvOptions& opts) {
  const std::string text = read_file(path);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_pending = opts.has_header;
  while (start <= text.size()) {
    std::size_t eol = text.find('\n', start);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(start, eol - start);
    start = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (start > text.size()) break;
      continue;
    }
    if (header_pending) {
      header_pending = false;
      continue;
    }
    rows.push_back(split_fields(line, opts.delimiter, opts.merge_delimiters));
    row_lines.push_back(line_no);
    if (start > text.size()) break;
  }
  if (rows.empty()) throw FormatError(path + ": no data rows");

  const std::size_t n_cols = rows[0].size();
  if (n_cols < 2) {
    throw FormatError(path + ": line " + std::to_string(row_lines[0]) +
                      ": need at least one feature column and a label column");
  }
  const std::size_t label_col =
      opts.label_column < 0 ? n_cols - 1 : static_cast<std::size_t>(opts.label_column);
  if (label_col >= n_cols) {
    throw FormatError(path + ": label column " + std::to_string(opts.label_column) +
                      " outside row width " + std::to_string(n_cols));
  }

  RawDataset out;
  out.n_features = static_cast<std::uint32_t>(n_cols - 1);
  out.features.reserve(rows.size() * out.n_features);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n_cols) {
      throw FormatError(path + ": line " + std::to_string(row_lines[r]) + ": expected " +
                        std::to_string(n_cols) + " columns, got " +
                        std::to_string(rows[r].size()));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (c == label_col) {
        raw_labels.push_back(rows[r][c]);
        continue;
      }
      double v = 0.0;
      if (!parse_double(rows[r][c], v)) {
        throw FormatError(path + ": line " + std::to_string(row_lines[r]) + ", column " +
                          std::to_string(c + 1) + ": not a number: '" + rows[r][c] + "'");
      }
      if (!std::isfinite(v)) {
        throw FormatError(path + ": line " + std::to_string(row_lines[r]) + ", column " +
                          std::to_string(c + 1) + ": non-finite value");
      }
      out.features.push_back(v);
    }
  }

  // Integral numeric labels map in ascending value order (stable across the
  // train/test files of one benchmark); anything else maps by first appearance.
  bool all_integral = true;
  std::vector<long long> numeric(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    double v = 0.0;
    if (!parse_double(raw_labels[i], v) || !std::isfinite(v) || std::trunc(v) != v ||
        std::abs(v) > 2147483647.0) {
      all_integral = false;
      break;
    }
    numeric[i] = static_cast<long long>(v);
  }
  if (all_integral) {
    std::set<long long> distinct(numeric.begin(), numeric.end());
    std::map<long long, std::int32_t> to_id;
    std::int32_t next = 0;
    for (const long long v : distinct) to_id[v] = next++;
    for (const long long v : distinct) out.class_names.push_back(std::to_string(v));
    out.labels.reserve(numeric.size());
    for (const long long v : numeric) out.labels.push_back(to_id[v]);
  } else {
    std::map<std::string, std::int32_t> to_id;
    out.labels.reserve(raw_labels.size());
    for (const auto& name : raw_labels) {
      auto [it, inserted] = to_id.try_emplace(name, static_cast<std::int32_t>(to_id.size()));
      if (inserted) out.class_names.push_back(name);
      out.labels.push_back(it->second);
    }
  }
  return out;
}

RawDataset load_cifar10(const std::vector<std::string>& batch_paths) {
  if (batch_paths.empty()) throw std::invalid_argument("load_cifar10: no batch files given");
  constexpr std::size_t kRecord = 1 + 3072;
  RawDataset out;
  out.n_features = 3072;
  for (const auto& path : batch_paths) {
    const std::string data = read_file(path);
    if (data.empty() || data.size() % kRecord != 0) {
      throw FormatError(path + ": size " + std::to_string(data.size()) +
                        " is not a positive multiple of " + std::to_string(kRecord));
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    const std::size_t n_records = data.size() / kRecord;
    for (std::size_t r = 0; r < n_records; ++r) {
      const unsigned char* rec = bytes + r * kRecord;
      out.labels.push_back(rec[0]);
      for (std::size_t i = 0; i < 3072; ++i) out.features.push_back(static_cast<double>(rec[1 + i]));
    }
  }
  return out;
}

namespace {

constexpr std::uint8_t kModelVersion = 1;
constexpr std::uint8_t kFlagLatent = 1;
constexpr std::uint8_t kFlagItemMemory = 2;

}  // namespace

void save_model(const ModelBundle& bundle, const std::string& path) {
  const ClassModel& model = bundle.model;
  if (bundle.latent) {
    if (bundle.latent->size() != model.n_classes()) {
      throw std::invalid_argument("save_model: latent rows != classes");
    }
    for (const auto& row : *bundle.latent) {
      if (row.size() != model.dim()) throw std::invalid_argument("save_model: latent row length != dim");
    }
  }
  Writer w;
  w.tag("HDCM");
  w.u8(kModelVersion);
  w.u8(static_cast<std::uint8_t>((bundle.latent ? kFlagLatent : 0) |
                                 (bundle.item_memory ? kFlagItemMemory : 0)));
  w.u32(model.dim());
  w.u32(model.n_classes());
  w.u64(model.meta().encoder_seed);
  w.u32(model.meta().n_features);
  w.u32(model.meta().n_levels);
  for (std::uint32_t k = 0; k < model.n_classes(); ++k) write_hv(w, model.class_hv(k));
  if (bundle.latent) {
    for (const auto& row : *bundle.latent) {
      for (const double v : row) w.f64(v);
    }
  }
  if (bundle.item_memory) write_item_memory(w, *bundle.item_memory);
  w.checksum();
  write_file(path, w.buf);
}

ModelBundle load_model(const std::string& path) {
  const std::string data = read_file(path);
  const std::size_t limit = open_checked(data, path, "HDCM");
  Reader r(data, path, limit);
  r.pos = 4;
  const std::uint8_t version = r.u8();
  if (version != kModelVersion) {
    throw FormatError(path + ": unsupported format version " + std::to_string(version));
  }
  const std::uint8_t flags = r.u8();
  if (flags & ~(kFlagLatent | kFlagItemMemory)) {
    throw FormatError(path + ": unknown flags " + std::to_string(flags));
  }
  const std::uint32_t dim = r.u32();
  const std::uint32_t n_classes = r.u32();
  if (dim == 0 || n_classes < 2) throw FormatError(path + ": invalid model header");
  ModelMeta meta;
  meta.encoder_seed = r.u64();
  meta.n_features = r.u32();
  meta.n_levels = r.u32();
  std::vector<Hypervector> class_hvs;
  class_hvs.reserve(n_classes);
  for (std::uint32_t k = 0; k < n_classes; ++k) class_hvs.push_back(read_hv(r, dim));

  std::optional<std::vector<std::vector<double>>> latent;
  if (flags & kFlagLatent) {
    latent.emplace(n_classes, std::vector<double>(dim));
    for (auto& row : *latent) {
      for (auto& v : row) v = r.f64();
    }
  }
  std::optional<ItemMemory> im;
  if (flags & kFlagItemMemory) im.emplace(read_item_memory(r));
  r.done();
  return ModelBundle{ClassModel(dim, std::move(class_hvs), meta), std::move(latent),
                     std::move(im)};
}

SplitResult split(const RawDataset& data, double fraction, bool stratified, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split: fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("split: empty dataset");

  std::vector<char> in_first(n, 0);
  std::string warning;
  bool done = false;
  if (stratified) {
    const std::int32_t n_classes = data.n_classes();
    std::vector<std::vector<std::uint32_t>> by_class(std::max(n_classes, 1));
    for (std::size_t i = 0; i < n; ++i) {
      if (data.labels[i] < 0) throw std::invalid_argument("split: negative label");
      by_class[data.labels[i]].push_back(static_cast<std::uint32_t>(i));
    }
    bool feasible = true;
    for (std::int32_t k = 0; k < n_classes; ++k) {
      if (by_class[k].empty()) continue;
      const std::size_t take = static_cast<std::size_t>(
          std::floor(fraction * static_cast<double>(by_class[k].size()) + 0.5));
      if (take == 0 || take == by_class[k].size()) {
        feasible = false;
        warning = "stratified split not applicable: class " + std::to_string(k) + " with " +
                  std::to_string(by_class[k].size()) +
                  " samples cannot be divided at fraction " + std::to_string(fraction) +
                  "; fell back to plain sampling";
        break;
      }
    }
    if (feasible) {
      const std::uint64_t base = derive_seed(seed, 1);
      for (std::int32_t k = 0; k < n_classes; ++k) {
        auto& members = by_class[k];
        if (members.empty()) continue;
        const std::size_t take = static_cast<std::size_t>(
            std::floor(fraction * static_cast<double>(members.size()) + 0.5));
        Rng class_rng = make_rng(derive_seed(base, static_cast<std::uint64_t>(k)));
        shuffle_values(members, class_rng);
        for (std::size_t j = 0; j < take; ++j) in_first[members[j]] = 1;
      }
      done = true;
    }
  }
  if (!done) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    Rng rng = make_rng(derive_seed(seed, 0));
    shuffle_values(order, rng);
    const std::size_t take =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
    for (std::size_t j = 0; j < std::min(take, n); ++j) in_first[order[j]] = 1;
  }

  SplitResult result;
  result.warning = std::move(warning);
  for (RawDataset* part : {&result.first, &result.second}) {
    part->n_features = data.n_features;
    part->class_names = data.class_names;
  }
  for (std::size_t i = 0; i < n; ++i) {
    RawDataset& part = in_first[i] ? result.first : result.second;
    const auto row = data.row(i);
    part.features.insert(part.features.end(), row.begin(), row.end());
    part.labels.push_back(data.labels[i]);
  }
  return result;
}

std::uint64_t encoding_key(const RawDataset& data, std::uint32_t dim, std::uint32_t n_levels,
                           std::uint64_t seed) {
  Writer header;
  header.tag("HDCK");
  header.u32(data.n_features);
  header.u64(data.size());
  std::uint64_t hash = fnv1a(header.buf.data(), header.buf.size());
  for (const double v : data.features) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char le[8];
    for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    hash = fnv1a(le, 8, hash);
  }
  for (const std::int32_t label : data.labels) {
    const auto v = static_cast<std::uint32_t>(label);
    unsigned char le[4];
    for (int i = 0; i < 4; ++i) le[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    hash = fnv1a(le, 4, hash);
  }
  Writer tailer;
  tailer.u32(dim);
  tailer.u32(n_levels);
  tailer.u64(seed);
  return fnv1a(tailer.buf.data(), tailer.buf.size(), hash);
}

namespace {
constexpr std::uint8_t kCacheVersion = 1;
}

void save_encoded(const EncodedDataset& data, const ItemMemory& im, std::uint64_t key,
                  const std::string& path) {
  if (data.labels.size() != data.samples.size()) {
    throw std::invalid_argument("save_encoded: labels/samples size mismatch");
  }
  for (const auto& hv : data.samples) {
    if (hv.dim() != data.dim) throw std::invalid_argument("save_encoded: sample dim mismatch");
  }
  Writer w;
  w.tag("HDCE");
  w.u8(kCacheVersion);
  w.u64(key);
  w.u32(data.dim);
  w.u64(data.size());
  for (const std::int32_t label : data.labels) w.i32(label);
  for (const auto& hv : data.samples) write_hv(w, hv);
  write_item_memory(w, im);
  w.checksum();

  const std::string tmp = path + ".tmp";
  write_file(tmp, w.buf);
  std::filesystem::rename(tmp, path);
}

EncodedCache load_encoded(const std::string& path) {
  const std::string data = read_file(path);
  const std::size_t limit = open_checked(data, path, "HDCE");
  Reader r(data, path, limit);
  r.pos = 4;
  const std::uint8_t version = r.u8();
  if (version != kCacheVersion) {
    throw FormatError(path + ": unsupported cache version " + std::to_string(version));
  }
  const std::uint64_t key = r.u64();
  const std::uint32_t dim = r.u32();
  if (dim == 0) throw FormatError(path + ": invalid cache header");
  const std::uint64_t n = r.u64();
  EncodedDataset out;
  out.dim = dim;
  out.labels.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.labels.push_back(r.i32());
  out.samples.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.samples.push_back(read_hv(r, dim));
  ItemMemory im = read_item_memory(r);
  r.done();
  return EncodedCache{std::move(out), std::move(im), key};
}

std::optional<std::uint64_t> peek_encoded_key(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char header[13];
  in.read(header, sizeof(header));
  if (in.gcount() != sizeof(header)) return std::nullopt;
  if (std::memcmp(header, "HDCE", 4) != 0) return std::nullopt;
  if (static_cast<std::uint8_t>(header[4]) != kCacheVersion) return std::nullopt;
  std::uint64_t key = 0;
  for (int i = 0; i < 8; ++i) {
    key |= std::uint64_t(static_cast<unsigned char>(header[5 + i])) << (8 * i);
  }
  return key;
}

}  // namespace hdc
