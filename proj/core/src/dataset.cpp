#include "binclust/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "binary_io.hpp"

namespace binclust {

namespace {

constexpr char kDatasetMagic[4] = {'B', 'C', 'B', '1'};
constexpr std::uint32_t kDatasetVersion = 1;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw MalformedRow(line_no, "not a number: '" + s + "'");
  return v;
}

void format_double(std::string& out, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

void check_field_text(const std::string& s, std::size_t line_no) {
  if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
    throw MalformedRow(line_no, "field contains a delimiter: '" + s + "'");
}

Dataset load_dataset_text(const std::filesystem::path& path,
                          const FeatureSchema* schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw EmptyDataset("empty file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line);
  if (header.size() < 3 || header.front() != "id" || header.back() != "label")
    throw MalformedRow(1, "header must be id,<features...>,label");
  const std::size_t d = header.size() - 2;
  if (schema && d != schema->total_columns)
    throw SchemaMismatch(schema->total_columns, d);

  Dataset ds;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != d + 2)
      throw MalformedRow(line_no, "expected " + std::to_string(d + 2) + " fields, got " +
                                      std::to_string(fields.size()));
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = parse_double(fields[j + 1], line_no);
      if (!std::isfinite(row[j]))
        throw MalformedRow(line_no, "non-finite value in sample '" + fields[0] + "'");
    }
    rows.push_back(std::move(row));
    ds.ids.push_back(fields[0]);
    ds.labels.push_back(Label::parse(fields.back()));
  }
  if (rows.empty()) throw EmptyDataset("no data rows in " + path.string());
  ds.features = Matrix::from_rows(rows);
  return ds;
}

Dataset load_dataset_binary(const std::filesystem::path& path,
                            const FeatureSchema* schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (io::read_magic(in, kDatasetMagic) != kDatasetVersion)
    throw IoError("unsupported dataset blob version");
  const std::uint64_t n = io::read_u64(in);
  const std::uint64_t d = io::read_u64(in);
  if (n == 0) throw EmptyDataset("binary dataset has zero rows: " + path.string());
  if (schema && d != schema->total_columns)
    throw SchemaMismatch(schema->total_columns, d);

  Dataset ds;
  ds.features = Matrix(n, d);
  for (std::uint64_t i = 0; i < n * d; ++i) {
    const double v = io::read_f64(in);
    if (!std::isfinite(v))
      throw MalformedRow(static_cast<std::size_t>(i / d), "non-finite value");
    ds.features.data()[i] = v;
  }
  ds.split_tag = static_cast<SplitTag>(io::read_u8(in));
  ds.ids.reserve(n);
  ds.labels.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    ds.ids.push_back(io::read_string(in));
    const std::uint8_t kind = io::read_u8(in);
    if (kind == 0) {
      ds.labels.push_back(Label::benign());
    } else {
      ds.labels.push_back(Label::make_family(io::read_string(in)));
    }
  }
  return ds;
}

}  // namespace

FeatureSchema FeatureSchema::ember() {
  FeatureSchema s;
  s.total_columns = 2381;
  s.category_ranges = {
      {"byte_histogram", 0, 255},
      {"byte_entropy_histogram", 256, 511},
      {"string_extractor", 512, 615},
      {"general_file_info", 616, 625},
      {"header_file_info", 626, 687},
      {"section_information", 688, 942},
      {"imports_information", 943, 2222},
      {"exports_information", 2223, 2350},
      {"data_directories", 2351, 2380},
  };
  return s;
}

FeatureSchema FeatureSchema::plain(std::size_t total_columns) {
  FeatureSchema s;
  s.total_columns = total_columns;
  return s;
}

std::vector<std::size_t> FeatureSchema::retained_indices() const {
  std::vector<std::size_t> out;
  out.reserve(retained_count());
  std::size_t e = 0;
  for (std::size_t j = 0; j < total_columns; ++j) {
    if (e < eliminated_indices.size() && eliminated_indices[e] == j) {
      ++e;
      continue;
    }
    out.push_back(j);
  }
  return out;
}

void FeatureSchema::validate() const {
  if (total_columns == 0) throw InvalidSpec("schema has zero columns");
  if (!category_ranges.empty()) {
    std::size_t expected_start = 0;
    for (const auto& r : category_ranges) {
      if (r.start != expected_start || r.end_inclusive < r.start)
        throw InvalidSpec("category ranges must be contiguous and ordered");
      expected_start = r.end_inclusive + 1;
    }
    if (expected_start != total_columns)
      throw InvalidSpec("category ranges must cover all columns");
  }
  std::size_t prev = 0;
  bool first = true;
  for (std::size_t idx : eliminated_indices) {
    if (idx >= total_columns) throw IndexOutOfRange("eliminated index out of range");
    if (!first && idx <= prev) throw InvalidSpec("eliminated indices must be sorted and unique");
    prev = idx;
    first = false;
  }
}

std::string Label::to_string() const {
  return is_benign() ? "benign" : "family:" + family;
}

Label Label::parse(const std::string& text) {
  if (text == "benign") return benign();
  if (text.rfind("family:", 0) == 0 && text.size() > 7)
    return make_family(text.substr(7));
  throw Error("bad label '" + text + "', expected 'benign' or 'family:<name>'");
}

std::size_t Dataset::family_count() const {
  std::set<std::string> fams;
  for (const auto& l : labels)
    if (!l.is_benign()) fams.insert(l.family);
  return fams.size();
}

bool Dataset::has_benign() const {
  return std::any_of(labels.begin(), labels.end(),
                     [](const Label& l) { return l.is_benign(); });
}

void SyntheticSpec::validate() const {
  if (n_samples == 0) throw InvalidSpec("n_samples must be positive");
  if (n_families < 1) throw InvalidSpec("n_families must be >= 1");
  if (!(benign_fraction > 0.0 && benign_fraction < 1.0))
    throw InvalidSpec("benign_fraction must be in (0,1)");
  if (dim == 0) throw InvalidSpec("dim must be positive");
  if (!(within_family_stddev >= 0.0)) throw InvalidSpec("within_family_stddev must be >= 0");
  if (!(family_center_spread > 0.0)) throw InvalidSpec("family_center_spread must be > 0");
  if (benign_modes < 1) throw InvalidSpec("benign_modes must be >= 1");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();
  if (std::memcmp(magic, kDatasetMagic, 4) == 0) return load_dataset_binary(path, nullptr);
  return load_dataset_text(path, nullptr);
}

Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema) {
  schema.validate();
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();
  if (std::memcmp(magic, kDatasetMagic, 4) == 0) return load_dataset_binary(path, &schema);
  return load_dataset_text(path, &schema);
}

void save_dataset_text(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  std::string line = "id";
  for (std::size_t j = 0; j < ds.dim(); ++j) line += ",f" + std::to_string(j);
  line += ",label\n";
  out << line;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    check_field_text(ds.ids[i], i + 2);
    line.clear();
    line += ds.ids[i];
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      line += ',';
      format_double(line, ds.features(i, j));
    }
    const std::string label = ds.labels[i].to_string();
    check_field_text(label, i + 2);
    line += ',';
    line += label;
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_dataset_binary(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out, kDatasetMagic, kDatasetVersion);
  io::write_u64(out, ds.n());
  io::write_u64(out, ds.dim());
  for (std::size_t i = 0; i < ds.n() * ds.dim(); ++i) io::write_f64(out, ds.features.data()[i]);
  io::write_u8(out, static_cast<std::uint8_t>(ds.split_tag));
  for (std::size_t i = 0; i < ds.n(); ++i) {
    io::write_string(out, ds.ids[i]);
    if (ds.labels[i].is_benign()) {
      io::write_u8(out, 0);
    } else {
      io::write_u8(out, 1);
      io::write_string(out, ds.labels[i].family);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset eliminate_features(const Dataset& ds, const FeatureSchema& schema) {
  for (std::size_t idx : schema.eliminated_indices)
    if (idx >= ds.dim())
      throw IndexOutOfRange("eliminated index " + std::to_string(idx) +
                            " >= dataset width " + std::to_string(ds.dim()));
  FeatureSchema bounded = schema;
  bounded.total_columns = ds.dim();
  bounded.category_ranges.clear();
  Dataset out;
  out.features = ds.features.select_columns(bounded.retained_indices());
  out.labels = ds.labels;
  out.ids = ds.ids;
  out.split_tag = ds.split_tag;
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidSpec("train_fraction must be in (0,1)");
  if (ds.split_tag != SplitTag::Unsplit)
    throw InvalidSpec("dataset is already split");
  const std::size_t n = ds.n();
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n)
    throw DegenerateSplit("split of " + std::to_string(n) + " samples at fraction " +
                          std::to_string(train_fraction) + " leaves one side empty");

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + n_train);
  std::vector<std::size_t> test_idx(perm.begin() + n_train, perm.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&](const std::vector<std::size_t>& idx, SplitTag tag) {
    Dataset out;
    out.features = ds.features.select_rows(idx);
    out.split_tag = tag;
    out.labels.reserve(idx.size());
    out.ids.reserve(idx.size());
    for (std::size_t i : idx) {
      out.labels.push_back(ds.labels[i]);
      out.ids.push_back(ds.ids[i]);
    }
    return out;
  };
  return {take(train_idx, SplitTag::Train), take(test_idx, SplitTag::Test)};
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  const std::size_t n_benign = static_cast<std::size_t>(
      std::llround(spec.benign_fraction * static_cast<double>(spec.n_samples)));
  const std::size_t n_malware = spec.n_samples - n_benign;

  // All blob centers (family blobs first, then benign modes) come from one
  // stream so the geometry is a pure function of the seed.
  const std::size_t total_blobs = spec.n_families + spec.benign_modes;
  Matrix centers(total_blobs, spec.dim);
  for (std::size_t b = 0; b < total_blobs; ++b)
    for (std::size_t j = 0; j < spec.dim; ++j)
      centers(b, j) = spec.family_center_spread * unit_normal(rng);

  // Near-equal counts per family and per benign mode.
  auto spread_counts = [](std::size_t total, std::size_t parts) {
    std::vector<std::size_t> counts(parts, total / parts);
    for (std::size_t i = 0; i < total % parts; ++i) ++counts[i];
    return counts;
  };
  const auto family_counts = spread_counts(n_malware, spec.n_families);
  const auto benign_counts = spread_counts(n_benign, spec.benign_modes);

  Dataset ds;
  ds.features = Matrix(spec.n_samples, spec.dim);
  ds.labels.reserve(spec.n_samples);
  ds.ids.reserve(spec.n_samples);
  std::size_t row = 0;
  auto emit_blob = [&](std::size_t blob, std::size_t count, const Label& label) {
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < spec.dim; ++j)
        ds.features(row, j) = centers(blob, j) + spec.within_family_stddev * unit_normal(rng);
      ds.labels.push_back(label);
      ds.ids.push_back("s" + std::to_string(row));
      ++row;
    }
  };
  for (std::size_t f = 0; f < spec.n_families; ++f)
    emit_blob(f, family_counts[f], Label::make_family("fam" + std::to_string(f)));
  for (std::size_t b = 0; b < spec.benign_modes; ++b)
    emit_blob(spec.n_families + b, benign_counts[b], Label::benign());
  return ds;
}

std::vector<std::size_t> detect_constant_columns(const Dataset& ds) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    const double first = ds.features(0, j);
    bool constant = true;
    for (std::size_t i = 1; i < ds.n(); ++i) {
      if (ds.features(i, j) != first) {
        constant = false;
        break;
      }
    }
    if (constant) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> load_elimination_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::size_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size())
      throw MalformedRow(line_no, "not an index: '" + line + "'");
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void save_elimination_list(const std::vector<std::size_t>& indices,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t idx : indices) out << idx << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace binclust
