#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "binclust/matrix.hpp"

namespace binclust {

// Column layout of a feature file: named category ranges plus the set of
// column indices dropped before modeling.
struct FeatureSchema {
  struct CategoryRange {
    std::string name;
    std::size_t start;          // first column of the range
    std::size_t end_inclusive;  // last column of the range
  };

  std::size_t total_columns = 0;
  std::vector<CategoryRange> category_ranges;
  std::vector<std::size_t> eliminated_indices;  // sorted, unique

  // The 2381-column static-feature layout used by the public PE datasets.
  static FeatureSchema ember();

  // Schema with no category information, total width only.
  static FeatureSchema plain(std::size_t total_columns);

  std::size_t retained_count() const { return total_columns - eliminated_indices.size(); }
  std::vector<std::size_t> retained_indices() const;

  // Checks range coverage and elimination bounds; throws InvalidSpec.
  void validate() const;
};

// Ground-truth class of a sample: a named family or the single benign class.
struct Label {
  enum class Kind { Family, Benign };

  Kind kind = Kind::Benign;
  std::string family;  // meaningful only when kind == Family

  static Label benign() { return {}; }
  static Label make_family(std::string name) {
    return {Kind::Family, std::move(name)};
  }

  bool is_benign() const { return kind == Kind::Benign; }
  bool operator==(const Label&) const = default;
  bool operator<(const Label& o) const {
    if (kind != o.kind) return kind < o.kind;
    return family < o.family;
  }

  // "benign" or "family:<name>"
  std::string to_string() const;
  static Label parse(const std::string& text);
};

enum class SplitTag { Unsplit, Train, Test };

struct Dataset {
  Matrix features;
  std::vector<Label> labels;
  std::vector<std::string> ids;
  SplitTag split_tag = SplitTag::Unsplit;

  std::size_t n() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }

  std::size_t family_count() const;  // distinct family labels (benign excluded)
  bool has_benign() const;
};

// Parameters for the synthetic family-blob generator used at desk scale.
struct SyntheticSpec {
  std::size_t n_samples = 0;
  std::size_t n_families = 1;
  double benign_fraction = 0.5;  // in (0,1)
  std::size_t dim = 2;
  double family_center_spread = 1.0;
  double within_family_stddev = 0.1;
  std::size_t benign_modes = 1;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidSpec
};

// Text format: header `id,f0,...,f{d-1},label`; binary format: magic BCB1.
// load_dataset sniffs the magic byte to pick the decoder. A schema, when
// given, pins the expected feature width (SchemaMismatch otherwise).
Dataset load_dataset(const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema);

void save_dataset_text(const Dataset& ds, const std::filesystem::path& path);
void save_dataset_binary(const Dataset& ds, const std::filesystem::path& path);

// Drops schema.eliminated_indices from ds, preserving the order of the
// retained columns. Labels and ids pass through.
Dataset eliminate_features(const Dataset& ds, const FeatureSchema& schema);

// Uniform (non-stratified) split; |train| = round(train_fraction * n).
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_fraction,
                                             std::uint64_t seed);

Dataset generate_synthetic(const SyntheticSpec& spec);

// Indices of columns constant on the given dataset; the shipped default
// elimination list for data without a curated one.
std::vector<std::size_t> detect_constant_columns(const Dataset& ds);

// Elimination list file: one column index per line.
std::vector<std::size_t> load_elimination_list(const std::filesystem::path& path);
void save_elimination_list(const std::vector<std::size_t>& indices,
                           const std::filesystem::path& path);

}  // namespace binclust
