#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "binclust/dataset.hpp"
#include "binclust/embed.hpp"
#include "binclust/linkage.hpp"
#include "binclust/metrics.hpp"

namespace binclust {

// One clustering algorithm plus its fixed parameters. The swept axis
// (cluster count or epsilon) comes from the grid, not from here.
struct ClustererSpec {
  std::string algo;  // kmeans | birch | dbscan | hac

  double threshold = 0.0;  // birch; 0 = derive from the data
  std::size_t branching_factor = 50;
  std::size_t min_pts = 5;         // dbscan
  std::size_t subset_size = 0;     // hac; 0 = min(n, 20000)
  Linkage linkage = Linkage::Ward;

  bool sweeps_cluster_counts() const { return algo != "dbscan"; }
  // Canonical parameter snapshot with the swept value filled in.
  std::string param_string(double param) const;
};

struct DatasetSource {
  std::string name;
  std::filesystem::path path;  // empty when synthetic
  std::optional<SyntheticSpec> synthetic;
  std::filesystem::path test_path;  // optional predefined test split
  std::string elimination = "auto";  // auto | none | <list path>
  std::vector<std::size_t> cluster_counts;  // overrides the grid list
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct AblationSpec {
  std::vector<std::size_t> component_counts;
  std::size_t kmeans_k = 0;  // 0 = first grid cluster count
};

struct ExperimentConfig {
  std::vector<DatasetSource> datasets;
  std::vector<EmbedConfig> representations;
  std::vector<ClustererSpec> clusterers;
  std::vector<std::size_t> cluster_counts;
  std::vector<double> epsilon_levels;
  std::vector<std::uint64_t> seeds;
  std::size_t parallel_runs = 1;
  SplitSpec split;
  NoisePolicy noise_policy = NoisePolicy::NoiseAsSingletons;
  AblationSpec ablation;

  // Structural checks; throws ConfigError. The sweep lists must match the
  // clusterer mix: epsilon levels exactly when a dbscan clusterer exists,
  // cluster counts exactly when any other algorithm exists.
  void validate() const;
};

// Plain-text sectioned key=value format; see the schema in the README.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

struct RunRecord {
  std::string config_key;  // canonical sortable slice identity
  std::string dataset;
  std::string representation;
  std::string clusterer;
  std::string params;
  std::uint64_t seed = 0;
  std::size_t n_clusters_effective = 0;
  double h_train = 0.0;
  double h_test = 0.0;
  double vm_train = 0.0;
  double vm_test = 0.0;
  double wall_time = 0.0;  // seconds
  bool failed = false;
  std::string error;

  bool operator==(const RunRecord&) const = default;
};

// `ds=...|rep=...|alg=...|p=...|seed=...` with zero-padded numbers so the
// lexicographic order of keys is the canonical grid order.
std::string make_config_key(const std::string& dataset, const std::string& representation,
                            const std::string& algo, const std::string& param_string,
                            std::uint64_t seed);

// Train/test feature matrices for one (dataset, representation) pair,
// after elimination, preprocessing, and embedding. Fit artifacts come from
// the train split only.
struct PreparedSlice {
  std::string dataset;
  std::string representation;
  Matrix train;
  Matrix test;
  std::vector<Label> train_labels;
  std::vector<Label> test_labels;
};

// Fits the clusterer on the slice's train matrix, predicts the test
// matrix, and evaluates both splits. `param` is the swept value: the
// cluster count (as a real) or epsilon for dbscan. Deterministic per seed.
RunRecord run_single(const PreparedSlice& slice, const ClustererSpec& cs, double param,
                     std::uint64_t seed, NoisePolicy policy);

struct GridResult {
  std::vector<RunRecord> records;  // sorted by config_key
  std::size_t n_failed = 0;
};

// Runs the full Cartesian grid. With a non-empty checkpoint path, finished
// runs are appended there as they complete and already-checkpointed keys
// are not re-run, so an interrupted grid resumes to the same record set.
// BINCLUST_WORKERS overrides parallel_runs when set.
GridResult run_grid(const ExperimentConfig& cfg,
                    const std::filesystem::path& checkpoint = {});

// K-Means ablation over embedding widths: every representation method in
// the config crossed with `component_counts`, k fixed to
// ablation.kmeans_k, first grid seed only.
GridResult run_ablation(const ExperimentConfig& cfg,
                        const std::vector<std::size_t>& component_counts,
                        const std::filesystem::path& checkpoint = {});

// ---- Reports ----

enum class ReportFormat { Delimited, Json };

struct ReportSummary {
  std::vector<RunRecord> best_rows;  // per dataset, max h_train, ties by key
  std::size_t n_records = 0;
  std::size_t n_failed = 0;
};

// Writes records in canonical key order to `path`, plus the per-dataset
// best-row summary next to it (`<stem>.best<ext>`). Failed rows never win
// a summary slot.
ReportSummary emit_report(std::vector<RunRecord> records,
                          const std::filesystem::path& path, ReportFormat format);

std::vector<RunRecord> load_report_json(const std::filesystem::path& path);

// Ablation pivot: one delimited row per (dataset, method) with one
// homogeneity column per component count.
void emit_ablation_pivot(const std::vector<RunRecord>& records,
                         const std::filesystem::path& path);

// JSONL checkpoint file: one record per line, append-only.
void append_run_record(const std::filesystem::path& path, const RunRecord& r);
std::vector<RunRecord> load_run_records(const std::filesystem::path& path);

}  // namespace binclust
