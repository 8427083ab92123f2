#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "binclust/assignment.hpp"
#include "binclust/matrix.hpp"

namespace binclust {

// Clustering feature: count, linear sum, and squared-norm sum of a set of
// points. Additive under merging by construction.
struct ClusteringFeature {
  std::int64_t n = 0;
  std::vector<double> ls;
  double ss = 0.0;

  void add_point(std::span<const double> x);
  void merge(const ClusteringFeature& other);
  std::vector<double> centroid() const;
  // sqrt(SS/N - |LS/N|^2); the inner term is clamped at zero against
  // floating-point cancellation.
  double radius() const;

  bool operator==(const ClusteringFeature&) const = default;
};

// One CF-tree node. Nodes live in BirchModel::nodes; children refer to
// other nodes by index, leaf entries to BirchModel::leaf_entries.
struct CfNode {
  ClusteringFeature cf;  // aggregate over the whole subtree
  bool is_leaf = true;
  std::vector<std::size_t> children;  // internal nodes: child node indices
  std::vector<std::size_t> entries;   // leaves: indices into leaf_entries
};

struct BirchModel {
  double threshold = 0.0;
  std::size_t branching_factor = 50;
  std::size_t n_clusters = 0;          // achieved count
  std::size_t requested_clusters = 0;  // asked-for count
  bool clipped = false;  // true when fewer leaf subclusters than requested

  std::vector<CfNode> nodes;
  std::size_t root = 0;
  std::vector<ClusteringFeature> leaf_entries;  // the leaf subclusters
  std::vector<std::int64_t> global_labels;      // per leaf entry, final id

  std::size_t dim() const {
    return leaf_entries.empty() ? 0 : leaf_entries.front().ls.size();
  }
};

// Single-pass CF-tree insertion (splits when a node holds more than
// branching_factor entries), then a global phase that merges the leaf
// subclusters down to n_clusters with Ward agglomeration on the CF
// statistics. When the tree yields fewer leaf subclusters than requested,
// the model is returned with `clipped` set and every subcluster its own
// cluster. Training points are labeled by their nearest leaf subcluster's
// global id, which is also exactly what predict_birch computes.
std::pair<BirchModel, Assignment> fit_birch(const Matrix& data, double threshold,
                                            std::size_t branching_factor,
                                            std::size_t n_clusters);

// Half the mean pairwise distance over a deterministic sample of at most
// 1000 rows: the default threshold when the caller gives none.
double default_birch_threshold(const Matrix& data);

// Nearest leaf-subcluster centroid (ties: lowest entry index) mapped
// through that subcluster's global label.
Assignment predict_birch(const BirchModel& m, const Matrix& data);

// Persistence (magic BCB1).
void save_birch(const BirchModel& m, const std::filesystem::path& path);
BirchModel load_birch(const std::filesystem::path& path);

}  // namespace binclust
