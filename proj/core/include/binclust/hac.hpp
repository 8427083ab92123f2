#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "binclust/assignment.hpp"
#include "binclust/linkage.hpp"
#include "binclust/matrix.hpp"

namespace binclust {

struct HacModel {
  std::vector<std::size_t> subset_indices;  // rows agglomerated, ascending
  Assignment subset_assignment;             // one id per subset row
  std::vector<LinkageMerge> merges;         // dendrogram, ascending height;
                                            // anchors are subset positions
  Linkage linkage = Linkage::Ward;
  Matrix cluster_centroids;  // n_clusters x dim, mean of subset members
  std::size_t n_clusters = 0;
  std::uint64_t seed = 0;

  std::size_t dim() const { return cluster_centroids.cols(); }
};

// Agglomerates a seeded uniform sample of `subset_size` rows down to
// n_clusters with the chosen linkage, then extends to the remaining rows
// by nearest cluster centroid. Subset members keep their agglomeration
// labels in the returned assignment; with subset_size == n the extension
// step is a no-op.
//
// Average, complete, and single linkage hold a full pairwise distance
// matrix, so they cap subset_size at 6000; Ward runs on cluster summaries
// and has no cap beyond n.
std::pair<HacModel, Assignment> fit_hac(const Matrix& data, std::size_t n_clusters,
                                        std::size_t subset_size, Linkage linkage,
                                        std::uint64_t seed = 0);

// Nearest cluster centroid; ties resolve to the lowest cluster id.
Assignment predict_hac(const HacModel& m, const Matrix& data);

// Persistence (magic BCH1).
void save_hac(const HacModel& m, const std::filesystem::path& path);
HacModel load_hac(const std::filesystem::path& path);

}  // namespace binclust
