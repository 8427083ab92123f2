#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "binclust/assignment.hpp"
#include "binclust/matrix.hpp"

namespace binclust {

struct KMeansModel {
  Matrix centroids;  // k x dim
  double inertia = 0.0;
  std::size_t n_iter = 0;
  std::uint64_t seed = 0;
  std::vector<double> inertia_log;  // one entry per assignment pass

  std::size_t k() const { return centroids.rows(); }
  std::size_t dim() const { return centroids.cols(); }
};

// k-means++ seeding followed by Lloyd iteration. Stops when the largest
// centroid shift drops below `tol` or after `max_iter` rounds. Empty
// clusters are reseeded to the point currently farthest from its centroid.
// The returned assignment is computed against the final centroids, so
// predict_kmeans on the training data reproduces it.
std::pair<KMeansModel, Assignment> fit_kmeans(const Matrix& data,
                                              std::size_t n_clusters,
                                              std::uint64_t seed = 0,
                                              std::size_t max_iter = 300,
                                              double tol = 1e-6);

// Nearest centroid by Euclidean distance; ties resolve to the lowest id.
Assignment predict_kmeans(const KMeansModel& m, const Matrix& data);

// Persistence (magic BCK1).
void save_kmeans(const KMeansModel& m, const std::filesystem::path& path);
KMeansModel load_kmeans(const std::filesystem::path& path);

}  // namespace binclust
