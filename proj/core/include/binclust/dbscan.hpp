#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "binclust/assignment.hpp"
#include "binclust/kdtree.hpp"
#include "binclust/matrix.hpp"

namespace binclust {

struct DbscanModel {
  double epsilon = 0.0;
  std::size_t min_pts = 5;
  std::vector<std::size_t> core_rows;        // fit-time row indices, ascending
  std::vector<std::int64_t> core_cluster_ids;  // per core point
  Assignment train_assignment;
  KdTree core_index;  // spatial index over the core points

  std::size_t dim() const { return core_index.dim(); }
  const Matrix& core_points() const { return core_index.points(); }
};

// Density clustering: a point is core when its epsilon-ball holds at least
// min_pts points, itself included; clusters are the connected components
// of core points under epsilon-adjacency, numbered by ascending seed row.
// Non-core points attach to the nearest core point within epsilon (ties:
// lowest cluster id, then lowest core row) or become noise. Region queries
// run through a kd-tree.
std::pair<DbscanModel, Assignment> fit_dbscan(const Matrix& data, double epsilon,
                                              std::size_t min_pts);

// Cluster of the nearest core point when that distance is <= epsilon,
// noise otherwise; same tie rule as the fit-time attachment, so training
// rows keep their fit-time ids.
Assignment predict_dbscan(const DbscanModel& m, const Matrix& data);

// Persistence (magic BCD1).
void save_dbscan(const DbscanModel& m, const std::filesystem::path& path);
DbscanModel load_dbscan(const std::filesystem::path& path);

}  // namespace binclust
