#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace binclust {

enum class Linkage { Ward, Average, Complete, Single };

std::string to_string(Linkage l);
Linkage parse_linkage(const std::string& s);

// One agglomerative merge. `a` and `b` are anchor members (original item
// indices) of the two clusters joined; replaying merges in order with a
// union-find reproduces the partition at any level.
struct LinkageMerge {
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0.0;

  bool operator==(const LinkageMerge&) const = default;
};

// Partition of `n_items` after applying the first (n_items - n_clusters)
// merges in order. Labels run 0..n_clusters-1, ordered by each cluster's
// lowest member index. Requires 1 <= n_clusters <= n_items and a merge
// list long enough to reach the requested level.
std::vector<std::int64_t> cut_merges(std::size_t n_items,
                                     const std::vector<LinkageMerge>& merges,
                                     std::size_t n_clusters);

}  // namespace binclust
