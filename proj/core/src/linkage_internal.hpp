#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "binclust/linkage.hpp"
#include "binclust/matrix.hpp"

// Agglomeration internals shared by the CF-tree global phase and the
// subset agglomeration. Both run the nearest-neighbor-chain algorithm;
// every linkage used here is reducible, so the chain produces the same
// dendrogram as greedy closest-pair merging, in a different order. Callers
// sort the returned merges by height before cutting.

namespace binclust::internal {

constexpr std::size_t kNoCluster = static_cast<std::size_t>(-1);

struct ChainState {
  std::vector<bool> alive;
  std::vector<std::size_t> anchor;  // original item index representing the cluster
  std::vector<std::size_t> chain;

  std::size_t lowest_alive() const {
    for (std::size_t i = 0; i < alive.size(); ++i)
      if (alive[i]) return i;
    return kNoCluster;
  }
};

// Sorted-by-height copy; stable so chain order breaks exact-height ties.
inline std::vector<LinkageMerge> sorted_by_height(std::vector<LinkageMerge> merges) {
  std::stable_sort(merges.begin(), merges.end(),
                   [](const LinkageMerge& x, const LinkageMerge& y) {
                     return x.height < y.height;
                   });
  return merges;
}

// Full Ward dendrogram over weighted points. Cluster summaries (weight,
// centroid) are exact under merging, so no distance matrix is needed:
// d(A,B) = wA*wB/(wA+wB) * |cA - cB|^2, the increase in within-cluster
// sum of squares. Memory O(m), time O(m^2 d).
inline std::vector<LinkageMerge> ward_chain(std::vector<double> weights,
                                            Matrix centroids) {
  const std::size_t m = centroids.rows();
  const std::size_t d = centroids.cols();
  std::vector<LinkageMerge> merges;
  if (m < 2) return merges;
  merges.reserve(m - 1);

  ChainState st;
  st.alive.assign(m, true);
  st.anchor.resize(m);
  for (std::size_t i = 0; i < m; ++i) st.anchor[i] = i;

  auto dist = [&](std::size_t i, std::size_t j) {
    const double w = weights[i] * weights[j] / (weights[i] + weights[j]);
    return w * squared_distance(centroids.row(i), centroids.row(j));
  };

  while (merges.size() < m - 1) {
    if (st.chain.empty()) st.chain.push_back(st.lowest_alive());
    const std::size_t top = st.chain.back();
    const std::size_t prev =
        st.chain.size() >= 2 ? st.chain[st.chain.size() - 2] : kNoCluster;

    std::size_t nn = kNoCluster;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (!st.alive[j] || j == top) continue;
      const double dj = dist(top, j);
      if (dj < best) {
        best = dj;
        nn = j;
      } else if (dj == best && j == prev) {
        nn = j;  // prefer the chain predecessor on exact ties
      }
    }

    if (nn == prev) {
      st.chain.pop_back();
      st.chain.pop_back();
      const std::size_t a = std::min(st.anchor[top], st.anchor[prev]);
      const std::size_t b = std::max(st.anchor[top], st.anchor[prev]);
      merges.push_back({a, b, best});
      // Reuse `top`'s slot for the merged cluster.
      const double wt = weights[top] + weights[prev];
      for (std::size_t c = 0; c < d; ++c)
        centroids(top, c) =
            (weights[top] * centroids(top, c) + weights[prev] * centroids(prev, c)) / wt;
      weights[top] = wt;
      st.anchor[top] = a;
      st.alive[prev] = false;
    } else {
      st.chain.push_back(nn);
    }
  }
  return merges;
}

// Full dendrogram for average/complete/single linkage over unweighted
// points, via a condensed Euclidean distance matrix updated in place
// (Lance-Williams in min/max/weighted-mean form). Memory O(m^2).
inline std::vector<LinkageMerge> pairwise_chain(Linkage linkage, const Matrix& points) {
  const std::size_t m = points.rows();
  std::vector<LinkageMerge> merges;
  if (m < 2) return merges;
  merges.reserve(m - 1);

  // Condensed upper triangle: entry (i, j) with i < j.
  auto didx = [m](std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return i * (m - 1) - i * (i - 1) / 2 + (j - i - 1);
  };
  std::vector<double> dm(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      dm[didx(i, j)] = euclidean_distance(points.row(i), points.row(j));

  std::vector<double> sizes(m, 1.0);
  ChainState st;
  st.alive.assign(m, true);
  st.anchor.resize(m);
  for (std::size_t i = 0; i < m; ++i) st.anchor[i] = i;

  while (merges.size() < m - 1) {
    if (st.chain.empty()) st.chain.push_back(st.lowest_alive());
    const std::size_t top = st.chain.back();
    const std::size_t prev =
        st.chain.size() >= 2 ? st.chain[st.chain.size() - 2] : kNoCluster;

    std::size_t nn = kNoCluster;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (!st.alive[j] || j == top) continue;
      const double dj = dm[didx(top, j)];
      if (dj < best) {
        best = dj;
        nn = j;
      } else if (dj == best && j == prev) {
        nn = j;
      }
    }

    if (nn == prev) {
      st.chain.pop_back();
      st.chain.pop_back();
      const std::size_t a = std::min(st.anchor[top], st.anchor[prev]);
      const std::size_t b = std::max(st.anchor[top], st.anchor[prev]);
      merges.push_back({a, b, best});
      for (std::size_t k = 0; k < m; ++k) {
        if (!st.alive[k] || k == top || k == prev) continue;
        const double da = dm[didx(k, top)];
        const double db = dm[didx(k, prev)];
        double nd = 0.0;
        switch (linkage) {
          case Linkage::Single: nd = std::min(da, db); break;
          case Linkage::Complete: nd = std::max(da, db); break;
          case Linkage::Average:
            nd = (sizes[top] * da + sizes[prev] * db) / (sizes[top] + sizes[prev]);
            break;
          case Linkage::Ward: nd = 0.0; break;  // handled by ward_chain
        }
        dm[didx(k, top)] = nd;
      }
      sizes[top] += sizes[prev];
      st.anchor[top] = a;
      st.alive[prev] = false;
    } else {
      st.chain.push_back(nn);
    }
  }
  return merges;
}

}  // namespace binclust::internal
