#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

#include "binary_io.hpp"
#include "binclust/birch.hpp"
#include "linkage_internal.hpp"

namespace binclust {

namespace {

constexpr char kBirchMagic[4] = {'B', 'C', 'B', '1'};
constexpr std::uint32_t kBirchVersion = 1;

double centroid_sq_dist(const ClusteringFeature& cf, std::span<const double> x) {
  double s = 0.0;
  const double inv = 1.0 / static_cast<double>(cf.n);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = cf.ls[j] * inv - x[j];
    s += diff * diff;
  }
  return s;
}

// Splits the oversized node `idx` in two by farthest-pair seeding over the
// part centroids; returns the index of the new sibling. Parts are leaf
// entries for leaves and child nodes for internal nodes.
std::size_t split_node(BirchModel& m, std::size_t idx) {
  const bool leaf = m.nodes[idx].is_leaf;
  const std::vector<std::size_t> parts =
      leaf ? std::move(m.nodes[idx].entries) : std::move(m.nodes[idx].children);
  const std::size_t count = parts.size();

  auto part_cf = [&](std::size_t p) -> const ClusteringFeature& {
    return leaf ? m.leaf_entries[parts[p]] : m.nodes[parts[p]].cf;
  };
  std::vector<std::vector<double>> cents(count);
  for (std::size_t p = 0; p < count; ++p) cents[p] = part_cf(p).centroid();

  std::size_t seed_a = 0, seed_b = 1;
  double far = -1.0;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < cents[i].size(); ++c) {
        const double diff = cents[i][c] - cents[j][c];
        s += diff * diff;
      }
      if (s > far) {
        far = s;
        seed_a = i;
        seed_b = j;
      }
    }

  std::vector<std::size_t> keep, move;
  for (std::size_t p = 0; p < count; ++p) {
    if (p == seed_a) {
      keep.push_back(parts[p]);
      continue;
    }
    if (p == seed_b) {
      move.push_back(parts[p]);
      continue;
    }
    double da = 0.0, db = 0.0;
    for (std::size_t c = 0; c < cents[p].size(); ++c) {
      const double xa = cents[p][c] - cents[seed_a][c];
      const double xb = cents[p][c] - cents[seed_b][c];
      da += xa * xa;
      db += xb * xb;
    }
    (da <= db ? keep : move).push_back(parts[p]);
  }

  CfNode sibling;
  sibling.is_leaf = leaf;
  m.nodes.push_back(std::move(sibling));  // may reallocate: re-fetch below
  const std::size_t sib_idx = m.nodes.size() - 1;

  auto rebuild = [&](std::size_t node, const std::vector<std::size_t>& group) {
    CfNode& nd = m.nodes[node];
    nd.cf = ClusteringFeature{};
    if (leaf) {
      nd.entries = group;
      for (std::size_t e : group) nd.cf.merge(m.leaf_entries[e]);
    } else {
      nd.children = group;
      for (std::size_t c : group) nd.cf.merge(m.nodes[c].cf);
    }
  };
  rebuild(idx, keep);
  rebuild(sib_idx, move);
  return sib_idx;
}

// Returns the new sibling's node index when `idx` split, -1 otherwise.
std::int64_t insert_point(BirchModel& m, std::size_t idx, std::span<const double> x) {
  m.nodes[idx].cf.add_point(x);

  if (m.nodes[idx].is_leaf) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < m.nodes[idx].entries.size(); ++p) {
      const double d = centroid_sq_dist(m.leaf_entries[m.nodes[idx].entries[p]], x);
      if (d < best_d) {
        best_d = d;
        best = m.nodes[idx].entries[p];
      }
    }
    if (best_d < std::numeric_limits<double>::infinity()) {
      ClusteringFeature tentative = m.leaf_entries[best];
      tentative.add_point(x);
      if (tentative.radius() <= m.threshold) {
        m.leaf_entries[best] = std::move(tentative);
        return -1;
      }
    }
    ClusteringFeature fresh;
    fresh.add_point(x);
    m.leaf_entries.push_back(std::move(fresh));
    m.nodes[idx].entries.push_back(m.leaf_entries.size() - 1);
    if (m.nodes[idx].entries.size() > m.branching_factor)
      return static_cast<std::int64_t>(split_node(m, idx));
    return -1;
  }

  std::size_t pick = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < m.nodes[idx].children.size(); ++p) {
    const double d = centroid_sq_dist(m.nodes[m.nodes[idx].children[p]].cf, x);
    if (d < best_d) {
      best_d = d;
      pick = m.nodes[idx].children[p];
    }
  }
  const std::int64_t sibling = insert_point(m, pick, x);
  if (sibling >= 0) {
    m.nodes[idx].children.push_back(static_cast<std::size_t>(sibling));
    if (m.nodes[idx].children.size() > m.branching_factor)
      return static_cast<std::int64_t>(split_node(m, idx));
  }
  return -1;
}

std::size_t nearest_entry(const BirchModel& m, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < m.leaf_entries.size(); ++e) {
    const double d = centroid_sq_dist(m.leaf_entries[e], x);
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return best;
}

}  // namespace

void ClusteringFeature::add_point(std::span<const double> x) {
  if (ls.empty()) ls.assign(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    ls[j] += x[j];
    ss += x[j] * x[j];
  }
  ++n;
}

void ClusteringFeature::merge(const ClusteringFeature& other) {
  if (ls.empty()) ls.assign(other.ls.size(), 0.0);
  for (std::size_t j = 0; j < other.ls.size(); ++j) ls[j] += other.ls[j];
  ss += other.ss;
  n += other.n;
}

std::vector<double> ClusteringFeature::centroid() const {
  std::vector<double> c(ls.size());
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < ls.size(); ++j) c[j] = ls[j] * inv;
  return c;
}

double ClusteringFeature::radius() const {
  const double inv = 1.0 / static_cast<double>(n);
  double centroid_norm_sq = 0.0;
  for (double v : ls) centroid_norm_sq += (v * inv) * (v * inv);
  return std::sqrt(std::max(0.0, ss * inv - centroid_norm_sq));
}

double default_birch_threshold(const Matrix& data) {
  const std::size_t n = data.rows();
  if (n < 2) return 1.0;
  const std::size_t sample = std::min<std::size_t>(n, 1000);
  const std::size_t stride = (n + sample - 1) / sample;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n && rows.size() < sample; i += stride) rows.push_back(i);

  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      total += euclidean_distance(data.row(rows[i]), data.row(rows[j]));
      ++pairs;
    }
  const double mean = pairs > 0 ? total / static_cast<double>(pairs) : 0.0;
  return mean > 0.0 ? 0.5 * mean : 1.0;
}

std::pair<BirchModel, Assignment> fit_birch(const Matrix& data, double threshold,
                                            std::size_t branching_factor,
                                            std::size_t n_clusters) {
  if (data.rows() == 0) throw TooFewSamples("cf-tree fit on empty data");
  if (threshold <= 0.0) throw InvalidSpec("threshold must be > 0");
  if (branching_factor < 2) throw InvalidSpec("branching_factor must be >= 2");
  if (n_clusters < 1) throw InvalidK("n_clusters must be >= 1");

  BirchModel m;
  m.threshold = threshold;
  m.branching_factor = branching_factor;
  m.requested_clusters = n_clusters;

  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto x = data.row(i);
    if (m.nodes.empty()) {
      ClusteringFeature first;
      first.add_point(x);
      m.leaf_entries.push_back(std::move(first));
      CfNode rootnode;
      rootnode.cf = m.leaf_entries.front();
      rootnode.entries.push_back(0);
      m.nodes.push_back(std::move(rootnode));
      m.root = 0;
      continue;
    }
    const std::int64_t sibling = insert_point(m, m.root, x);
    if (sibling >= 0) {
      CfNode new_root;
      new_root.is_leaf = false;
      new_root.cf = m.nodes[m.root].cf;
      new_root.cf.merge(m.nodes[static_cast<std::size_t>(sibling)].cf);
      new_root.children = {m.root, static_cast<std::size_t>(sibling)};
      m.nodes.push_back(std::move(new_root));
      m.root = m.nodes.size() - 1;
    }
  }

  // Global phase: Ward-merge the leaf subclusters, weighted by their
  // point counts, down to the requested cluster count.
  const std::size_t entries = m.leaf_entries.size();
  std::size_t target = n_clusters;
  if (entries < n_clusters) {
    m.clipped = true;
    target = entries;
  }
  m.n_clusters = target;

  Matrix cents(entries, data.cols());
  std::vector<double> weights(entries);
  for (std::size_t e = 0; e < entries; ++e) {
    const auto c = m.leaf_entries[e].centroid();
    for (std::size_t j = 0; j < c.size(); ++j) cents(e, j) = c[j];
    weights[e] = static_cast<double>(m.leaf_entries[e].n);
  }
  const auto merges =
      internal::sorted_by_height(internal::ward_chain(std::move(weights), cents));
  m.global_labels = cut_merges(entries, merges, target);

  Assignment assign;
  assign.ids.resize(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i)
    assign.ids[i] = m.global_labels[nearest_entry(m, data.row(i))];
  return {std::move(m), std::move(assign)};
}

Assignment predict_birch(const BirchModel& m, const Matrix& data) {
  if (data.cols() != m.dim())
    throw DimensionMismatch("model expects " + std::to_string(m.dim()) +
                            " features, data has " + std::to_string(data.cols()));
  Assignment a;
  a.ids.resize(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i)
    a.ids[i] = m.global_labels[nearest_entry(m, data.row(i))];
  return a;
}

void save_birch(const BirchModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out, kBirchMagic, kBirchVersion);
  io::write_f64(out, m.threshold);
  io::write_u64(out, m.branching_factor);
  io::write_u64(out, m.n_clusters);
  io::write_u64(out, m.requested_clusters);
  io::write_u8(out, m.clipped ? 1 : 0);
  io::write_u64(out, m.root);
  io::write_u64(out, m.nodes.size());
  for (const CfNode& nd : m.nodes) {
    io::write_u8(out, nd.is_leaf ? 1 : 0);
    io::write_i64(out, nd.cf.n);
    io::write_f64_vector(out, nd.cf.ls);
    io::write_f64(out, nd.cf.ss);
    const auto& refs = nd.is_leaf ? nd.entries : nd.children;
    io::write_u64(out, refs.size());
    for (std::size_t r : refs) io::write_u64(out, r);
  }
  io::write_u64(out, m.leaf_entries.size());
  for (const ClusteringFeature& cf : m.leaf_entries) {
    io::write_i64(out, cf.n);
    io::write_f64_vector(out, cf.ls);
    io::write_f64(out, cf.ss);
  }
  io::write_u64(out, m.global_labels.size());
  for (std::int64_t g : m.global_labels) io::write_i64(out, g);
}

BirchModel load_birch(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  io::read_magic(in, kBirchMagic);
  BirchModel m;
  m.threshold = io::read_f64(in);
  m.branching_factor = io::read_u64(in);
  m.n_clusters = io::read_u64(in);
  m.requested_clusters = io::read_u64(in);
  m.clipped = io::read_u8(in) != 0;
  m.root = io::read_u64(in);
  m.nodes.resize(io::read_u64(in));
  for (CfNode& nd : m.nodes) {
    nd.is_leaf = io::read_u8(in) != 0;
    nd.cf.n = io::read_i64(in);
    nd.cf.ls = io::read_f64_vector(in);
    nd.cf.ss = io::read_f64(in);
    auto& refs = nd.is_leaf ? nd.entries : nd.children;
    refs.resize(io::read_u64(in));
    for (std::size_t& r : refs) r = io::read_u64(in);
  }
  m.leaf_entries.resize(io::read_u64(in));
  for (ClusteringFeature& cf : m.leaf_entries) {
    cf.n = io::read_i64(in);
    cf.ls = io::read_f64_vector(in);
    cf.ss = io::read_f64(in);
  }
  m.global_labels.resize(io::read_u64(in));
  for (std::int64_t& g : m.global_labels) g = io::read_i64(in);
  return m;
}

}  // namespace binclust
