#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "binclust/hac.hpp"
#include "linkage_internal.hpp"

namespace binclust {

namespace {

constexpr char kHacMagic[4] = {'B', 'C', 'H', '1'};
constexpr std::uint32_t kHacVersion = 1;

// Pairwise-matrix linkages hold m(m-1)/2 doubles.
constexpr std::size_t kPairwiseSubsetCap = 6000;

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

std::size_t nearest_centroid_row(const Matrix& centroids, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.rows(); ++j) {
    const double d = squared_distance(centroids.row(j), x);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

}  // namespace

std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::Ward: return "ward";
    case Linkage::Average: return "average";
    case Linkage::Complete: return "complete";
    case Linkage::Single: return "single";
  }
  return "ward";
}

Linkage parse_linkage(const std::string& s) {
  if (s == "ward") return Linkage::Ward;
  if (s == "average") return Linkage::Average;
  if (s == "complete") return Linkage::Complete;
  if (s == "single") return Linkage::Single;
  throw Error("unknown linkage '" + s + "'");
}

std::vector<std::int64_t> cut_merges(std::size_t n_items,
                                     const std::vector<LinkageMerge>& merges,
                                     std::size_t n_clusters) {
  if (n_clusters < 1 || n_clusters > n_items)
    throw InvalidK("cut level must be in [1, n_items]");
  if (n_items - n_clusters > merges.size())
    throw InvalidSpec("merge list too short for the requested level");

  std::vector<std::size_t> parent(n_items);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t s = 0; s < n_items - n_clusters; ++s) {
    const std::size_t ra = find_root(parent, merges[s].a);
    const std::size_t rb = find_root(parent, merges[s].b);
    // Attach under the smaller root so the root is the cluster's lowest
    // member, which fixes the label order below.
    parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::vector<std::int64_t> labels(n_items);
  std::vector<std::int64_t> label_of_root(n_items, -1);
  std::int64_t next = 0;
  for (std::size_t i = 0; i < n_items; ++i) {
    const std::size_t r = find_root(parent, i);
    if (label_of_root[r] < 0) label_of_root[r] = next++;
    labels[i] = label_of_root[r];
  }
  return labels;
}

std::pair<HacModel, Assignment> fit_hac(const Matrix& data, std::size_t n_clusters,
                                        std::size_t subset_size, Linkage linkage,
                                        std::uint64_t seed) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n_clusters < 1) throw InvalidK("n_clusters must be >= 1");
  if (subset_size < n_clusters)
    throw SubsetTooSmall("subset_size " + std::to_string(subset_size) +
                         " is below n_clusters " + std::to_string(n_clusters));
  if (subset_size > n)
    throw TooFewSamples("subset_size " + std::to_string(subset_size) +
                        " exceeds sample count " + std::to_string(n));
  if (linkage != Linkage::Ward && subset_size > kPairwiseSubsetCap)
    throw InvalidSpec("subset_size above " + std::to_string(kPairwiseSubsetCap) +
                      " needs ward linkage");

  HacModel m;
  m.linkage = linkage;
  m.n_clusters = n_clusters;
  m.seed = seed;

  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < subset_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  m.subset_indices.assign(pool.begin(), pool.begin() + subset_size);
  std::sort(m.subset_indices.begin(), m.subset_indices.end());

  Matrix subset(subset_size, d);
  for (std::size_t i = 0; i < subset_size; ++i)
    for (std::size_t j = 0; j < d; ++j) subset(i, j) = data(m.subset_indices[i], j);

  if (linkage == Linkage::Ward) {
    m.merges = internal::sorted_by_height(
        internal::ward_chain(std::vector<double>(subset_size, 1.0), subset));
  } else {
    m.merges = internal::sorted_by_height(internal::pairwise_chain(linkage, subset));
  }
  m.subset_assignment.ids = cut_merges(subset_size, m.merges, n_clusters);

  m.cluster_centroids = Matrix(n_clusters, d);
  std::vector<std::size_t> counts(n_clusters, 0);
  for (std::size_t i = 0; i < subset_size; ++i) {
    const auto c = static_cast<std::size_t>(m.subset_assignment.ids[i]);
    ++counts[c];
    for (std::size_t j = 0; j < d; ++j) m.cluster_centroids(c, j) += subset(i, j);
  }
  for (std::size_t c = 0; c < n_clusters; ++c)
    for (std::size_t j = 0; j < d; ++j)
      m.cluster_centroids(c, j) /= static_cast<double>(counts[c]);

  Assignment assign;
  assign.ids.resize(n);
  std::vector<std::int64_t> subset_label_of(n, -1);
  for (std::size_t i = 0; i < subset_size; ++i)
    subset_label_of[m.subset_indices[i]] = m.subset_assignment.ids[i];
  for (std::size_t i = 0; i < n; ++i) {
    assign.ids[i] = subset_label_of[i] >= 0
                        ? subset_label_of[i]
                        : static_cast<std::int64_t>(
                              nearest_centroid_row(m.cluster_centroids, data.row(i)));
  }
  return {std::move(m), std::move(assign)};
}

Assignment predict_hac(const HacModel& m, const Matrix& data) {
  if (data.cols() != m.dim())
    throw DimensionMismatch("model expects " + std::to_string(m.dim()) +
                            " features, data has " + std::to_string(data.cols()));
  Assignment a;
  a.ids.resize(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i)
    a.ids[i] =
        static_cast<std::int64_t>(nearest_centroid_row(m.cluster_centroids, data.row(i)));
  return a;
}

void save_hac(const HacModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out, kHacMagic, kHacVersion);
  io::write_string(out, to_string(m.linkage));
  io::write_u64(out, m.n_clusters);
  io::write_u64(out, m.seed);
  io::write_u64(out, m.subset_indices.size());
  for (std::size_t i : m.subset_indices) io::write_u64(out, i);
  io::write_u64(out, m.subset_assignment.ids.size());
  for (std::int64_t v : m.subset_assignment.ids) io::write_i64(out, v);
  io::write_u64(out, m.merges.size());
  for (const LinkageMerge& mg : m.merges) {
    io::write_u64(out, mg.a);
    io::write_u64(out, mg.b);
    io::write_f64(out, mg.height);
  }
  io::write_matrix(out, m.cluster_centroids);
}

HacModel load_hac(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  io::read_magic(in, kHacMagic);
  HacModel m;
  m.linkage = parse_linkage(io::read_string(in));
  m.n_clusters = io::read_u64(in);
  m.seed = io::read_u64(in);
  m.subset_indices.resize(io::read_u64(in));
  for (std::size_t& i : m.subset_indices) i = io::read_u64(in);
  m.subset_assignment.ids.resize(io::read_u64(in));
  for (std::int64_t& v : m.subset_assignment.ids) v = io::read_i64(in);
  m.merges.resize(io::read_u64(in));
  for (LinkageMerge& mg : m.merges) {
    mg.a = io::read_u64(in);
    mg.b = io::read_u64(in);
    mg.height = io::read_f64(in);
  }
  m.cluster_centroids = io::read_matrix(in);
  return m;
}

}  // namespace binclust
