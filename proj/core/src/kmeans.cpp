#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "binary_io.hpp"
#include "binclust/kmeans.hpp"

namespace binclust {

namespace {

constexpr char kKMeansMagic[4] = {'B', 'C', 'K', '1'};
constexpr std::uint32_t kKMeansVersion = 1;

// Nearest centroid; ties resolve to the lowest row index.
std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> x) {
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

Matrix kmeanspp_seed(const Matrix& data, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = data.rows();
  Matrix centroids(k, data.cols());
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  chosen[pick] = true;
  for (std::size_t j = 0; j < data.cols(); ++j) centroids(0, j) = data(pick, j);

  std::vector<double> dist_sq(n);
  for (std::size_t i = 0; i < n; ++i)
    dist_sq[i] = squared_distance(data.row(i), centroids.row(0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : dist_sq) total += d;
    std::size_t next = n;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist_sq[i];
        if (acc >= target) {
          next = i;
          break;
        }
      }
      if (next == n) next = n - 1;  // fp slack on the last partial sum
    } else {
      // All mass at the chosen centroids (duplicate-heavy data): take the
      // lowest-index point not yet chosen, or 0 when every point is taken.
      next = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) {
          next = i;
          break;
        }
    }
    chosen[next] = true;
    for (std::size_t j = 0; j < data.cols(); ++j) centroids(c, j) = data(next, j);
    for (std::size_t i = 0; i < n; ++i)
      dist_sq[i] = std::min(dist_sq[i], squared_distance(data.row(i), centroids.row(c)));
  }
  return centroids;
}

}  // namespace

std::pair<KMeansModel, Assignment> fit_kmeans(const Matrix& data,
                                              std::size_t n_clusters,
                                              std::uint64_t seed,
                                              std::size_t max_iter,
                                              double tol) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n_clusters < 1) throw InvalidK("n_clusters must be >= 1");
  if (n < n_clusters)
    throw TooFewSamples("need at least " + std::to_string(n_clusters) +
                        " samples for " + std::to_string(n_clusters) + " clusters, have " +
                        std::to_string(n));

  std::mt19937_64 rng(seed);
  KMeansModel model;
  model.seed = seed;
  model.centroids = kmeanspp_seed(data, n_clusters, rng);

  Assignment assign;
  assign.ids.assign(n, 0);
  auto assign_all = [&]() {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = nearest_centroid(model.centroids, data.row(i));
      assign.ids[i] = static_cast<std::int64_t>(j);
      inertia += squared_distance(data.row(i), model.centroids.row(j));
    }
    return inertia;
  };

  model.inertia = assign_all();
  model.inertia_log.push_back(model.inertia);

  std::vector<double> sums(n_clusters * d);
  std::vector<std::size_t> counts(n_clusters);
  for (std::size_t iter = 1; iter <= max_iter; ++iter) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(assign.ids[i]);
      ++counts[j];
      for (std::size_t c = 0; c < d; ++c) sums[j * d + c] += data(i, c);
    }
    Matrix next(n_clusters, d);
    std::vector<char> reseeded(n, 0);
    for (std::size_t j = 0; j < n_clusters; ++j) {
      if (counts[j] > 0) {
        for (std::size_t c = 0; c < d; ++c)
          next(j, c) = sums[j * d + c] / static_cast<double>(counts[j]);
      } else {
        // Reseed to the point farthest from its current centroid; ties
        // resolve to the lowest index, and a point feeds at most one
        // reseed per round.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (reseeded[i]) continue;
          const auto owner = static_cast<std::size_t>(assign.ids[i]);
          const double dd = squared_distance(data.row(i), model.centroids.row(owner));
          if (dd > far_d) {
            far_d = dd;
            far = i;
          }
        }
        reseeded[far] = 1;
        for (std::size_t c = 0; c < d; ++c) next(j, c) = data(far, c);
      }
    }

    double shift = 0.0;
    for (std::size_t j = 0; j < n_clusters; ++j)
      shift = std::max(shift, euclidean_distance(model.centroids.row(j), next.row(j)));
    model.centroids = std::move(next);
    model.inertia = assign_all();
    model.inertia_log.push_back(model.inertia);
    model.n_iter = iter;
    if (shift < tol) break;
  }
  return {std::move(model), std::move(assign)};
}

Assignment predict_kmeans(const KMeansModel& m, const Matrix& data) {
  if (data.cols() != m.dim())
    throw DimensionMismatch("model expects " + std::to_string(m.dim()) +
                            " features, data has " + std::to_string(data.cols()));
  Assignment a;
  a.ids.resize(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i)
    a.ids[i] = static_cast<std::int64_t>(nearest_centroid(m.centroids, data.row(i)));
  return a;
}

void save_kmeans(const KMeansModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out, kKMeansMagic, kKMeansVersion);
  io::write_matrix(out, m.centroids);
  io::write_f64(out, m.inertia);
  io::write_u64(out, m.n_iter);
  io::write_u64(out, m.seed);
  io::write_f64_vector(out, m.inertia_log);
}

KMeansModel load_kmeans(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  io::read_magic(in, kKMeansMagic);
  KMeansModel m;
  m.centroids = io::read_matrix(in);
  m.inertia = io::read_f64(in);
  m.n_iter = io::read_u64(in);
  m.seed = io::read_u64(in);
  m.inertia_log = io::read_f64_vector(in);
  return m;
}

}  // namespace binclust
