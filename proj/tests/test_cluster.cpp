#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "binclust/assignment.hpp"
#include "binclust/birch.hpp"
#include "binclust/dbscan.hpp"
#include "binclust/errors.hpp"
#include "binclust/hac.hpp"
#include "binclust/kdtree.hpp"
#include "binclust/kmeans.hpp"
#include "binclust/matrix.hpp"
#include "binclust/metrics.hpp"
#include "oracles/oracles.hpp"

using namespace binclust;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "binclust_test_cluster";
  fs::create_directories(dir);
  return dir;
}

Matrix random_uniform(std::size_t n, std::size_t d, std::uint64_t seed, double lo = 0.0,
                      double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

// `centers_per_axis` well-separated Gaussian blobs on a grid; truth[i] is
// the blob index of row i.
Matrix blobs(std::size_t n, std::size_t d, std::size_t n_blobs, double spread,
             double stddev, std::uint64_t seed, std::vector<std::int64_t>* truth) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, stddev);
  std::uniform_int_distribution<std::size_t> pick(0, n_blobs - 1);
  std::vector<std::vector<double>> centers(n_blobs, std::vector<double>(d, 0.0));
  std::normal_distribution<double> center_gauss(0.0, spread);
  for (auto& c : centers)
    for (double& v : c) v = center_gauss(rng);
  Matrix m(n, d);
  if (truth) truth->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = pick(rng);
    if (truth) (*truth)[i] = static_cast<std::int64_t>(b);
    for (std::size_t j = 0; j < d; ++j) m(i, j) = centers[b][j] + gauss(rng);
  }
  return m;
}

std::vector<Label> labels_of(const std::vector<std::int64_t>& truth) {
  std::vector<Label> out;
  out.reserve(truth.size());
  for (const std::int64_t t : truth) out.push_back(Label::make_family("f" + std::to_string(t)));
  return out;
}

double dist(const Matrix& m, std::size_t i, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const double d = m(i, j) - q[j];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

// ---- kd-tree ----

TEST_CASE("kd-tree radius queries match a linear scan") {
  Matrix pts = random_uniform(400, 3, 11);
  // Duplicate a handful of rows so exact ties exist.
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 3; ++j) pts(i + 100, j) = pts(i, j);
  const KdTree tree(pts);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (int q = 0; q < 200; ++q) {
    std::vector<double> query{u(rng), u(rng), u(rng)};
    const double radius = 0.05 + 0.3 * std::abs(u(rng));
    const auto got = tree.radius_query(query, radius);

    std::vector<std::size_t> want;
    for (std::size_t i = 0; i < pts.rows(); ++i)
      if (dist(pts, i, query) <= radius) want.push_back(i);
    CHECK(got == want);
    CHECK(std::is_sorted(got.begin(), got.end()));
  }
}

TEST_CASE("kd-tree nearest matches a linear scan and breaks ties low") {
  Matrix pts = random_uniform(300, 4, 21);
  for (std::size_t j = 0; j < 4; ++j) pts(250, j) = pts(40, j);  // exact duplicate
  const KdTree tree(pts);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int q = 0; q < 200; ++q) {
    std::vector<double> query{u(rng), u(rng), u(rng), u(rng)};
    const std::size_t got = tree.nearest(query);
    std::size_t want = 0;
    double best = dist(pts, 0, query);
    for (std::size_t i = 1; i < pts.rows(); ++i) {
      const double d = dist(pts, i, query);
      if (d < best) {
        best = d;
        want = i;
      }
    }
    CHECK(got == want);  // the scan's strict < also lands on the lowest index
    CHECK(dist(pts, got, query) == doctest::Approx(best).epsilon(1e-12));
  }

  // Query exactly on the duplicated coordinates: the lower row wins.
  std::vector<double> dup(pts.row(40).begin(), pts.row(40).end());
  CHECK(tree.nearest(dup) == 40);
}

TEST_CASE("kd-tree error handling") {
  const KdTree empty;
  std::vector<double> q{0.0};
  CHECK_THROWS_AS(empty.nearest(q), EmptyDataset);

  const KdTree tree(random_uniform(10, 3, 1));
  std::vector<double> wrong{0.0, 0.0};
  CHECK_THROWS_AS(tree.nearest(wrong), DimensionMismatch);
  CHECK_THROWS_AS(tree.radius_query(wrong, 1.0), DimensionMismatch);
}

// ---- k-means ----

TEST_CASE("kmeans with k equal to n drives inertia to zero") {
  const Matrix x = random_uniform(25, 4, 3);
  const auto [model, assign] = fit_kmeans(x, 25, 7);
  CHECK(model.inertia <= 1e-15);
  CHECK(assign.n_found() == 25);
}

TEST_CASE("kmeans separates well-spaced blobs") {
  std::vector<std::int64_t> truth;
  const Matrix x = blobs(600, 5, 4, 20.0, 0.3, 13, &truth);
  const auto [model, assign] = fit_kmeans(x, 4, 1);
  const MetricsReport r = evaluate(labels_of(truth), assign, NoisePolicy::NoiseAsSingletons);
  CHECK(r.h >= 0.999);
  CHECK(r.c >= 0.999);
}

TEST_CASE("kmeans lands at or near the best reachable optimum") {
  const Matrix x = random_uniform(20, 2, 31);
  const auto [model, assign] = fit_kmeans(x, 3, 5);

  for (std::uint64_t s = 0; s < 1000; ++s)
    CHECK(model.inertia <= oracle::random_assignment_inertia(x, 3, s) + 1e-12);

  // A single run may stop in a local optimum, but it can never beat the
  // exhaustive floor, and the best of a few restarts must come close to it.
  const double best = oracle::exhaustive_lloyd_best_inertia(x, 3);
  CHECK(model.inertia >= best - 1e-9);
  double best_restart = model.inertia;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto [m, a] = fit_kmeans(x, 3, s);
    CHECK(m.inertia >= best - 1e-9);
    best_restart = std::min(best_restart, m.inertia);
  }
  CHECK(best_restart <= best * 1.05 + 1e-12);
}

TEST_CASE("kmeans inertia log never increases") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = random_uniform(120, 6, 900 + seed, -2.0, 2.0);
    const auto [model, assign] = fit_kmeans(x, 8, seed);
    REQUIRE(model.inertia_log.size() >= 1);
    for (std::size_t i = 1; i < model.inertia_log.size(); ++i) {
      const double prev = model.inertia_log[i - 1];
      CHECK(model.inertia_log[i] <= prev + 1e-9 * std::max(1.0, std::abs(prev)));
    }
    CHECK(model.inertia == model.inertia_log.back());
  }
}

TEST_CASE("kmeans predict reproduces the training assignment") {
  const Matrix x = random_uniform(200, 4, 17, -1.0, 1.0);
  const auto [model, assign] = fit_kmeans(x, 6, 2);
  const Assignment again = predict_kmeans(model, x);
  CHECK(again == assign);
}

TEST_CASE("kmeans predict breaks distance ties toward the lower id") {
  KMeansModel m;
  m.centroids = Matrix(3, 2);
  // Centroids 0 and 2 coincide; centroid 1 sits elsewhere.
  m.centroids(0, 0) = 1.0;
  m.centroids(0, 1) = 1.0;
  m.centroids(1, 0) = 5.0;
  m.centroids(1, 1) = 5.0;
  m.centroids(2, 0) = 1.0;
  m.centroids(2, 1) = 1.0;
  Matrix pts(2, 2);
  pts(0, 0) = 1.0;
  pts(0, 1) = 1.0;  // tie between 0 and 2 -> 0
  pts(1, 0) = 3.0;
  pts(1, 1) = 3.0;  // equidistant from all three -> 0
  const Assignment a = predict_kmeans(m, pts);
  CHECK(a[0] == 0);
  CHECK(a[1] == 0);
}

TEST_CASE("kmeans is deterministic per seed") {
  const Matrix x = random_uniform(150, 5, 23);
  const auto [m1, a1] = fit_kmeans(x, 7, 42);
  const auto [m2, a2] = fit_kmeans(x, 7, 42);
  CHECK(a1 == a2);
  CHECK(m1.inertia == m2.inertia);
  for (std::size_t i = 0; i < m1.k(); ++i)
    for (std::size_t j = 0; j < m1.dim(); ++j)
      CHECK(m1.centroids(i, j) == m2.centroids(i, j));
}

TEST_CASE("kmeans input validation") {
  const Matrix x = random_uniform(5, 2, 1);
  CHECK_THROWS_AS(fit_kmeans(x, 0, 0), InvalidK);
  CHECK_THROWS_AS(fit_kmeans(x, 6, 0), TooFewSamples);
  KMeansModel m;
  m.centroids = Matrix(2, 3);
  CHECK_THROWS_AS(predict_kmeans(m, x), DimensionMismatch);
}

TEST_CASE("kmeans model persistence round-trips") {
  const auto dir = scratch();
  const Matrix x = random_uniform(80, 3, 5);
  const auto [model, assign] = fit_kmeans(x, 4, 9);
  save_kmeans(model, dir / "m.kmeans");
  const KMeansModel back = load_kmeans(dir / "m.kmeans");
  CHECK(back.inertia == model.inertia);
  CHECK(back.n_iter == model.n_iter);
  CHECK(back.seed == model.seed);
  CHECK(back.inertia_log == model.inertia_log);
  for (std::size_t i = 0; i < model.k(); ++i)
    for (std::size_t j = 0; j < model.dim(); ++j)
      CHECK(back.centroids(i, j) == model.centroids(i, j));
  CHECK(predict_kmeans(back, x) == assign);
}

// ---- birch ----

TEST_CASE("clustering features accumulate exactly") {
  ClusteringFeature a;
  a.ls.assign(2, 0.0);
  std::vector<double> p1{1.0, 2.0}, p2{3.0, -2.0};
  a.add_point(p1);
  a.add_point(p2);
  CHECK(a.n == 2);
  CHECK(a.ls[0] == 4.0);
  CHECK(a.ls[1] == 0.0);
  CHECK(a.ss == doctest::Approx(1 + 4 + 9 + 4).epsilon(1e-15));
  CHECK(a.centroid()[0] == 2.0);
  CHECK(a.centroid()[1] == 0.0);

  ClusteringFeature b;
  b.ls.assign(2, 0.0);
  std::vector<double> p3{5.0, 5.0};
  b.add_point(p3);
  ClusteringFeature merged = a;
  merged.merge(b);
  CHECK(merged.n == 3);
  CHECK(merged.ls[0] == 9.0);
  CHECK(merged.ls[1] == 5.0);
  CHECK(merged.ss == doctest::Approx(a.ss + 50.0).epsilon(1e-15));
}

TEST_CASE("clustering feature radius matches the two-point formula") {
  ClusteringFeature cf;
  cf.ls.assign(1, 0.0);
  std::vector<double> x0{0.0}, x2{2.0};
  cf.add_point(x0);
  cf.add_point(x2);
  // centroid 1, SS/N = 2, radius = sqrt(2 - 1) = 1
  CHECK(cf.radius() == doctest::Approx(1.0).epsilon(1e-12));

  ClusteringFeature single;
  single.ls.assign(3, 0.0);
  std::vector<double> p{4.0, -1.0, 0.5};
  single.add_point(p);
  CHECK(single.radius() <= 1e-9);  // one point: zero spread
}

TEST_CASE("birch collapses everything under a huge threshold") {
  const Matrix x = random_uniform(50, 3, 7);
  const auto [model, assign] = fit_birch(x, 100.0, 8, 1);
  CHECK(model.n_clusters == 1);
  CHECK(assign.n_found() == 1);
  for (std::size_t i = 0; i < assign.size(); ++i) CHECK(assign[i] == 0);
}

TEST_CASE("birch flags an unreachable cluster count instead of failing") {
  Matrix x(10, 2);
  for (std::size_t i = 0; i < 10; ++i) {
    x(i, 0) = 0.5;
    x(i, 1) = 0.5;
  }
  const auto [model, assign] = fit_birch(x, 10.0, 8, 5);
  CHECK(model.clipped);
  CHECK(model.n_clusters < 5);
  CHECK(model.requested_clusters == 5);
  CHECK(assign.n_found() == model.n_clusters);
}

TEST_CASE("birch recovers well-separated blobs") {
  std::vector<std::int64_t> truth;
  const Matrix x = blobs(2000, 4, 5, 25.0, 0.5, 3, &truth);
  const auto [model, assign] = fit_birch(x, 2.0, 50, 5);
  CHECK_FALSE(model.clipped);
  CHECK(model.n_clusters == 5);
  const MetricsReport r = evaluate(labels_of(truth), assign, NoisePolicy::NoiseAsSingletons);
  CHECK(r.h >= 0.95);
  CHECK(r.c >= 0.95);
}

TEST_CASE("birch tree invariants hold after many inserts") {
  const Matrix x = random_uniform(2000, 3, 41, -3.0, 3.0);
  const double threshold = 0.4;
  const auto [model, assign] = fit_birch(x, threshold, 6, 10);

  REQUIRE(!model.nodes.empty());
  CHECK(model.nodes[model.root].cf.n == 2000);

  for (const CfNode& node : model.nodes) {
    ClusteringFeature sum;
    sum.ls.assign(3, 0.0);
    if (node.is_leaf) {
      for (const std::size_t e : node.entries) sum.merge(model.leaf_entries[e]);
    } else {
      for (const std::size_t c : node.children) sum.merge(model.nodes[c].cf);
    }
    CHECK(node.cf.n == sum.n);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(std::abs(node.cf.ls[j] - sum.ls[j]) <=
            1e-9 * std::max(1.0, std::abs(sum.ls[j])));
    CHECK(std::abs(node.cf.ss - sum.ss) <= 1e-9 * std::max(1.0, std::abs(sum.ss)));
  }

  for (const ClusteringFeature& entry : model.leaf_entries)
    CHECK(entry.radius() <= threshold + 1e-9);

  // Every leaf entry is reachable from the root exactly once.
  std::vector<int> seen(model.leaf_entries.size(), 0);
  std::vector<std::size_t> stack{model.root};
  while (!stack.empty()) {
    const CfNode& node = model.nodes[stack.back()];
    stack.pop_back();
    if (node.is_leaf)
      for (const std::size_t e : node.entries) ++seen[e];
    else
      for (const std::size_t c : node.children) stack.push_back(c);
  }
  for (const int s : seen) CHECK(s == 1);
}

TEST_CASE("birch predict agrees with fit labels") {
  const Matrix x = random_uniform(500, 4, 19);
  const auto [model, assign] = fit_birch(x, 0.3, 10, 8);
  CHECK(predict_birch(model, x) == assign);

  // A point sitting exactly on a subcluster centroid gets that label.
  const std::vector<double> c0 = model.leaf_entries[0].centroid();
  Matrix probe(1, 4);
  for (std::size_t j = 0; j < 4; ++j) probe(0, j) = c0[j];
  const Assignment a = predict_birch(model, probe);
  CHECK(a[0] == model.global_labels[0]);
}

TEST_CASE("birch default threshold is positive and deterministic") {
  const Matrix x = random_uniform(300, 5, 23);
  const double t1 = default_birch_threshold(x);
  const double t2 = default_birch_threshold(x);
  CHECK(t1 > 0.0);
  CHECK(t1 == t2);
}

TEST_CASE("birch input validation") {
  const Matrix x = random_uniform(20, 2, 1);
  CHECK_THROWS_AS(fit_birch(x, 0.0, 8, 2), InvalidSpec);
  CHECK_THROWS_AS(fit_birch(x, -1.0, 8, 2), InvalidSpec);
  CHECK_THROWS_AS(fit_birch(x, 0.5, 1, 2), InvalidSpec);
  CHECK_THROWS_AS(fit_birch(x, 0.5, 8, 0), InvalidK);
  CHECK_THROWS_AS(fit_birch(Matrix(0, 2), 0.5, 8, 2), TooFewSamples);
}

TEST_CASE("birch model persistence round-trips") {
  const auto dir = scratch();
  const Matrix x = random_uniform(400, 3, 29);
  const auto [model, assign] = fit_birch(x, 0.35, 7, 6);
  save_birch(model, dir / "m.birch");
  const BirchModel back = load_birch(dir / "m.birch");
  CHECK(back.threshold == model.threshold);
  CHECK(back.branching_factor == model.branching_factor);
  CHECK(back.n_clusters == model.n_clusters);
  CHECK(back.requested_clusters == model.requested_clusters);
  CHECK(back.clipped == model.clipped);
  CHECK(back.root == model.root);
  CHECK(back.leaf_entries == model.leaf_entries);
  CHECK(back.global_labels == model.global_labels);
  REQUIRE(back.nodes.size() == model.nodes.size());
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    CHECK(back.nodes[i].cf == model.nodes[i].cf);
    CHECK(back.nodes[i].is_leaf == model.nodes[i].is_leaf);
    CHECK(back.nodes[i].children == model.nodes[i].children);
    CHECK(back.nodes[i].entries == model.nodes[i].entries);
  }
  CHECK(predict_birch(back, x) == assign);
}

// ---- dbscan ----

TEST_CASE("dbscan marks isolated points as noise") {
  Matrix x(5, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    x(i, 0) = 100.0 * static_cast<double>(i);
    x(i, 1) = 0.0;
  }
  const auto [model, assign] = fit_dbscan(x, 1.0, 2);
  CHECK(assign.noise_count() == 5);
  CHECK(assign.n_found() == 0);
}

TEST_CASE("dbscan with min_pts one produces no noise") {
  const Matrix x = random_uniform(100, 2, 3);
  const auto [model, assign] = fit_dbscan(x, 0.05, 1);
  CHECK(assign.noise_count() == 0);
}

TEST_CASE("dbscan matches the quadratic reference") {
  for (const double epsilon : {0.1, 0.3, 1.0}) {
    for (const std::size_t min_pts : {std::size_t{2}, std::size_t{5}}) {
      const Matrix x = random_uniform(300, 10, 77, 0.0, 2.0);
      const auto [model, assign] = fit_dbscan(x, epsilon, min_pts);
      const Assignment ref = oracle::brute_dbscan(x, epsilon, min_pts);
      CHECK(oracle::same_partition(assign, ref));
    }
  }
}

TEST_CASE("dbscan matches the quadratic reference on clustered data") {
  std::vector<std::int64_t> truth;
  const Matrix x = blobs(400, 3, 6, 8.0, 0.4, 15, &truth);
  for (const std::size_t min_pts : {std::size_t{2}, std::size_t{5}}) {
    const auto [model, assign] = fit_dbscan(x, 1.2, min_pts);
    CHECK(oracle::same_partition(assign, oracle::brute_dbscan(x, 1.2, min_pts)));
  }
}

TEST_CASE("dbscan predict reproduces training labels exactly") {
  const Matrix x = random_uniform(250, 4, 7, 0.0, 1.5);
  const auto [model, assign] = fit_dbscan(x, 0.4, 4);
  CHECK(predict_dbscan(model, x) == assign);
}

TEST_CASE("dbscan predict attachment rules") {
  // Two tight pairs far apart; min_pts 2 makes all four points core.
  Matrix x(4, 1);
  x(0, 0) = 0.0;
  x(1, 0) = 0.1;
  x(2, 0) = 10.0;
  x(3, 0) = 10.1;
  const auto [model, assign] = fit_dbscan(x, 0.2, 2);
  REQUIRE(assign.n_found() == 2);
  REQUIRE(model.core_rows.size() == 4);

  Matrix probes(3, 1);
  probes(0, 0) = 0.1;    // on a core point
  probes(1, 0) = 5.0;    // far from every core
  probes(2, 0) = 10.05;  // inside the second pair
  const Assignment p = predict_dbscan(model, probes);
  CHECK(p[0] == assign[1]);
  CHECK(p[1] == Assignment::kNoise);
  CHECK(p[2] == assign[2]);
}

TEST_CASE("dbscan input validation") {
  const Matrix x = random_uniform(10, 2, 1);
  CHECK_THROWS_AS(fit_dbscan(x, 0.0, 2), InvalidSpec);
  CHECK_THROWS_AS(fit_dbscan(x, -0.5, 2), InvalidSpec);
  CHECK_THROWS_AS(fit_dbscan(x, 0.5, 0), InvalidSpec);
}

TEST_CASE("dbscan model persistence round-trips") {
  const auto dir = scratch();
  const Matrix x = random_uniform(200, 3, 9, 0.0, 1.2);
  const auto [model, assign] = fit_dbscan(x, 0.3, 3);
  save_dbscan(model, dir / "m.dbscan");
  const DbscanModel back = load_dbscan(dir / "m.dbscan");
  CHECK(back.epsilon == model.epsilon);
  CHECK(back.min_pts == model.min_pts);
  CHECK(back.core_rows == model.core_rows);
  CHECK(back.core_cluster_ids == model.core_cluster_ids);
  CHECK(back.train_assignment == model.train_assignment);
  CHECK(predict_dbscan(back, x) == predict_dbscan(model, x));
}

// ---- hac ----

TEST_CASE("hac with k equal to n yields singletons") {
  const Matrix x = random_uniform(50, 2, 3);
  const auto [model, assign] = fit_hac(x, 50, 50, Linkage::Ward);
  CHECK(assign.n_found() == 50);
  // Labels are ordered by lowest member, which for singletons is identity.
  for (std::size_t i = 0; i < 50; ++i) CHECK(assign[i] == static_cast<std::int64_t>(i));
}

TEST_CASE("hac dendrogram matches the cubic reference at every level") {
  for (const Linkage linkage : {Linkage::Ward, Linkage::Average}) {
    const std::size_t n = linkage == Linkage::Ward ? 90 : 60;
    const Matrix x = random_uniform(n, 3, 1234 + static_cast<std::uint64_t>(linkage));
    const auto [model, assign] = fit_hac(x, 1, n, linkage);
    REQUIRE(model.merges.size() == n - 1);

    const auto reference = oracle::naive_linkage_partitions(x, linkage);
    REQUIRE(reference.size() == n);
    for (std::size_t level = 1; level <= n; ++level) {
      const auto cut = cut_merges(n, model.merges, level);
      Assignment got{cut};
      Assignment want{reference[n - level]};
      CHECK(oracle::same_partition(got, want));
    }
  }
}

TEST_CASE("hac merge heights never decrease") {
  for (const Linkage linkage :
       {Linkage::Ward, Linkage::Average, Linkage::Complete, Linkage::Single}) {
    const Matrix x = random_uniform(80, 2, 55);
    const auto [model, assign] = fit_hac(x, 1, 80, linkage);
    for (std::size_t i = 1; i < model.merges.size(); ++i)
      CHECK(model.merges[i].height >= model.merges[i - 1].height - 1e-12);
  }
}

TEST_CASE("hac extends subset labels to the full data") {
  std::vector<std::int64_t> truth;
  const Matrix x = blobs(2000, 3, 4, 20.0, 0.5, 99, &truth);
  const auto [model, assign] = fit_hac(x, 4, 300, Linkage::Ward, 1);
  CHECK(assign.size() == 2000);
  const MetricsReport r = evaluate(labels_of(truth), assign, NoisePolicy::NoiseAsSingletons);
  CHECK(r.h >= 0.95);
  CHECK(r.c >= 0.95);

  // Subset members keep their agglomeration labels.
  for (std::size_t pos = 0; pos < model.subset_indices.size(); ++pos)
    CHECK(assign[model.subset_indices[pos]] == model.subset_assignment[pos]);
}

TEST_CASE("hac predict uses nearest centroid with low-id ties") {
  HacModel m;
  m.n_clusters = 2;
  m.cluster_centroids = Matrix(2, 1);
  m.cluster_centroids(0, 0) = 0.0;
  m.cluster_centroids(1, 0) = 0.0;  // coincides with cluster 0
  Matrix pts(1, 1);
  pts(0, 0) = 3.0;
  const Assignment a = predict_hac(m, pts);
  CHECK(a[0] == 0);
}

TEST_CASE("cut_merges replays a hand-built dendrogram") {
  const std::vector<LinkageMerge> merges{{0, 1, 1.0}, {2, 3, 2.0}, {0, 2, 3.0}};
  CHECK(cut_merges(4, merges, 4) == std::vector<std::int64_t>{0, 1, 2, 3});
  CHECK(cut_merges(4, merges, 3) == std::vector<std::int64_t>{0, 0, 1, 2});
  CHECK(cut_merges(4, merges, 2) == std::vector<std::int64_t>{0, 0, 1, 1});
  CHECK(cut_merges(4, merges, 1) == std::vector<std::int64_t>{0, 0, 0, 0});
  CHECK_THROWS_AS(cut_merges(4, merges, 0), InvalidK);
  CHECK_THROWS_AS(cut_merges(4, merges, 5), InvalidK);
  CHECK_THROWS_AS(cut_merges(5, merges, 1), InvalidSpec);  // list too short
}

TEST_CASE("linkage names round-trip") {
  for (const Linkage l :
       {Linkage::Ward, Linkage::Average, Linkage::Complete, Linkage::Single})
    CHECK(parse_linkage(to_string(l)) == l);
  CHECK_THROWS_AS(parse_linkage("median"), Error);
}

TEST_CASE("hac input validation") {
  const Matrix x = random_uniform(30, 2, 1);
  CHECK_THROWS_AS(fit_hac(x, 0, 10, Linkage::Ward), InvalidK);
  CHECK_THROWS_AS(fit_hac(x, 5, 4, Linkage::Ward), SubsetTooSmall);
  CHECK_THROWS_AS(fit_hac(x, 5, 31, Linkage::Ward), TooFewSamples);
  const Matrix big = random_uniform(6001, 1, 2);
  CHECK_THROWS_AS(fit_hac(big, 5, 6001, Linkage::Average), InvalidSpec);
  const auto [model, assign] = fit_hac(big, 2, 6001, Linkage::Ward);  // ward has no cap
  CHECK(assign.size() == 6001);
}

TEST_CASE("hac is deterministic per seed") {
  const Matrix x = random_uniform(500, 3, 3);
  const auto [m1, a1] = fit_hac(x, 5, 120, Linkage::Average, 77);
  const auto [m2, a2] = fit_hac(x, 5, 120, Linkage::Average, 77);
  CHECK(a1 == a2);
  CHECK(m1.subset_indices == m2.subset_indices);
  CHECK(m1.merges == m2.merges);
}

TEST_CASE("hac model persistence round-trips") {
  const auto dir = scratch();
  const Matrix x = random_uniform(300, 3, 21);
  const auto [model, assign] = fit_hac(x, 6, 100, Linkage::Complete, 5);
  save_hac(model, dir / "m.hac");
  const HacModel back = load_hac(dir / "m.hac");
  CHECK(back.subset_indices == model.subset_indices);
  CHECK(back.subset_assignment == model.subset_assignment);
  CHECK(back.merges == model.merges);
  CHECK(back.linkage == model.linkage);
  CHECK(back.n_clusters == model.n_clusters);
  CHECK(back.seed == model.seed);
  for (std::size_t i = 0; i < model.cluster_centroids.rows(); ++i)
    for (std::size_t j = 0; j < model.cluster_centroids.cols(); ++j)
      CHECK(back.cluster_centroids(i, j) == model.cluster_centroids(i, j));
  CHECK(predict_hac(back, x) == predict_hac(model, x));
}
