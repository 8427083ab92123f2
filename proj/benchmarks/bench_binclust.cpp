#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "binclust/assignment.hpp"
#include "binclust/birch.hpp"
#include "binclust/dataset.hpp"
#include "binclust/dbscan.hpp"
#include "binclust/embed.hpp"
#include "binclust/hac.hpp"
#include "binclust/kmeans.hpp"
#include "binclust/matrix.hpp"
#include "binclust/metrics.hpp"

using namespace binclust;

namespace {

Matrix random_uniform(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

Dataset synthetic(std::size_t n, std::size_t d, std::size_t families) {
  SyntheticSpec spec;
  spec.n_samples = n;
  spec.n_families = families;
  spec.benign_fraction = 0.4;
  spec.dim = d;
  spec.family_center_spread = 5.0;
  spec.within_family_stddev = 0.2;
  spec.seed = 7;
  return generate_synthetic(spec);
}

void bm_kmeans_fit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_uniform(n, 10, 1);
  for (auto _ : state) {
    auto result = fit_kmeans(x, 50, 3);
    benchmark::DoNotOptimize(result.first.inertia);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_kmeans_fit)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void bm_birch_fit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_uniform(n, 10, 2);
  for (auto _ : state) {
    auto result = fit_birch(x, 0.3, 50, 50);
    benchmark::DoNotOptimize(result.first.n_clusters);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_birch_fit)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void bm_dbscan_fit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_uniform(n, 10, 3);
  for (auto _ : state) {
    auto result = fit_dbscan(x, 0.4, 5);
    benchmark::DoNotOptimize(result.second.ids.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_dbscan_fit)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void bm_hac_fit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_uniform(n, 10, 4);
  for (auto _ : state) {
    auto result = fit_hac(x, 20, std::min<std::size_t>(n, 1000), Linkage::Ward, 1);
    benchmark::DoNotOptimize(result.first.n_clusters);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_hac_fit)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void bm_pca_fit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_uniform(n, 200, 5);
  for (auto _ : state) {
    const PcaModel m = fit_pca(x, 10);
    benchmark::DoNotOptimize(m.explained_variance.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_pca_fit)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void bm_evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset ds = synthetic(n, 8, 30);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::int64_t> pick(0, 99);
  Assignment assignment;
  for (std::size_t i = 0; i < n; ++i) assignment.ids.push_back(pick(rng));
  for (auto _ : state) {
    const MetricsReport r = evaluate(ds.labels, assignment, NoisePolicy::NoiseAsSingletons);
    benchmark::DoNotOptimize(r.v);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(bm_evaluate)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
