#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <thread>

#include "binclust/birch.hpp"
#include "binclust/dbscan.hpp"
#include "binclust/hac.hpp"
#include "binclust/harness.hpp"
#include "binclust/kmeans.hpp"
#include "binclust/preprocess.hpp"

namespace binclust {

namespace {

constexpr std::size_t kHacDefaultSubsetCap = 20000;

std::string pad_size(std::size_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", v);
  return buf;
}

std::string pad_real(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%012.6f", v);
  return buf;
}

std::string pad_seed(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%020llu", static_cast<unsigned long long>(v));
  return buf;
}

std::size_t resolve_workers(std::size_t configured) {
  if (const char* env = std::getenv("BINCLUST_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw ConfigError("BINCLUST_WORKERS must be a positive integer, got '" +
                        std::string(env) + "'");
    return static_cast<std::size_t>(v);
  }
  return configured;
}

struct PreparedBase {
  Dataset train;
  Dataset test;
};

PreparedBase prepare_dataset(const DatasetSource& src, const SplitSpec& split) {
  PreparedBase base;
  if (src.synthetic) {
    const Dataset full = generate_synthetic(*src.synthetic);
    std::tie(base.train, base.test) =
        train_test_split(full, split.train_fraction, split.seed);
  } else if (!src.test_path.empty()) {
    base.train = load_dataset(src.path);
    base.train.split_tag = SplitTag::Train;
    base.test = load_dataset(src.test_path);
    base.test.split_tag = SplitTag::Test;
  } else {
    const Dataset full = load_dataset(src.path);
    std::tie(base.train, base.test) =
        train_test_split(full, split.train_fraction, split.seed);
  }

  std::vector<std::size_t> eliminated;
  if (src.elimination == "auto") {
    eliminated = detect_constant_columns(base.train);
  } else if (src.elimination != "none") {
    eliminated = load_elimination_list(src.elimination);
  }
  if (!eliminated.empty()) {
    FeatureSchema schema = FeatureSchema::plain(base.train.dim());
    schema.eliminated_indices = std::move(eliminated);
    schema.validate();
    base.train = eliminate_features(base.train, schema);
    base.test = eliminate_features(base.test, schema);
  }

  const PreprocessPipeline pipeline = fit_pipeline(base.train);
  base.train = transform(pipeline, base.train);
  base.test = transform(pipeline, base.test);
  return base;
}

PreparedSlice embed_slice(const PreparedBase& base, const EmbedConfig& rep,
                          const std::string& dataset_name) {
  PreparedSlice s;
  s.dataset = dataset_name;
  s.representation = rep.name();
  s.train_labels = base.train.labels;
  s.test_labels = base.test.labels;
  if (rep.method == EmbedMethod::Pca) {
    const PcaModel m = fit_pca(base.train.features, rep.k);
    s.train = pca_transform(m, base.train.features);
    s.test = pca_transform(m, base.test.features);
  } else {
    const AutoencoderModel m = fit_autoencoder(base.train.features, rep);
    s.train = ae_encode(m, base.train.features);
    s.test = ae_encode(m, base.test.features);
  }
  return s;
}

struct Task {
  std::size_t clusterer = 0;  // index into cfg.clusterers
  double param = 0.0;
  std::uint64_t seed = 0;
  std::string key;
};

RunRecord failed_record(const Task& t, const ExperimentConfig& cfg,
                        const std::string& dataset, const std::string& representation,
                        const std::string& what) {
  const ClustererSpec& cs = cfg.clusterers[t.clusterer];
  RunRecord r;
  r.config_key = t.key;
  r.dataset = dataset;
  r.representation = representation;
  r.clusterer = cs.algo;
  r.params = cs.param_string(t.param);
  r.seed = t.seed;
  r.failed = true;
  r.error = what;
  return r;
}

}  // namespace

std::string ClustererSpec::param_string(double param) const {
  if (algo == "dbscan") return "eps=" + pad_real(param) + ";mp=" + pad_size(min_pts);
  const std::string k = "k=" + pad_size(static_cast<std::size_t>(param));
  if (algo == "birch")
    return k + ";th=" + (threshold > 0.0 ? pad_real(threshold) : "auto") +
           ";bf=" + pad_size(branching_factor);
  if (algo == "hac")
    return k + ";ss=" + (subset_size > 0 ? pad_size(subset_size) : "auto") +
           ";ln=" + to_string(linkage);
  return k;  // kmeans
}

std::string make_config_key(const std::string& dataset, const std::string& representation,
                            const std::string& algo, const std::string& param_string,
                            std::uint64_t seed) {
  return "ds=" + dataset + "|rep=" + representation + "|alg=" + algo +
         "|p=" + param_string + "|seed=" + pad_seed(seed);
}

RunRecord run_single(const PreparedSlice& slice, const ClustererSpec& cs, double param,
                     std::uint64_t seed, NoisePolicy policy) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord r;
  r.config_key = make_config_key(slice.dataset, slice.representation, cs.algo,
                                 cs.param_string(param), seed);
  r.dataset = slice.dataset;
  r.representation = slice.representation;
  r.clusterer = cs.algo;
  r.params = cs.param_string(param);
  r.seed = seed;

  Assignment train_a, test_a;
  if (cs.algo == "kmeans") {
    const auto k = static_cast<std::size_t>(param);
    auto [model, a] = fit_kmeans(slice.train, k, seed);
    train_a = std::move(a);
    test_a = predict_kmeans(model, slice.test);
  } else if (cs.algo == "birch") {
    const auto k = static_cast<std::size_t>(param);
    const double th =
        cs.threshold > 0.0 ? cs.threshold : default_birch_threshold(slice.train);
    auto [model, a] = fit_birch(slice.train, th, cs.branching_factor, k);
    train_a = std::move(a);
    test_a = predict_birch(model, slice.test);
  } else if (cs.algo == "dbscan") {
    auto [model, a] = fit_dbscan(slice.train, param, cs.min_pts);
    train_a = std::move(a);
    test_a = predict_dbscan(model, slice.test);
  } else if (cs.algo == "hac") {
    const auto k = static_cast<std::size_t>(param);
    const std::size_t subset =
        cs.subset_size > 0 ? cs.subset_size
                           : std::min(slice.train.rows(), kHacDefaultSubsetCap);
    auto [model, a] = fit_hac(slice.train, k, subset, cs.linkage, seed);
    train_a = std::move(a);
    test_a = predict_hac(model, slice.test);
  } else {
    throw ConfigError("unknown clusterer algo '" + cs.algo + "'");
  }

  const MetricsReport train_m = evaluate(slice.train_labels, train_a, policy);
  const MetricsReport test_m = evaluate(slice.test_labels, test_a, policy);
  r.h_train = train_m.h;
  r.vm_train = train_m.v;
  r.h_test = test_m.h;
  r.vm_test = test_m.v;
  r.n_clusters_effective = train_m.n_clusters_effective;
  r.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

GridResult run_grid(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint) {
  cfg.validate();
  const std::size_t workers = resolve_workers(cfg.parallel_runs);

  std::vector<RunRecord> checkpointed;
  if (!checkpoint.empty() && std::filesystem::exists(checkpoint))
    checkpointed = load_run_records(checkpoint);
  std::vector<std::pair<std::string, const RunRecord*>> done;
  done.reserve(checkpointed.size());
  for (const RunRecord& r : checkpointed) done.emplace_back(r.config_key, &r);
  std::sort(done.begin(), done.end());
  auto find_done = [&](const std::string& key) -> const RunRecord* {
    const auto it = std::lower_bound(done.begin(), done.end(), key,
                                     [](const auto& p, const std::string& k) {
                                       return p.first < k;
                                     });
    return it != done.end() && it->first == key ? it->second : nullptr;
  };

  std::mutex checkpoint_mutex;
  auto record_done = [&](const RunRecord& r) {
    if (checkpoint.empty()) return;
    const std::lock_guard<std::mutex> lock(checkpoint_mutex);
    append_run_record(checkpoint, r);
  };

  GridResult out;
  for (const DatasetSource& ds : cfg.datasets) {
    std::optional<PreparedBase> base;
    std::string base_error;
    auto ensure_base = [&]() {
      if (base || !base_error.empty()) return;
      try {
        base = prepare_dataset(ds, cfg.split);
      } catch (const std::exception& e) {
        base_error = "dataset preparation failed: " + std::string(e.what());
      }
    };

    const std::vector<std::size_t>& counts =
        ds.cluster_counts.empty() ? cfg.cluster_counts : ds.cluster_counts;

    for (const EmbedConfig& rep : cfg.representations) {
      const std::string rep_name = rep.name();
      std::vector<Task> tasks;
      for (std::size_t c = 0; c < cfg.clusterers.size(); ++c) {
        const ClustererSpec& cs = cfg.clusterers[c];
        std::vector<double> params;
        if (cs.sweeps_cluster_counts())
          for (std::size_t k : counts) params.push_back(static_cast<double>(k));
        else
          params = cfg.epsilon_levels;
        for (double p : params)
          for (std::uint64_t seed : cfg.seeds)
            tasks.push_back({c, p, seed,
                             make_config_key(ds.name, rep_name, cs.algo,
                                             cs.param_string(p), seed)});
      }

      std::vector<Task> pending;
      for (Task& t : tasks) {
        if (const RunRecord* hit = find_done(t.key))
          out.records.push_back(*hit);
        else
          pending.push_back(std::move(t));
      }
      if (pending.empty()) continue;

      ensure_base();
      std::optional<PreparedSlice> slice;
      std::string slice_error = base_error;
      if (slice_error.empty()) {
        try {
          slice = embed_slice(*base, rep, ds.name);
        } catch (const std::exception& e) {
          slice_error = "embedding failed: " + std::string(e.what());
        }
      }

      std::vector<RunRecord> results(pending.size());
      if (!slice_error.empty()) {
        for (std::size_t i = 0; i < pending.size(); ++i) {
          results[i] = failed_record(pending[i], cfg, ds.name, rep_name, slice_error);
          record_done(results[i]);
        }
      } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
          while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) break;
            const Task& t = pending[i];
            try {
              results[i] = run_single(*slice, cfg.clusterers[t.clusterer], t.param,
                                      t.seed, cfg.noise_policy);
            } catch (const std::exception& e) {
              results[i] = failed_record(t, cfg, ds.name, rep_name, e.what());
            }
            record_done(results[i]);
          }
        };
        if (workers <= 1 || pending.size() <= 1) {
          worker();
        } else {
          std::vector<std::thread> pool;
          const std::size_t spawn = std::min(workers, pending.size());
          pool.reserve(spawn);
          for (std::size_t w = 0; w < spawn; ++w) pool.emplace_back(worker);
          for (std::thread& th : pool) th.join();
        }
      }
      for (RunRecord& r : results) out.records.push_back(std::move(r));
    }
  }

  std::sort(out.records.begin(), out.records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              return a.config_key < b.config_key;
            });
  for (const RunRecord& r : out.records)
    if (r.failed) ++out.n_failed;
  return out;
}

GridResult run_ablation(const ExperimentConfig& cfg,
                        const std::vector<std::size_t>& component_counts,
                        const std::filesystem::path& checkpoint) {
  cfg.validate();
  if (component_counts.empty())
    throw ConfigError("ablation needs at least one component count");
  std::size_t k = cfg.ablation.kmeans_k;
  if (k == 0) {
    if (cfg.cluster_counts.empty())
      throw ConfigError("ablation needs kmeans_k or grid cluster_counts");
    k = cfg.cluster_counts.front();
  }

  ExperimentConfig sub = cfg;
  sub.clusterers = {ClustererSpec{.algo = "kmeans"}};
  sub.cluster_counts = {k};
  sub.epsilon_levels.clear();
  sub.seeds = {cfg.seeds.front()};
  for (DatasetSource& ds : sub.datasets) ds.cluster_counts.clear();

  sub.representations.clear();
  std::vector<EmbedMethod> methods;
  for (const EmbedConfig& rep : cfg.representations)
    if (std::find(methods.begin(), methods.end(), rep.method) == methods.end())
      methods.push_back(rep.method);
  for (const EmbedMethod method : methods) {
    const auto proto = std::find_if(
        cfg.representations.begin(), cfg.representations.end(),
        [&](const EmbedConfig& rep) { return rep.method == method; });
    for (std::size_t count : component_counts) {
      EmbedConfig rep = *proto;
      rep.k = count;
      sub.representations.push_back(rep);
    }
  }
  return run_grid(sub, checkpoint);
}

}  // namespace binclust
