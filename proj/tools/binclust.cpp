// binclust: command-line front end for the binary-program clustering toolkit.
//
// Subcommands cover the full workflow: synthesize or ingest a dataset,
// split it, fit preprocessing / embedding / clustering models, predict and
// evaluate assignments, and drive experiment grids from a config file.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"

#include "binclust/assignment.hpp"
#include "binclust/birch.hpp"
#include "binclust/dataset.hpp"
#include "binclust/dbscan.hpp"
#include "binclust/embed.hpp"
#include "binclust/errors.hpp"
#include "binclust/hac.hpp"
#include "binclust/harness.hpp"
#include "binclust/kmeans.hpp"
#include "binclust/linkage.hpp"
#include "binclust/matrix.hpp"
#include "binclust/metrics.hpp"
#include "binclust/preprocess.hpp"

namespace bc = binclust;
namespace fs = std::filesystem;

namespace {

bool has_text_extension(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".csv" || ext == ".txt";
}

// format: auto | text | binary. Auto follows the extension (.csv/.txt ->
// text, anything else -> binary).
void save_dataset_as(const bc::Dataset& ds, const fs::path& path, const std::string& format) {
  const bool text = format == "text" || (format == "auto" && has_text_extension(path));
  if (text)
    bc::save_dataset_text(ds, path);
  else
    bc::save_dataset_binary(ds, path);
}

// First four bytes of a model blob; identifies which loader to use.
std::string sniff_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bc::IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw bc::IoError("file too short: " + path.string());
  return std::string(magic, 4);
}

// Tag byte after the embed magic: distinguishes PCA from autoencoder blobs.
std::uint8_t sniff_embed_tag(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bc::IoError("cannot open " + path.string());
  char bytes[9] = {};
  in.read(bytes, 9);
  if (in.gcount() != 9) throw bc::IoError("file too short: " + path.string());
  return static_cast<std::uint8_t>(bytes[8]);
}

std::string algo_from_magic(const std::string& magic) {
  if (magic == "BCK1") return "kmeans";
  if (magic == "BCB1") return "birch";
  if (magic == "BCD1") return "dbscan";
  if (magic == "BCH1") return "hac";
  throw bc::IoError("not a clustering model blob (magic '" + magic + "')");
}

bc::ReportFormat resolve_report_format(const fs::path& out, const std::string& format) {
  if (format == "json") return bc::ReportFormat::Json;
  if (format == "csv") return bc::ReportFormat::Delimited;
  return out.extension() == ".json" ? bc::ReportFormat::Json : bc::ReportFormat::Delimited;
}

// Reorders an assignment loaded from disk into the dataset's row order,
// matching on sample id. Every dataset row must be covered exactly once.
bc::Assignment align_assignment(const bc::Dataset& ds, const bc::Assignment& a,
                                const std::vector<std::string>& sample_ids) {
  if (a.size() != ds.n())
    throw bc::LengthMismatch("assignment covers " + std::to_string(a.size()) +
                             " samples but the dataset has " + std::to_string(ds.n()));
  std::unordered_map<std::string, std::size_t> row_of;
  row_of.reserve(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i)
    if (!row_of.emplace(ds.ids[i], i).second)
      throw bc::InvalidSpec("duplicate sample id '" + ds.ids[i] + "' in dataset");
  bc::Assignment out;
  out.ids.assign(ds.n(), 0);
  std::vector<char> seen(ds.n(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = row_of.find(sample_ids[i]);
    if (it == row_of.end())
      throw bc::InvalidSpec("assignment id '" + sample_ids[i] + "' not in dataset");
    if (seen[it->second])
      throw bc::InvalidSpec("assignment id '" + sample_ids[i] + "' appears twice");
    seen[it->second] = 1;
    out.ids[it->second] = a.ids[i];
  }
  return out;
}

void print_grid_summary(const bc::GridResult& g, const bc::ReportSummary& s) {
  std::cout << "runs: " << g.records.size() << "  failed: " << g.n_failed << "\n";
  for (const auto& r : s.best_rows)
    std::cout << "best " << r.dataset << ": " << r.representation << " " << r.clusterer << " "
              << r.params << " seed=" << r.seed << "  h_train=" << r.h_train
              << " h_test=" << r.h_test << "\n";
}

// ---- synth ----

struct SynthOpts {
  fs::path out;
  bc::SyntheticSpec spec;
  std::string format = "auto";
};

void register_synth(CLI::App& app) {
  auto o = std::make_shared<SynthOpts>();
  auto* c = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  c->add_option("--out", o->out, "output dataset path")->required();
  c->add_option("--n", o->spec.n_samples, "total sample count")->required();
  c->add_option("--families", o->spec.n_families, "number of malware families");
  c->add_option("--benign-fraction", o->spec.benign_fraction, "share of benign samples");
  c->add_option("--dim", o->spec.dim, "feature dimensionality");
  c->add_option("--spread", o->spec.family_center_spread, "family center spread");
  c->add_option("--stddev", o->spec.within_family_stddev, "within-family stddev");
  c->add_option("--benign-modes", o->spec.benign_modes, "benign mixture mode count");
  c->add_option("--seed", o->spec.seed, "generator seed");
  c->add_option("--format", o->format, "output encoding")
      ->check(CLI::IsMember({"auto", "text", "binary"}));
  c->callback([o] {
    bc::Dataset ds = bc::generate_synthetic(o->spec);
    save_dataset_as(ds, o->out, o->format);
    std::cout << "wrote " << o->out.string() << " (" << ds.n() << " rows, " << ds.dim()
              << " cols, " << ds.family_count() << " families)\n";
  });
}

// ---- ingest ----

struct IngestOpts {
  fs::path in;
  fs::path out;
  std::string schema = "plain";
  std::size_t columns = 0;
  fs::path emit_elimination;
  std::string elimination = "none";
  std::string format = "auto";
};

void register_ingest(CLI::App& app) {
  auto o = std::make_shared<IngestOpts>();
  auto* c = app.add_subcommand("ingest", "Validate a feature file and re-encode it");
  c->add_option("--in", o->in, "input dataset path")->required();
  c->add_option("--out", o->out, "output dataset path")->required();
  c->add_option("--schema", o->schema, "column layout to validate against")
      ->check(CLI::IsMember({"plain", "ember"}));
  c->add_option("--columns", o->columns, "pin the expected feature width (plain schema)");
  c->add_option("--emit-elimination", o->emit_elimination,
                "write the constant-column list to this path");
  c->add_option("--eliminate", o->elimination,
                "drop columns: auto (constants), none, or an elimination list path");
  c->add_option("--format", o->format, "output encoding")
      ->check(CLI::IsMember({"auto", "text", "binary"}));
  c->callback([o] {
    bc::Dataset ds;
    if (o->schema == "ember")
      ds = bc::load_dataset(o->in, bc::FeatureSchema::ember());
    else if (o->columns > 0)
      ds = bc::load_dataset(o->in, bc::FeatureSchema::plain(o->columns));
    else
      ds = bc::load_dataset(o->in);
    if (!o->emit_elimination.empty()) {
      auto constants = bc::detect_constant_columns(ds);
      bc::save_elimination_list(constants, o->emit_elimination);
      std::cout << "wrote " << o->emit_elimination.string() << " (" << constants.size()
                << " constant columns)\n";
    }
    if (o->elimination != "none") {
      bc::FeatureSchema schema = bc::FeatureSchema::plain(ds.dim());
      schema.eliminated_indices = o->elimination == "auto"
                                      ? bc::detect_constant_columns(ds)
                                      : bc::load_elimination_list(o->elimination);
      schema.validate();
      ds = bc::eliminate_features(ds, schema);
    }
    save_dataset_as(ds, o->out, o->format);
    std::cout << "wrote " << o->out.string() << " (" << ds.n() << " rows, " << ds.dim()
              << " cols)\n";
  });
}

// ---- split ----

struct SplitOpts {
  fs::path in;
  fs::path train_out;
  fs::path test_out;
  double fraction = 0.8;
  std::uint64_t seed = 0;
  std::string format = "auto";
};

void register_split(CLI::App& app) {
  auto o = std::make_shared<SplitOpts>();
  auto* c = app.add_subcommand("split", "Split a dataset into train and test parts");
  c->add_option("--in", o->in, "input dataset path")->required();
  c->add_option("--train-out", o->train_out, "training split output path")->required();
  c->add_option("--test-out", o->test_out, "test split output path")->required();
  c->add_option("--fraction", o->fraction, "training fraction");
  c->add_option("--seed", o->seed, "shuffle seed");
  c->add_option("--format", o->format, "output encoding")
      ->check(CLI::IsMember({"auto", "text", "binary"}));
  c->callback([o] {
    bc::Dataset ds = bc::load_dataset(o->in);
    auto [train, test] = bc::train_test_split(ds, o->fraction, o->seed);
    save_dataset_as(train, o->train_out, o->format);
    save_dataset_as(test, o->test_out, o->format);
    std::cout << "wrote " << o->train_out.string() << " (" << train.n() << " rows) and "
              << o->test_out.string() << " (" << test.n() << " rows)\n";
  });
}

// ---- preprocess ----

struct PreprocessOpts {
  fs::path fit;
  fs::path apply;
  fs::path pipeline;
  fs::path out;
  std::string format = "auto";
};

void register_preprocess(CLI::App& app) {
  auto o = std::make_shared<PreprocessOpts>();
  auto* c = app.add_subcommand(
      "preprocess", "Fit the scaling pipeline on a training split, or apply a saved one");
  auto* fit = c->add_option("--fit", o->fit, "fit the pipeline on this dataset");
  auto* apply = c->add_option("--apply", o->apply, "transform this dataset");
  fit->excludes(apply);
  c->add_option("--pipeline", o->pipeline, "pipeline blob path (written by --fit)")->required();
  c->add_option("--out", o->out, "transformed dataset output path");
  c->add_option("--format", o->format, "output encoding")
      ->check(CLI::IsMember({"auto", "text", "binary"}));
  c->callback([o] {
    if (o->fit.empty() == o->apply.empty())
      throw bc::InvalidSpec("pass exactly one of --fit or --apply");
    if (!o->fit.empty()) {
      bc::Dataset ds = bc::load_dataset(o->fit);
      bc::PreprocessPipeline p = bc::fit_pipeline(ds);
      bc::save_pipeline(p, o->pipeline);
      std::cout << "wrote " << o->pipeline.string() << " (" << p.fitted_dim << " features)\n";
      if (!o->out.empty()) {
        save_dataset_as(bc::transform(p, ds), o->out, o->format);
        std::cout << "wrote " << o->out.string() << "\n";
      }
    } else {
      if (o->out.empty()) throw bc::InvalidSpec("--apply requires --out");
      bc::PreprocessPipeline p = bc::load_pipeline(o->pipeline);
      bc::Dataset ds = bc::load_dataset(o->apply);
      save_dataset_as(bc::transform(p, ds), o->out, o->format);
      std::cout << "wrote " << o->out.string() << " (" << ds.n() << " rows)\n";
    }
  });
}

// ---- embed ----

struct EmbedOpts {
  fs::path fit;
  fs::path apply;
  fs::path model;
  fs::path out;
  std::string method = "pca";
  bc::EmbedConfig cfg;
  std::string activation = "relu";
  std::string format = "auto";
};

void register_embed(CLI::App& app) {
  auto o = std::make_shared<EmbedOpts>();
  auto* c = app.add_subcommand("embed",
                               "Fit a dimensionality-reduction model, or apply a saved one");
  auto* fit = c->add_option("--fit", o->fit, "fit the model on this dataset");
  auto* apply = c->add_option("--apply", o->apply, "embed this dataset");
  fit->excludes(apply);
  c->add_option("--model", o->model, "model blob path (written by --fit)")->required();
  c->add_option("--out", o->out, "embedded dataset output path");
  c->add_option("--method", o->method, "reduction method")
      ->check(CLI::IsMember({"pca", "ae"}));
  c->add_option("--components", o->cfg.k, "embedding width");
  c->add_option("--seed", o->cfg.seed, "initialization seed (ae)");
  c->add_option("--epochs", o->cfg.epochs, "training epochs (ae)");
  c->add_option("--batch-size", o->cfg.batch_size, "minibatch size (ae)");
  c->add_option("--learning-rate", o->cfg.learning_rate, "SGD step size (ae)");
  c->add_option("--activation", o->activation, "hidden activation (ae)")
      ->check(CLI::IsMember({"relu", "sigmoid", "linear"}));
  c->add_option("--format", o->format, "output encoding")
      ->check(CLI::IsMember({"auto", "text", "binary"}));
  c->callback([o] {
    if (o->fit.empty() == o->apply.empty())
      throw bc::InvalidSpec("pass exactly one of --fit or --apply");
    if (!o->fit.empty()) {
      bc::Dataset ds = bc::load_dataset(o->fit);
      bc::Matrix codes;
      if (o->method == "pca") {
        bc::PcaModel m = bc::fit_pca(ds.features, o->cfg.k);
        bc::save_pca(m, o->model);
        double kept = 0.0;
        for (std::size_t i = 0; i < m.k; ++i) kept += m.explained_variance[i];
        std::cout << "wrote " << o->model.string() << " (pca, " << m.k
                  << " components, kept variance " << kept << ")\n";
        codes = bc::pca_transform(m, ds.features);
      } else {
        o->cfg.method = bc::EmbedMethod::Autoencoder;
        o->cfg.activation = bc::parse_activation(o->activation);
        bc::AutoencoderModel m = bc::fit_autoencoder(ds.features, o->cfg);
        bc::save_autoencoder(m, o->model);
        std::cout << "wrote " << o->model.string() << " (ae, " << m.code_dim()
                  << " components, final loss " << m.training_log.back() << ")\n";
        codes = bc::ae_encode(m, ds.features);
      }
      if (!o->out.empty()) {
        save_dataset_as({std::move(codes), ds.labels, ds.ids, ds.split_tag}, o->out, o->format);
        std::cout << "wrote " << o->out.string() << "\n";
      }
    } else {
      if (o->out.empty()) throw bc::InvalidSpec("--apply requires --out");
      bc::Dataset ds = bc::load_dataset(o->apply);
      bc::Matrix codes = sniff_embed_tag(o->model) == 0
                             ? bc::pca_transform(bc::load_pca(o->model), ds.features)
                             : bc::ae_encode(bc::load_autoencoder(o->model), ds.features);
      save_dataset_as({std::move(codes), ds.labels, ds.ids, ds.split_tag}, o->out, o->format);
      std::cout << "wrote " << o->out.string() << " (" << ds.n() << " rows)\n";
    }
  });
}

// ---- fit ----

struct FitOpts {
  std::string algo;
  fs::path in;
  fs::path model;
  fs::path assignment;
  std::size_t k = 0;
  double eps = 0.0;
  std::size_t min_pts = 5;
  double threshold = 0.0;
  std::size_t branching = 50;
  std::size_t subset_size = 0;
  std::string linkage = "ward";
  std::uint64_t seed = 0;
};

void register_fit(CLI::App& app) {
  auto o = std::make_shared<FitOpts>();
  auto* c = app.add_subcommand("fit", "Fit a clustering model on a dataset");
  c->add_option("--algo", o->algo, "clustering algorithm")
      ->required()
      ->check(CLI::IsMember({"kmeans", "birch", "dbscan", "hac"}));
  c->add_option("--in", o->in, "training dataset path")->required();
  c->add_option("--model", o->model, "model blob output path")->required();
  c->add_option("--assignment", o->assignment, "training assignment output path (CSV)");
  c->add_option("--k", o->k, "cluster count (kmeans, birch, hac)");
  c->add_option("--eps", o->eps, "neighborhood radius (dbscan)");
  c->add_option("--min-pts", o->min_pts, "core point threshold (dbscan)");
  c->add_option("--threshold", o->threshold, "subcluster radius limit (birch); 0 derives it");
  c->add_option("--branching", o->branching, "maximum tree fanout (birch)");
  c->add_option("--subset-size", o->subset_size,
                "agglomeration subset size (hac); 0 means min(n, 20000)");
  c->add_option("--linkage", o->linkage, "merge criterion (hac)")
      ->check(CLI::IsMember({"ward", "average", "complete", "single"}));
  c->add_option("--seed", o->seed, "seed (kmeans, hac)");
  c->callback([o] {
    bc::Dataset ds = bc::load_dataset(o->in);
    const bc::Matrix& x = ds.features;
    bc::Assignment a;
    if (o->algo == "dbscan") {
      if (o->eps <= 0.0) throw bc::InvalidSpec("dbscan requires --eps > 0");
      auto [m, fit_a] = bc::fit_dbscan(x, o->eps, o->min_pts);
      a = std::move(fit_a);
      bc::save_dbscan(m, o->model);
      std::cout << "wrote " << o->model.string() << " (dbscan, " << a.n_found()
                << " clusters, " << a.noise_count() << " noise points)\n";
    } else if (o->k == 0) {
      throw bc::InvalidSpec(o->algo + " requires --k >= 1");
    } else if (o->algo == "kmeans") {
      auto [m, fit_a] = bc::fit_kmeans(x, o->k, o->seed);
      a = std::move(fit_a);
      bc::save_kmeans(m, o->model);
      std::cout << "wrote " << o->model.string() << " (kmeans, k=" << m.k() << ", inertia "
                << m.inertia << ", " << m.n_iter << " iterations)\n";
    } else if (o->algo == "birch") {
      const double th = o->threshold > 0.0 ? o->threshold : bc::default_birch_threshold(x);
      auto [m, fit_a] = bc::fit_birch(x, th, o->branching, o->k);
      a = std::move(fit_a);
      bc::save_birch(m, o->model);
      std::cout << "wrote " << o->model.string() << " (birch, " << m.n_clusters
                << " clusters, threshold " << m.threshold << ", " << m.leaf_entries.size()
                << " subclusters)\n";
      if (m.clipped)
        std::cout << "note: only " << m.n_clusters << " subclusters exist; requested "
                  << m.requested_clusters << " clusters\n";
    } else {  // hac
      const std::size_t subset =
          o->subset_size > 0 ? o->subset_size : std::min<std::size_t>(x.rows(), 20000);
      auto [m, fit_a] = bc::fit_hac(x, o->k, subset, bc::parse_linkage(o->linkage), o->seed);
      a = std::move(fit_a);
      bc::save_hac(m, o->model);
      std::cout << "wrote " << o->model.string() << " (hac-" << o->linkage << ", k="
                << m.n_clusters << ", subset " << m.subset_indices.size() << ")\n";
    }
    if (!o->assignment.empty()) {
      bc::save_assignment(a, ds.ids, o->assignment);
      std::cout << "wrote " << o->assignment.string() << "\n";
    }
  });
}

// ---- predict ----

struct PredictOpts {
  fs::path model;
  fs::path in;
  fs::path out;
  std::string algo;  // empty = sniff from the blob magic
};

void register_predict(CLI::App& app) {
  auto o = std::make_shared<PredictOpts>();
  auto* c = app.add_subcommand("predict", "Assign dataset rows with a fitted model");
  c->add_option("--model", o->model, "model blob path")->required();
  c->add_option("--in", o->in, "dataset path")->required();
  c->add_option("--out", o->out, "assignment output path (CSV)")->required();
  c->add_option("--algo", o->algo, "override the model type sniffed from the blob")
      ->check(CLI::IsMember({"kmeans", "birch", "dbscan", "hac"}));
  c->callback([o] {
    const std::string algo = o->algo.empty() ? algo_from_magic(sniff_magic(o->model)) : o->algo;
    bc::Dataset ds = bc::load_dataset(o->in);
    bc::Assignment a;
    if (algo == "kmeans")
      a = bc::predict_kmeans(bc::load_kmeans(o->model), ds.features);
    else if (algo == "birch")
      a = bc::predict_birch(bc::load_birch(o->model), ds.features);
    else if (algo == "dbscan")
      a = bc::predict_dbscan(bc::load_dbscan(o->model), ds.features);
    else
      a = bc::predict_hac(bc::load_hac(o->model), ds.features);
    bc::save_assignment(a, ds.ids, o->out);
    std::cout << "wrote " << o->out.string() << " (" << a.size() << " rows, " << a.n_found()
              << " clusters, " << a.noise_count() << " noise points)\n";
  });
}

// ---- evaluate ----

struct EvaluateOpts {
  fs::path data;
  fs::path assignment;
  std::string noise_policy = "singletons";
  fs::path out;
};

void register_evaluate(CLI::App& app) {
  auto o = std::make_shared<EvaluateOpts>();
  auto* c = app.add_subcommand("evaluate",
                               "Score an assignment against a dataset's ground-truth labels");
  c->add_option("--data", o->data, "labeled dataset path")->required();
  c->add_option("--assignment", o->assignment, "assignment CSV path")->required();
  c->add_option("--noise-policy", o->noise_policy, "how noise rows are scored")
      ->check(CLI::IsMember({"singletons", "one-cluster", "drop"}));
  c->add_option("--out", o->out, "also write the metric lines to this path");
  c->callback([o] {
    bc::Dataset ds = bc::load_dataset(o->data);
    auto [a, ids] = bc::load_assignment(o->assignment);
    bc::Assignment aligned = align_assignment(ds, a, ids);
    bc::MetricsReport r =
        bc::evaluate(ds.labels, aligned, bc::parse_noise_policy(o->noise_policy));
    const std::string text = r.to_key_value();
    std::cout << text;
    if (!o->out.empty()) {
      std::ofstream f(o->out);
      if (!f) throw bc::IoError("cannot open " + o->out.string() + " for writing");
      f << text;
    }
  });
}

// ---- grid ----

struct GridOpts {
  fs::path config;
  fs::path out;
  std::string format = "auto";
  fs::path checkpoint;
  std::size_t workers = 0;
};

void register_grid(CLI::App& app, int& rc) {
  auto o = std::make_shared<GridOpts>();
  auto* c = app.add_subcommand("grid", "Run the experiment grid from a config file");
  c->add_option("--config", o->config, "experiment config path")->required();
  c->add_option("--out", o->out, "report output path")->required();
  c->add_option("--format", o->format, "report encoding")
      ->check(CLI::IsMember({"auto", "csv", "json"}));
  c->add_option("--checkpoint", o->checkpoint,
                "append finished runs here and resume from it (JSONL)");
  c->add_option("--workers", o->workers,
                "parallel fits; overrides the config (BINCLUST_WORKERS wins over both)");
  c->callback([o, &rc] {
    bc::ExperimentConfig cfg = bc::parse_config(o->config);
    if (o->workers > 0) cfg.parallel_runs = o->workers;
    bc::GridResult g = bc::run_grid(cfg, o->checkpoint);
    bc::ReportSummary s =
        bc::emit_report(g.records, o->out, resolve_report_format(o->out, o->format));
    print_grid_summary(g, s);
    std::cout << "wrote " << o->out.string() << "\n";
    if (g.n_failed > 0) rc = 2;
  });
}

// ---- ablate ----

struct AblateOpts {
  fs::path config;
  fs::path out;
  std::vector<std::size_t> counts;
  fs::path records;
  fs::path checkpoint;
};

void register_ablate(CLI::App& app, int& rc) {
  auto o = std::make_shared<AblateOpts>();
  auto* c = app.add_subcommand(
      "ablate", "Sweep embedding widths under a fixed k-means clusterer");
  c->add_option("--config", o->config, "experiment config path")->required();
  c->add_option("--out", o->out, "pivot table output path (CSV)")->required();
  c->add_option("--counts", o->counts, "component counts; defaults to the config's list");
  c->add_option("--records", o->records, "also write the full per-run report here");
  c->add_option("--checkpoint", o->checkpoint,
                "append finished runs here and resume from it (JSONL)");
  c->callback([o, &rc] {
    bc::ExperimentConfig cfg = bc::parse_config(o->config);
    const std::vector<std::size_t>& counts =
        o->counts.empty() ? cfg.ablation.component_counts : o->counts;
    if (counts.empty())
      throw bc::ConfigError("no component counts: pass --counts or set them in the config");
    bc::GridResult g = bc::run_ablation(cfg, counts, o->checkpoint);
    bc::emit_ablation_pivot(g.records, o->out);
    std::cout << "runs: " << g.records.size() << "  failed: " << g.n_failed << "\n";
    std::cout << "wrote " << o->out.string() << "\n";
    if (!o->records.empty()) {
      bc::emit_report(g.records, o->records, resolve_report_format(o->records, "auto"));
      std::cout << "wrote " << o->records.string() << "\n";
    }
    if (g.n_failed > 0) rc = 2;
  });
}

// ---- report ----

struct ReportOpts {
  fs::path in;
  fs::path out;
  std::string format = "auto";
};

void register_report(CLI::App& app) {
  auto o = std::make_shared<ReportOpts>();
  auto* c = app.add_subcommand(
      "report", "Regenerate report files from saved records (JSON report or JSONL checkpoint)");
  c->add_option("--in", o->in, "records path")->required();
  c->add_option("--out", o->out, "report output path")->required();
  c->add_option("--format", o->format, "report encoding")
      ->check(CLI::IsMember({"auto", "csv", "json"}));
  c->callback([o] {
    std::vector<bc::RunRecord> records;
    try {
      records = bc::load_report_json(o->in);
    } catch (const bc::Error&) {
      records = bc::load_run_records(o->in);
    }
    bc::ReportSummary s =
        bc::emit_report(records, o->out, resolve_report_format(o->out, o->format));
    std::cout << "records: " << s.n_records << "  failed: " << s.n_failed << "\n";
    for (const auto& r : s.best_rows)
      std::cout << "best " << r.dataset << ": " << r.representation << " " << r.clusterer
                << " " << r.params << " seed=" << r.seed << "  h_train=" << r.h_train
                << " h_test=" << r.h_test << "\n";
    std::cout << "wrote " << o->out.string() << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binclust: cluster binary programs into families and score the result"};
  app.require_subcommand(1);
  int rc = 0;
  register_synth(app);
  register_ingest(app);
  register_split(app);
  register_preprocess(app);
  register_embed(app);
  register_fit(app);
  register_predict(app);
  register_evaluate(app);
  register_grid(app, rc);
  register_ablate(app, rc);
  register_report(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Contract: 0 success, 2 partial grid failures, 1 anything fatal. Collapse
    // CLI11's fine-grained parse-error codes onto 1; --help stays 0.
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
