#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "binclust/harness.hpp"

namespace binclust {

namespace {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line;
};

struct Section {
  std::string name;
  std::vector<Entry> entries;
  std::size_t line;
};

std::string trim(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r");
  return s.substr(from, to - from + 1);
}

std::vector<Section> tokenize(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      sections.push_back({trim(line.substr(1, line.size() - 2)), {}, line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (sections.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
    sections.back().entries.push_back(
        {trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no});
  }
  return sections;
}

[[noreturn]] void bad_value(const Entry& e, const std::string& want) {
  throw ConfigError("line " + std::to_string(e.line) + ": '" + e.value +
                    "' is not a valid " + want + " for key '" + e.key + "'");
}

double to_double(const Entry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) bad_value(e, "number");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad_value(e, "number");
  }
}

std::uint64_t to_u64(const Entry& e) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc{} || p != e.value.data() + e.value.size())
    bad_value(e, "non-negative integer");
  return v;
}

std::size_t to_size(const Entry& e) { return static_cast<std::size_t>(to_u64(e)); }

std::vector<std::string> split_list(const std::string& value) {
  std::string prepared = value;
  std::replace(prepared.begin(), prepared.end(), ',', ' ');
  std::istringstream in(prepared);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

template <typename F>
auto to_list(const Entry& e, F parse_one) {
  std::vector<decltype(parse_one(e))> out;
  for (const std::string& tok : split_list(e.value))
    out.push_back(parse_one(Entry{e.key, tok, e.line}));
  if (out.empty()) bad_value(e, "non-empty list");
  return out;
}

[[noreturn]] void unknown_key(const std::string& section, const Entry& e) {
  throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key +
                    "' in [" + section + "]");
}

DatasetSource parse_dataset(const Section& sec) {
  DatasetSource ds;
  SyntheticSpec synth;
  bool any_synth_key = false;
  for (const Entry& e : sec.entries) {
    if (e.key == "name") ds.name = e.value;
    else if (e.key == "path") ds.path = e.value;
    else if (e.key == "test_path") ds.test_path = e.value;
    else if (e.key == "elimination") ds.elimination = e.value;
    else if (e.key == "cluster_counts") ds.cluster_counts = to_list(e, to_size);
    else if (e.key == "n_samples") { synth.n_samples = to_size(e); any_synth_key = true; }
    else if (e.key == "n_families") { synth.n_families = to_size(e); any_synth_key = true; }
    else if (e.key == "benign_fraction") { synth.benign_fraction = to_double(e); any_synth_key = true; }
    else if (e.key == "dim") { synth.dim = to_size(e); any_synth_key = true; }
    else if (e.key == "center_spread") { synth.family_center_spread = to_double(e); any_synth_key = true; }
    else if (e.key == "stddev") { synth.within_family_stddev = to_double(e); any_synth_key = true; }
    else if (e.key == "benign_modes") { synth.benign_modes = to_size(e); any_synth_key = true; }
    else if (e.key == "seed") { synth.seed = to_u64(e); any_synth_key = true; }
    else unknown_key("dataset", e);
  }
  if (ds.name.empty())
    throw ConfigError("line " + std::to_string(sec.line) + ": [dataset] needs a name");
  if (ds.name.find_first_of(" \t|,") != std::string::npos)
    throw ConfigError("line " + std::to_string(sec.line) +
                      ": dataset name must not contain spaces, '|' or ','");
  const bool has_path = !ds.path.empty();
  if (has_path == any_synth_key)
    throw ConfigError("line " + std::to_string(sec.line) +
                      ": [dataset] needs either a path or synthetic parameters, not both");
  if (any_synth_key) ds.synthetic = synth;
  return ds;
}

EmbedConfig parse_representation(const Section& sec) {
  EmbedConfig rep;
  bool has_method = false, has_components = false;
  for (const Entry& e : sec.entries) {
    if (e.key == "method") {
      try {
        rep.method = parse_embed_method(e.value);
      } catch (const Error&) {
        bad_value(e, "method (pca or ae)");
      }
      has_method = true;
    } else if (e.key == "components") {
      rep.k = to_size(e);
      has_components = true;
    } else if (e.key == "seed") rep.seed = to_u64(e);
    else if (e.key == "epochs") rep.epochs = to_size(e);
    else if (e.key == "batch_size") rep.batch_size = to_size(e);
    else if (e.key == "learning_rate") rep.learning_rate = to_double(e);
    else if (e.key == "activation") {
      try {
        rep.activation = parse_activation(e.value);
      } catch (const Error&) {
        bad_value(e, "activation (linear, relu, sigmoid)");
      }
    } else unknown_key("representation", e);
  }
  if (!has_method || !has_components)
    throw ConfigError("line " + std::to_string(sec.line) +
                      ": [representation] needs method and components");
  return rep;
}

ClustererSpec parse_clusterer(const Section& sec) {
  ClustererSpec cs;
  for (const Entry& e : sec.entries) {
    if (e.key == "algo") cs.algo = e.value;
    else if (e.key == "threshold") cs.threshold = to_double(e);
    else if (e.key == "branching") cs.branching_factor = to_size(e);
    else if (e.key == "min_pts") cs.min_pts = to_size(e);
    else if (e.key == "subset_size") cs.subset_size = to_size(e);
    else if (e.key == "linkage") {
      try {
        cs.linkage = parse_linkage(e.value);
      } catch (const Error&) {
        bad_value(e, "linkage (ward, average, complete, single)");
      }
    } else unknown_key("clusterer", e);
  }
  if (cs.algo != "kmeans" && cs.algo != "birch" && cs.algo != "dbscan" && cs.algo != "hac")
    throw ConfigError("line " + std::to_string(sec.line) +
                      ": [clusterer] algo must be kmeans, birch, dbscan, or hac");
  return cs;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  for (const Section& sec : tokenize(text)) {
    if (sec.name == "dataset") {
      cfg.datasets.push_back(parse_dataset(sec));
    } else if (sec.name == "representation") {
      cfg.representations.push_back(parse_representation(sec));
    } else if (sec.name == "clusterer") {
      cfg.clusterers.push_back(parse_clusterer(sec));
    } else if (sec.name == "split") {
      for (const Entry& e : sec.entries) {
        if (e.key == "train_fraction") cfg.split.train_fraction = to_double(e);
        else if (e.key == "seed") cfg.split.seed = to_u64(e);
        else unknown_key("split", e);
      }
    } else if (sec.name == "grid") {
      for (const Entry& e : sec.entries) {
        if (e.key == "cluster_counts") cfg.cluster_counts = to_list(e, to_size);
        else if (e.key == "epsilon_levels") cfg.epsilon_levels = to_list(e, to_double);
        else if (e.key == "seeds") cfg.seeds = to_list(e, to_u64);
        else if (e.key == "parallel_runs") cfg.parallel_runs = to_size(e);
        else if (e.key == "noise_policy") {
          try {
            cfg.noise_policy = parse_noise_policy(e.value);
          } catch (const Error&) {
            bad_value(e, "noise policy (singletons, one-cluster, drop)");
          }
        } else unknown_key("grid", e);
      }
    } else if (sec.name == "ablation") {
      for (const Entry& e : sec.entries) {
        if (e.key == "component_counts") cfg.ablation.component_counts = to_list(e, to_size);
        else if (e.key == "kmeans_k") cfg.ablation.kmeans_k = to_size(e);
        else unknown_key("ablation", e);
      }
    } else {
      throw ConfigError("line " + std::to_string(sec.line) + ": unknown section [" +
                        sec.name + "]");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void ExperimentConfig::validate() const {
  if (datasets.empty()) throw ConfigError("config needs at least one [dataset]");
  if (representations.empty())
    throw ConfigError("config needs at least one [representation]");
  if (clusterers.empty()) throw ConfigError("config needs at least one [clusterer]");
  if (seeds.empty()) throw ConfigError("config needs at least one grid seed");

  std::set<std::string> names;
  for (const DatasetSource& ds : datasets) {
    if (!names.insert(ds.name).second)
      throw ConfigError("duplicate dataset name '" + ds.name + "'");
    if (ds.synthetic) ds.synthetic->validate();
    if (ds.elimination.empty())
      throw ConfigError("dataset '" + ds.name + "': elimination must not be empty");
  }

  std::set<std::string> rep_names;
  for (const EmbedConfig& rep : representations) {
    if (rep.k < 1) throw ConfigError("representation components must be >= 1");
    if (!rep_names.insert(rep.name()).second)
      throw ConfigError("duplicate representation '" + rep.name() + "'");
  }

  std::set<std::string> clusterer_ids;
  bool any_dbscan = false, any_counted = false;
  for (const ClustererSpec& cs : clusterers) {
    (cs.algo == "dbscan" ? any_dbscan : any_counted) = true;
    if (!clusterer_ids.insert(cs.algo + "/" + cs.param_string(0)).second)
      throw ConfigError("duplicate [clusterer] with algo '" + cs.algo + "'");
  }
  if (any_dbscan && epsilon_levels.empty())
    throw ConfigError("a dbscan clusterer needs grid epsilon_levels");
  if (!any_dbscan && !epsilon_levels.empty())
    throw ConfigError("epsilon_levels given but no dbscan clusterer");
  const bool counts_everywhere =
      !cluster_counts.empty() ||
      std::all_of(datasets.begin(), datasets.end(),
                  [](const DatasetSource& d) { return !d.cluster_counts.empty(); });
  if (any_counted && !counts_everywhere)
    throw ConfigError("kmeans/birch/hac clusterers need cluster_counts");
  if (!any_counted) {
    const bool any_counts =
        !cluster_counts.empty() ||
        std::any_of(datasets.begin(), datasets.end(),
                    [](const DatasetSource& d) { return !d.cluster_counts.empty(); });
    if (any_counts) throw ConfigError("cluster_counts given but no kmeans/birch/hac clusterer");
  }

  if (split.train_fraction <= 0.0 || split.train_fraction >= 1.0)
    throw ConfigError("train_fraction must be in (0,1)");
  if (parallel_runs < 1) throw ConfigError("parallel_runs must be >= 1");
}

}  // namespace binclust
