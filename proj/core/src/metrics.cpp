#include "binclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "binclust/errors.hpp"

namespace binclust {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

struct Entropies {
  double h_class = 0.0;          // H(C)
  double h_cluster = 0.0;        // H(K)
  double h_class_given = 0.0;    // H(C|K)
  double h_cluster_given = 0.0;  // H(K|C)
  double h_joint = 0.0;          // H(C,K)
};

Entropies entropies(const ContingencyTable& t) {
  Entropies e;
  const auto n = static_cast<double>(t.n);
  const std::size_t rows = t.counts.size();
  const std::size_t cols = rows == 0 ? 0 : t.counts[0].size();

  std::vector<double> row_sum(rows, 0.0);
  std::vector<double> col_sum(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      row_sum[r] += static_cast<double>(t.counts[r][c]);
      col_sum[c] += static_cast<double>(t.counts[r][c]);
    }

  for (std::size_t r = 0; r < rows; ++r) e.h_class -= plogp(row_sum[r] / n);
  for (std::size_t c = 0; c < cols; ++c) e.h_cluster -= plogp(col_sum[c] / n);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const auto joint = static_cast<double>(t.counts[r][c]);
      if (joint <= 0.0) continue;
      e.h_joint -= plogp(joint / n);
      // H(C|K) = -sum p(c,k) log p(c|k); likewise for H(K|C).
      e.h_class_given -= (joint / n) * std::log(joint / col_sum[c]);
      e.h_cluster_given -= (joint / n) * std::log(joint / row_sum[r]);
    }
  return e;
}

}  // namespace

std::string to_string(NoisePolicy p) {
  switch (p) {
    case NoisePolicy::NoiseAsSingletons: return "singletons";
    case NoisePolicy::NoiseAsOneCluster: return "one-cluster";
    case NoisePolicy::DropNoise: return "drop";
  }
  return "singletons";
}

NoisePolicy parse_noise_policy(const std::string& s) {
  if (s == "singletons") return NoisePolicy::NoiseAsSingletons;
  if (s == "one-cluster") return NoisePolicy::NoiseAsOneCluster;
  if (s == "drop") return NoisePolicy::DropNoise;
  throw ConfigError("unknown noise policy '" + s + "'");
}

ContingencyTable ContingencyTable::transposed() const {
  ContingencyTable t;
  t.n = n;
  t.noise_policy = noise_policy;
  t.noise_fraction = noise_fraction;
  const std::size_t rows = counts.size();
  const std::size_t cols = rows == 0 ? 0 : counts[0].size();
  t.counts.assign(cols, std::vector<std::int64_t>(rows, 0));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t.counts[c][r] = counts[r][c];
  // Row/column identities are synthetic after a transpose; metric code only
  // reads counts and n.
  t.cluster_ids.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) t.cluster_ids[r] = static_cast<std::int64_t>(r);
  return t;
}

ContingencyTable contingency(const std::vector<Label>& truth, const Assignment& assignment,
                             NoisePolicy policy) {
  if (truth.size() != assignment.size())
    throw LengthMismatch("truth has " + std::to_string(truth.size()) +
                         " labels, assignment has " + std::to_string(assignment.size()));
  if (truth.empty()) throw LengthMismatch("empty inputs");

  const std::size_t n0 = truth.size();
  const std::size_t noise = assignment.noise_count();

  ContingencyTable t;
  t.noise_policy = policy;
  t.noise_fraction = static_cast<double>(noise) / static_cast<double>(n0);

  // Class rows in order of first appearance over the kept samples.
  std::map<Label, std::size_t> class_row;
  std::unordered_map<std::int64_t, std::size_t> cluster_col;
  std::vector<std::pair<std::size_t, std::size_t>> cells;  // (row, col) per sample

  // Non-noise cluster columns, ascending id.
  std::vector<std::int64_t> sorted_ids;
  for (auto id : assignment.ids)
    if (id != Assignment::kNoise) sorted_ids.push_back(id);
  std::sort(sorted_ids.begin(), sorted_ids.end());
  sorted_ids.erase(std::unique(sorted_ids.begin(), sorted_ids.end()), sorted_ids.end());
  for (auto id : sorted_ids) {
    cluster_col.emplace(id, t.cluster_ids.size());
    t.cluster_ids.push_back(id);
  }

  std::size_t next_synthetic = t.cluster_ids.size();
  bool one_cluster_added = false;
  std::size_t one_cluster_col = 0;

  for (std::size_t i = 0; i < n0; ++i) {
    const std::int64_t cid = assignment[i];
    std::size_t col = 0;
    if (cid == Assignment::kNoise) {
      switch (policy) {
        case NoisePolicy::DropNoise:
          continue;
        case NoisePolicy::NoiseAsSingletons:
          col = next_synthetic++;
          t.cluster_ids.push_back(-static_cast<std::int64_t>(col) - 2);
          break;
        case NoisePolicy::NoiseAsOneCluster:
          if (!one_cluster_added) {
            one_cluster_col = next_synthetic++;
            t.cluster_ids.push_back(-2);
            one_cluster_added = true;
          }
          col = one_cluster_col;
          break;
      }
    } else {
      col = cluster_col.at(cid);
    }
    auto [it, inserted] = class_row.try_emplace(truth[i], class_row.size());
    cells.emplace_back(it->second, col);
    ++t.n;
  }
  if (t.n == 0) throw EmptyAfterDrop("all samples were noise and DropNoise removed them");

  t.class_labels.resize(class_row.size());
  for (const auto& [label, row] : class_row) t.class_labels[row] = label;
  t.counts.assign(class_row.size(), std::vector<std::int64_t>(t.cluster_ids.size(), 0));
  for (const auto& [row, col] : cells) ++t.counts[row][col];
  return t;
}

double homogeneity(const ContingencyTable& t) {
  const Entropies e = entropies(t);
  if (e.h_joint == 0.0) return 1.0;
  if (e.h_class == 0.0) return 1.0;  // labels already pure
  return clamp01(1.0 - e.h_class_given / e.h_class);
}

double completeness(const ContingencyTable& t) {
  const Entropies e = entropies(t);
  if (e.h_joint == 0.0) return 1.0;
  if (e.h_cluster == 0.0) return 1.0;
  return clamp01(1.0 - e.h_cluster_given / e.h_cluster);
}

double v_measure(double h, double c) {
  if (h + c == 0.0) return 0.0;
  return 2.0 * h * c / (h + c);
}

MetricsReport evaluate(const std::vector<Label>& truth, const Assignment& assignment,
                       NoisePolicy policy) {
  const ContingencyTable t = contingency(truth, assignment, policy);
  const Entropies e = entropies(t);
  MetricsReport r;
  r.entropy_class = e.h_class;
  r.entropy_cluster = e.h_cluster;
  r.entropy_class_given = e.h_class_given;
  r.entropy_cluster_given = e.h_cluster_given;
  r.entropy_joint = e.h_joint;
  r.h = homogeneity(t);
  r.c = completeness(t);
  r.v = v_measure(r.h, r.c);
  r.n_clusters_effective = t.cluster_ids.size();
  r.noise_fraction = t.noise_fraction;
  return r;
}

std::string MetricsReport::to_key_value() const {
  char buf[64];
  std::string out;
  auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.12g\n", key, v);
    out += buf;
  };
  emit("homogeneity", h);
  emit("completeness", c);
  emit("v-measure", v);
  emit("H(C)", entropy_class);
  emit("H(K)", entropy_cluster);
  emit("H(C|K)", entropy_class_given);
  emit("H(K|C)", entropy_cluster_given);
  emit("H(C,K)", entropy_joint);
  out += "n-clusters-effective=" + std::to_string(n_clusters_effective) + "\n";
  emit("noise-fraction", noise_fraction);
  return out;
}

}  // namespace binclust
