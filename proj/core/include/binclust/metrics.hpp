#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binclust/assignment.hpp"
#include "binclust/dataset.hpp"

namespace binclust {

// How NOISE-marked samples enter the contingency table.
enum class NoisePolicy {
  NoiseAsSingletons,  // each noise point becomes its own one-member cluster
  NoiseAsOneCluster,  // all noise pooled into one synthetic cluster
  DropNoise,          // noise excluded, fraction recorded
};

std::string to_string(NoisePolicy p);
NoisePolicy parse_noise_policy(const std::string& s);

// Class-by-cluster count matrix. Rows are classes in order of first
// appearance; columns are cluster ids ascending, with any noise-derived
// columns appended. Built so no row or column is all-zero.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;  // classes x clusters
  std::vector<Label> class_labels;
  std::vector<std::int64_t> cluster_ids;
  std::int64_t n = 0;
  NoisePolicy noise_policy = NoisePolicy::NoiseAsSingletons;
  double noise_fraction = 0.0;  // share of the original samples marked NOISE

  ContingencyTable transposed() const;
};

ContingencyTable contingency(const std::vector<Label>& truth, const Assignment& assignment,
                             NoisePolicy policy = NoisePolicy::NoiseAsSingletons);

// Entropies use natural log with the 0*log(0) := 0 convention.
double homogeneity(const ContingencyTable& t);
double completeness(const ContingencyTable& t);

// Harmonic mean of h and c; 0 when both vanish.
double v_measure(double h, double c);

struct MetricsReport {
  double h = 0.0;
  double c = 0.0;
  double v = 0.0;
  double entropy_class = 0.0;          // H(C)
  double entropy_cluster = 0.0;        // H(K)
  double entropy_class_given = 0.0;    // H(C|K)
  double entropy_cluster_given = 0.0;  // H(K|C)
  double entropy_joint = 0.0;          // H(C,K)
  std::size_t n_clusters_effective = 0;
  double noise_fraction = 0.0;

  // Flat key=value lines, one metric per line.
  std::string to_key_value() const;
};

MetricsReport evaluate(const std::vector<Label>& truth, const Assignment& assignment,
                       NoisePolicy policy = NoisePolicy::NoiseAsSingletons);

}  // namespace binclust
