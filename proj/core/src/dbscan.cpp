#include <deque>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "binclust/dbscan.hpp"

namespace binclust {

namespace {

constexpr char kDbscanMagic[4] = {'B', 'C', 'D', '1'};
constexpr std::uint32_t kDbscanVersion = 1;

// Best attachment among core candidates: minimal distance, then lowest
// cluster id, then lowest core position. Shared by fit and predict so a
// training row always reproduces its fit-time id.
struct CoreChoice {
  double dist_sq = std::numeric_limits<double>::infinity();
  std::int64_t cluster = Assignment::kNoise;
  std::size_t core_pos = 0;

  void offer(double d, std::int64_t cl, std::size_t pos) {
    if (d < dist_sq || (d == dist_sq && (cl < cluster || (cl == cluster && pos < core_pos)))) {
      dist_sq = d;
      cluster = cl;
      core_pos = pos;
    }
  }
};

}  // namespace

std::pair<DbscanModel, Assignment> fit_dbscan(const Matrix& data, double epsilon,
                                              std::size_t min_pts) {
  if (epsilon <= 0.0) throw InvalidSpec("epsilon must be > 0");
  if (min_pts < 1) throw InvalidSpec("min_pts must be >= 1");
  const std::size_t n = data.rows();

  KdTree all(data);
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<bool> is_core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i] = all.radius_query(data.row(i), epsilon);
    is_core[i] = neighbors[i].size() >= min_pts;
  }

  // Clusters: connected components of core points, seeded in row order.
  std::vector<std::int64_t> core_label(n, Assignment::kNoise);
  std::int64_t next_cluster = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!is_core[seed] || core_label[seed] != Assignment::kNoise) continue;
    const std::int64_t cl = next_cluster++;
    std::deque<std::size_t> frontier{seed};
    core_label[seed] = cl;
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      for (std::size_t q : neighbors[p]) {
        if (is_core[q] && core_label[q] == Assignment::kNoise) {
          core_label[q] = cl;
          frontier.push_back(q);
        }
      }
    }
  }

  DbscanModel m;
  m.epsilon = epsilon;
  m.min_pts = min_pts;
  for (std::size_t i = 0; i < n; ++i)
    if (is_core[i]) {
      m.core_rows.push_back(i);
      m.core_cluster_ids.push_back(core_label[i]);
    }

  std::vector<std::size_t> core_pos_of(n, 0);
  for (std::size_t p = 0; p < m.core_rows.size(); ++p) core_pos_of[m.core_rows[p]] = p;

  Assignment assign;
  assign.ids.assign(n, Assignment::kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_core[i]) {
      assign.ids[i] = core_label[i];
      continue;
    }
    CoreChoice choice;
    for (std::size_t q : neighbors[i])
      if (is_core[q])
        choice.offer(squared_distance(data.row(i), data.row(q)), core_label[q],
                     core_pos_of[q]);
    assign.ids[i] = choice.cluster;
  }
  m.train_assignment = assign;

  Matrix cores(m.core_rows.size(), data.cols());
  for (std::size_t p = 0; p < m.core_rows.size(); ++p)
    for (std::size_t j = 0; j < data.cols(); ++j) cores(p, j) = data(m.core_rows[p], j);
  m.core_index = KdTree(std::move(cores));
  return {std::move(m), std::move(assign)};
}

Assignment predict_dbscan(const DbscanModel& m, const Matrix& data) {
  if (m.core_index.size() > 0 && data.cols() != m.dim())
    throw DimensionMismatch("model expects " + std::to_string(m.dim()) +
                            " features, data has " + std::to_string(data.cols()));
  Assignment a;
  a.ids.assign(data.rows(), Assignment::kNoise);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (m.core_index.size() == 0) continue;
    CoreChoice choice;
    for (std::size_t p : m.core_index.radius_query(data.row(i), m.epsilon))
      choice.offer(squared_distance(m.core_points().row(p), data.row(i)),
                   m.core_cluster_ids[p], p);
    a.ids[i] = choice.cluster;
  }
  return a;
}

void save_dbscan(const DbscanModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out, kDbscanMagic, kDbscanVersion);
  io::write_f64(out, m.epsilon);
  io::write_u64(out, m.min_pts);
  io::write_u64(out, m.core_rows.size());
  for (std::size_t r : m.core_rows) io::write_u64(out, r);
  for (std::int64_t c : m.core_cluster_ids) io::write_i64(out, c);
  io::write_matrix(out, m.core_points());
  io::write_u64(out, m.train_assignment.ids.size());
  for (std::int64_t v : m.train_assignment.ids) io::write_i64(out, v);
}

DbscanModel load_dbscan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  io::read_magic(in, kDbscanMagic);
  DbscanModel m;
  m.epsilon = io::read_f64(in);
  m.min_pts = io::read_u64(in);
  const std::uint64_t cores = io::read_u64(in);
  m.core_rows.resize(cores);
  for (std::size_t& r : m.core_rows) r = io::read_u64(in);
  m.core_cluster_ids.resize(cores);
  for (std::int64_t& c : m.core_cluster_ids) c = io::read_i64(in);
  m.core_index = KdTree(io::read_matrix(in));
  m.train_assignment.ids.resize(io::read_u64(in));
  for (std::int64_t& v : m.train_assignment.ids) v = io::read_i64(in);
  return m;
}

}  // namespace binclust
