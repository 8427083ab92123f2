#include "binclust/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "binary_io.hpp"

namespace binclust {

namespace {

constexpr char kPipelineMagic[4] = {'B', 'C', 'P', '1'};
constexpr std::uint32_t kPipelineVersion = 1;

// Quantile with linear interpolation at position q*(n-1) over the sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double nonzero(double v) { return v == 0.0 ? 1.0 : v; }

}  // namespace

void PreprocessPipeline::composite_affine(std::vector<double>& scale,
                                          std::vector<double>& offset) const {
  scale.assign(fitted_dim, 0.0);
  offset.assign(fitted_dim, 0.0);
  for (std::size_t j = 0; j < fitted_dim; ++j) {
    // y = (((x - med)/iqr - mean)/std - min) / (max - min)
    const double span = nonzero(minmax.max[j] - minmax.min[j]);
    scale[j] = 1.0 / (robust.iqr[j] * standard.stddev[j] * span);
    offset[j] = -(robust.median[j] / robust.iqr[j] + standard.mean[j]) /
                    (standard.stddev[j] * span) -
                minmax.min[j] / span;
  }
}

PreprocessPipeline fit_pipeline(const Dataset& train) {
  if (train.split_tag == SplitTag::Test)
    throw InvalidSpec("refusing to fit a pipeline on a test split");
  const std::size_t n = train.n();
  const std::size_t d = train.dim();
  if (n < 2) throw TooFewSamples("pipeline fit needs at least 2 samples");

  PreprocessPipeline p;
  p.fitted_dim = d;
  p.robust.median.resize(d);
  p.robust.iqr.resize(d);
  p.standard.mean.resize(d);
  p.standard.stddev.resize(d);
  p.minmax.min.resize(d);
  p.minmax.max.resize(d);

  std::vector<double> col(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = train.features(i, j);
    std::sort(col.begin(), col.end());
    p.robust.median[j] = quantile(col, 0.5);
    p.robust.iqr[j] = nonzero(quantile(col, 0.75) - quantile(col, 0.25));

    // Stage 2 statistics on stage-1 output (population stddev).
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sum += (train.features(i, j) - p.robust.median[j]) / p.robust.iqr[j];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (train.features(i, j) - p.robust.median[j]) / p.robust.iqr[j] - mean;
      ss += z * z;
    }
    p.standard.mean[j] = mean;
    p.standard.stddev[j] = nonzero(std::sqrt(ss / static_cast<double>(n)));

    // Stage 3 statistics on stage-2 output.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double z =
          ((train.features(i, j) - p.robust.median[j]) / p.robust.iqr[j] - mean) /
          p.standard.stddev[j];
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
    p.minmax.min[j] = lo;
    p.minmax.max[j] = hi;
  }
  return p;
}

Matrix transform(const PreprocessPipeline& p, const Matrix& data) {
  if (data.cols() != p.fitted_dim)
    throw DimensionMismatch("pipeline fitted on " + std::to_string(p.fitted_dim) +
                            " features, data has " + std::to_string(data.cols()));
  Matrix out(data.rows(), data.cols());
  for (std::size_t j = 0; j < p.fitted_dim; ++j) {
    const double med = p.robust.median[j];
    const double iqr = p.robust.iqr[j];
    const double mean = p.standard.mean[j];
    const double sd = p.standard.stddev[j];
    const double lo = p.minmax.min[j];
    const double span = nonzero(p.minmax.max[j] - lo);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const double r = (data(i, j) - med) / iqr;
      const double z = (r - mean) / sd;
      out(i, j) = (z - lo) / span;
    }
  }
  return out;
}

Dataset transform(const PreprocessPipeline& p, const Dataset& data) {
  Dataset out;
  out.features = transform(p, data.features);
  out.labels = data.labels;
  out.ids = data.ids;
  out.split_tag = data.split_tag;
  return out;
}

void save_pipeline(const PreprocessPipeline& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out, kPipelineMagic, kPipelineVersion);
  io::write_u64(out, p.fitted_dim);
  io::write_f64_vector(out, p.robust.median);
  io::write_f64_vector(out, p.robust.iqr);
  io::write_f64_vector(out, p.standard.mean);
  io::write_f64_vector(out, p.standard.stddev);
  io::write_f64_vector(out, p.minmax.min);
  io::write_f64_vector(out, p.minmax.max);
  if (!out) throw IoError("write failed: " + path.string());
}

PreprocessPipeline load_pipeline(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto version = io::read_magic(in, kPipelineMagic);
  if (version != kPipelineVersion) throw IoError("unsupported pipeline version");
  PreprocessPipeline p;
  p.fitted_dim = io::read_u64(in);
  p.robust.median = io::read_f64_vector(in);
  p.robust.iqr = io::read_f64_vector(in);
  p.standard.mean = io::read_f64_vector(in);
  p.standard.stddev = io::read_f64_vector(in);
  p.minmax.min = io::read_f64_vector(in);
  p.minmax.max = io::read_f64_vector(in);
  return p;
}

}  // namespace binclust
