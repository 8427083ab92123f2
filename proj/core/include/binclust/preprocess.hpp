#pragma once

#include <filesystem>
#include <vector>

#include "binclust/dataset.hpp"

namespace binclust {

// Per-feature statistics for one scaling stage. Each fit fills only the
// fields of its stage; the others stay empty.
struct ScalerParams {
  std::vector<double> median;  // robust stage
  std::vector<double> iqr;     // robust stage, Q3 - Q1, degenerate -> 1
  std::vector<double> mean;    // standard stage
  std::vector<double> stddev;  // standard stage, degenerate -> 1
  std::vector<double> min;     // min-max stage
  std::vector<double> max;     // min-max stage
};

// The three-stage scaling chain: robust -> standard -> min-max, fitted
// sequentially so each stage sees the previous stage's output.
struct PreprocessPipeline {
  ScalerParams robust;
  ScalerParams standard;
  ScalerParams minmax;
  std::size_t fitted_dim = 0;

  // The whole chain collapses to one affine map per feature; exposed so
  // callers can verify the staged transform against the closed form.
  void composite_affine(std::vector<double>& scale, std::vector<double>& offset) const;
};

// Fits the chain on the training split. Requires n >= 2. Divisors that
// would be zero (iqr, stddev, max-min) are replaced by 1, mapping that
// feature to a constant.
PreprocessPipeline fit_pipeline(const Dataset& train);

// Applies the three stages in order. Values outside the training range are
// not clamped; labels and ids pass through.
Dataset transform(const PreprocessPipeline& p, const Dataset& data);
Matrix transform(const PreprocessPipeline& p, const Matrix& data);

// Versioned blob, magic BCP1.
void save_pipeline(const PreprocessPipeline& p, const std::filesystem::path& path);
PreprocessPipeline load_pipeline(const std::filesystem::path& path);

}  // namespace binclust
