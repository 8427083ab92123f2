#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "binclust/embed.hpp"

namespace binclust {

namespace {

constexpr char kEmbedMagic[4] = {'B', 'C', 'E', '1'};
constexpr std::uint32_t kEmbedVersion = 1;
constexpr std::uint8_t kTagPca = 0;
constexpr std::uint8_t kTagAutoencoder = 1;

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Flip rows so the largest-magnitude entry of each is positive; ties go to
// the lowest index. Makes the decomposition deterministic.
void canonicalize_signs(Matrix& components) {
  for (std::size_t r = 0; r < components.rows(); ++r) {
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t c = 0; c < components.cols(); ++c) {
      const double a = std::abs(components(r, c));
      if (a > best) {
        best = a;
        arg = c;
      }
    }
    if (components(r, arg) < 0.0)
      for (std::size_t c = 0; c < components.cols(); ++c) components(r, c) = -components(r, c);
  }
}

}  // namespace

PcaModel fit_pca(const Matrix& data, std::size_t k) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n < 2) throw TooFewSamples("PCA needs at least 2 samples");
  if (k < 1 || k > std::min(n - 1, d))
    throw InvalidK("k must be in [1, min(n-1, d)] = [1, " +
                   std::to_string(std::min(n - 1, d)) + "], got " + std::to_string(k));

  PcaModel m;
  m.k = k;
  m.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += data(i, j);
  for (std::size_t j = 0; j < d; ++j) m.mean[j] /= static_cast<double>(n);

  EigenRowMajor centered(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered(i, j) = data(i, j) - m.mean[j];

  m.components = Matrix(k, d);
  m.explained_variance.assign(k, 0.0);

  if (d <= n) {
    const Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("eigen decomposition failed");
    // Eigen returns eigenvalues ascending; take the top k from the back.
    for (std::size_t c = 0; c < k; ++c) {
      const auto src = static_cast<Eigen::Index>(d - 1 - c);
      m.explained_variance[c] = solver.eigenvalues()(src);
      for (std::size_t j = 0; j < d; ++j)
        m.components(c, j) = solver.eigenvectors()(static_cast<Eigen::Index>(j), src);
    }
  } else {
    // Gram trick: eigenvectors u of X Xt / (n-1) map to components
    // Xt u / sqrt(lambda (n-1)).
    const Eigen::MatrixXd gram =
        (centered * centered.transpose()) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw Error("eigen decomposition failed");
    for (std::size_t c = 0; c < k; ++c) {
      const auto src = static_cast<Eigen::Index>(n - 1 - c);
      const double lambda = solver.eigenvalues()(src);
      m.explained_variance[c] = lambda;
      Eigen::VectorXd v = centered.transpose() * solver.eigenvectors().col(src);
      const double norm = v.norm();
      if (norm > 0.0) v /= norm;
      for (std::size_t j = 0; j < d; ++j) m.components(c, j) = v(static_cast<Eigen::Index>(j));
    }
  }
  canonicalize_signs(m.components);
  return m;
}

Matrix pca_transform(const PcaModel& m, const Matrix& data) {
  if (data.cols() != m.input_dim())
    throw DimensionMismatch("PCA fitted on " + std::to_string(m.input_dim()) +
                            " features, data has " + std::to_string(data.cols()));
  Matrix out(data.rows(), m.k);
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t c = 0; c < m.k; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < m.input_dim(); ++j)
        s += (data(i, j) - m.mean[j]) * m.components(c, j);
      out(i, c) = s;
    }
  return out;
}

Matrix pca_inverse_transform(const PcaModel& m, const Matrix& codes) {
  if (codes.cols() != m.k)
    throw DimensionMismatch("expected " + std::to_string(m.k) + " code columns, got " +
                            std::to_string(codes.cols()));
  Matrix out(codes.rows(), m.input_dim());
  for (std::size_t i = 0; i < codes.rows(); ++i)
    for (std::size_t j = 0; j < m.input_dim(); ++j) {
      double s = m.mean[j];
      for (std::size_t c = 0; c < m.k; ++c) s += codes(i, c) * m.components(c, j);
      out(i, j) = s;
    }
  return out;
}

void save_pca(const PcaModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out, kEmbedMagic, kEmbedVersion);
  io::write_u8(out, kTagPca);
  io::write_u64(out, m.k);
  io::write_f64_vector(out, m.mean);
  io::write_matrix(out, m.components);
  io::write_f64_vector(out, m.explained_variance);
  if (!out) throw IoError("write failed: " + path.string());
}

PcaModel load_pca(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (io::read_magic(in, kEmbedMagic) != kEmbedVersion)
    throw IoError("unsupported embed blob version");
  if (io::read_u8(in) != kTagPca) throw IoError("blob does not hold a PCA model");
  PcaModel m;
  m.k = io::read_u64(in);
  m.mean = io::read_f64_vector(in);
  m.components = io::read_matrix(in);
  m.explained_variance = io::read_f64_vector(in);
  return m;
}

void save_autoencoder(const AutoencoderModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  io::write_magic(out, kEmbedMagic, kEmbedVersion);
  io::write_u8(out, kTagAutoencoder);
  io::write_u8(out, static_cast<std::uint8_t>(m.activation));
  io::write_matrix(out, m.encoder_weights);
  io::write_f64_vector(out, m.encoder_bias);
  io::write_matrix(out, m.decoder_weights);
  io::write_f64_vector(out, m.decoder_bias);
  io::write_f64_vector(out, m.training_log);
  if (!out) throw IoError("write failed: " + path.string());
}

AutoencoderModel load_autoencoder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (io::read_magic(in, kEmbedMagic) != kEmbedVersion)
    throw IoError("unsupported embed blob version");
  if (io::read_u8(in) != kTagAutoencoder)
    throw IoError("blob does not hold an autoencoder model");
  AutoencoderModel m;
  m.activation = static_cast<Activation>(io::read_u8(in));
  m.encoder_weights = io::read_matrix(in);
  m.encoder_bias = io::read_f64_vector(in);
  m.decoder_weights = io::read_matrix(in);
  m.decoder_bias = io::read_f64_vector(in);
  m.training_log = io::read_f64_vector(in);
  return m;
}

}  // namespace binclust
