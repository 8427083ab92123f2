#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <vector>

#include "binclust/embed.hpp"
#include "binclust/errors.hpp"
#include "binclust/matrix.hpp"
#include "oracles/oracles.hpp"

using namespace binclust;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "binclust_test_embed";
  fs::create_directories(dir);
  return dir;
}

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, spread);
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = gauss(rng);
  return m;
}

// Rank-r structure plus isotropic noise: X = U V + sigma * N.
Matrix noisy_low_rank(std::size_t n, std::size_t d, std::size_t r, double sigma,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix u(n, r), v(r, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) u(i, j) = gauss(rng);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < d; ++j) v(i, j) = gauss(rng);
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < r; ++k) s += u(i, k) * v(k, j);
      x(i, j) = s + sigma * gauss(rng);
    }
  return x;
}

// Sample covariance (denominator n-1) as plain vectors for the oracle.
std::vector<std::vector<double>> covariance_of(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  for (double& v : mean) v /= static_cast<double>(n);
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        cov[a][b] += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
  for (auto& row : cov)
    for (double& v : row) v /= static_cast<double>(n - 1);
  return cov;
}

double mean_sq_residual(const Matrix& x, const Matrix& rec) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double r = x(i, j) - rec(i, j);
      s += r * r;
    }
  return s / static_cast<double>(x.rows() * x.cols());
}

AutoencoderModel random_model(std::size_t d, std::size_t k, Activation act,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.5);
  AutoencoderModel m;
  m.activation = act;
  m.encoder_weights = Matrix(k, d);
  m.decoder_weights = Matrix(d, k);
  m.encoder_bias.assign(k, 0.0);
  m.decoder_bias.assign(d, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < d; ++j) m.encoder_weights(i, j) = gauss(rng);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < k; ++j) m.decoder_weights(i, j) = gauss(rng);
  for (double& b : m.encoder_bias) b = gauss(rng);
  for (double& b : m.decoder_bias) b = gauss(rng);
  return m;
}

}  // namespace

TEST_CASE("pca on collinear data captures all variance in one component") {
  Matrix x(40, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (std::size_t i = 0; i < 40; ++i) {
    const double t = u(rng);
    x(i, 0) = 2.0 * t + 1.0;
    x(i, 1) = -3.0 * t + 0.5;
  }
  const PcaModel m = fit_pca(x, 1);

  double total = 0.0;
  const auto cov = covariance_of(x);
  for (std::size_t j = 0; j < 2; ++j) total += cov[j][j];
  CHECK(m.explained_variance[0] == doctest::Approx(total).epsilon(1e-10));

  const Matrix rec = pca_inverse_transform(m, pca_transform(m, x));
  CHECK(mean_sq_residual(x, rec) <= 1e-16);
}

TEST_CASE("full-width pca reconstructs exactly") {
  const Matrix x = random_matrix(60, 3, 9);
  const PcaModel m = fit_pca(x, 3);
  const Matrix rec = pca_inverse_transform(m, pca_transform(m, x));
  CHECK(mean_sq_residual(x, rec) <= 1e-10);
}

TEST_CASE("pca agrees with the independent eigensolver") {
  const Matrix x = random_matrix(50, 8, 77);
  const PcaModel m = fit_pca(x, 4);

  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  oracle::jacobi_eigen(covariance_of(x), values, vectors);

  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(std::abs(m.explained_variance[c] - values[c]) <= 1e-8);
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(std::abs(m.components(c, j) - vectors[c][j]) <= 1e-8);
  }
}

TEST_CASE("pca transform properties") {
  const Matrix x = random_matrix(80, 6, 13);
  const PcaModel m = fit_pca(x, 6);

  SUBCASE("the mean row maps to the zero code") {
    Matrix mean_row(1, 6);
    for (std::size_t j = 0; j < 6; ++j) mean_row(0, j) = m.mean[j];
    const Matrix code = pca_transform(m, mean_row);
    for (std::size_t c = 0; c < 6; ++c) CHECK(std::abs(code(0, c)) <= 1e-10);
  }
  SUBCASE("full orthonormal basis round-trips") {
    const Matrix rec = pca_inverse_transform(m, pca_transform(m, x));
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j)
        CHECK(std::abs(rec(i, j) - x(i, j)) <= 1e-8);
  }
  SUBCASE("transformed column variance equals the eigenvalue") {
    const Matrix codes = pca_transform(m, x);
    for (std::size_t c = 0; c < 6; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < codes.rows(); ++i) mean += codes(i, c);
      mean /= static_cast<double>(codes.rows());
      double var = 0.0;
      for (std::size_t i = 0; i < codes.rows(); ++i) {
        const double dlt = codes(i, c) - mean;
        var += dlt * dlt;
      }
      var /= static_cast<double>(codes.rows() - 1);
      CHECK(var == doctest::Approx(m.explained_variance[c]).epsilon(1e-8));
    }
  }
  SUBCASE("zero code inverts to the mean") {
    Matrix zero(1, 6);
    for (std::size_t c = 0; c < 6; ++c) zero(0, c) = 0.0;
    const Matrix rec = pca_inverse_transform(m, zero);
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(rec(0, j) == doctest::Approx(m.mean[j]).epsilon(1e-12));
  }
}

TEST_CASE("pca residual equals the discarded eigenvalue tail") {
  const Matrix x = random_matrix(100, 10, 29);
  const PcaModel m = fit_pca(x, 4);

  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  oracle::jacobi_eigen(covariance_of(x), values, vectors);
  double tail = 0.0;
  for (std::size_t j = 4; j < 10; ++j) tail += values[j];

  const Matrix rec = pca_inverse_transform(m, pca_transform(m, x));
  double rss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double r = x(i, j) - rec(i, j);
      rss += r * r;
    }
  const double residual = rss / static_cast<double>(x.rows() - 1);
  CHECK(residual == doctest::Approx(tail).epsilon(1e-6));
}

TEST_CASE("pca invariants") {
  const Matrix x = random_matrix(70, 9, 31);
  const PcaModel m = fit_pca(x, 9);

  SUBCASE("components are orthonormal") {
    for (std::size_t a = 0; a < 9; ++a)
      for (std::size_t b = 0; b < 9; ++b) {
        double dot = 0.0;
        for (std::size_t j = 0; j < 9; ++j) dot += m.components(a, j) * m.components(b, j);
        CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-8);
      }
  }
  SUBCASE("eigenvalues are descending and non-negative") {
    for (std::size_t c = 0; c + 1 < 9; ++c)
      CHECK(m.explained_variance[c] >= m.explained_variance[c + 1] - 1e-12);
    for (double v : m.explained_variance) CHECK(v >= -1e-10);
  }
  SUBCASE("variance total matches the covariance trace") {
    const auto cov = covariance_of(x);
    double trace = 0.0, sum = 0.0;
    for (std::size_t j = 0; j < 9; ++j) trace += cov[j][j];
    for (double v : m.explained_variance) sum += v;
    CHECK(sum == doctest::Approx(trace).epsilon(1e-8));
  }
  SUBCASE("two fits are bit-identical") {
    const PcaModel m2 = fit_pca(x, 9);
    for (std::size_t c = 0; c < 9; ++c) {
      CHECK(m.explained_variance[c] == m2.explained_variance[c]);
      for (std::size_t j = 0; j < 9; ++j) CHECK(m.components(c, j) == m2.components(c, j));
    }
  }
}

TEST_CASE("the tall-data and wide-data eigen paths agree") {
  // 12 samples x 30 features exercises the Gram-matrix branch; compare it
  // with the covariance branch on the transposed problem sizes.
  const Matrix x = noisy_low_rank(12, 30, 3, 0.05, 55);
  const PcaModel m = fit_pca(x, 5);

  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  oracle::jacobi_eigen(covariance_of(x), values, vectors);
  for (std::size_t c = 0; c < 5; ++c)
    CHECK(std::abs(m.explained_variance[c] - values[c]) <= 1e-8);
  // Eigenvector comparison only where the eigenvalue is well separated
  // from its neighbors; the noise tail is near-degenerate.
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t j = 0; j < 30; ++j)
      CHECK(std::abs(m.components(c, j) - vectors[c][j]) <= 1e-7);
}

TEST_CASE("pca rejects invalid shapes") {
  const Matrix x = random_matrix(10, 4, 1);
  CHECK_THROWS_AS(fit_pca(x, 0), InvalidK);
  CHECK_THROWS_AS(fit_pca(x, 5), InvalidK);
  CHECK_THROWS_AS(fit_pca(random_matrix(1, 4, 1), 1), TooFewSamples);
  const PcaModel m = fit_pca(x, 2);
  CHECK_THROWS_AS(pca_transform(m, random_matrix(3, 5, 2)), DimensionMismatch);
  CHECK_THROWS_AS(pca_inverse_transform(m, random_matrix(3, 3, 2)), DimensionMismatch);
}

TEST_CASE("identity-initialized linear autoencoder is a fixed point") {
  const std::size_t d = 4;
  AutoencoderModel m;
  m.activation = Activation::Linear;
  m.encoder_weights = Matrix(d, d);
  m.decoder_weights = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      m.encoder_weights(i, j) = i == j ? 1.0 : 0.0;
      m.decoder_weights(i, j) = i == j ? 1.0 : 0.0;
    }
  m.encoder_bias.assign(d, 0.0);
  m.decoder_bias.assign(d, 0.0);

  const Matrix x = random_matrix(20, d, 5);
  CHECK(ae_loss(m, x) <= 1e-24);
  const AeGradients g = ae_gradients(m, x);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      CHECK(std::abs(g.d_encoder_weights(i, j)) <= 1e-15);
      CHECK(std::abs(g.d_decoder_weights(i, j)) <= 1e-15);
    }
  for (double b : g.d_encoder_bias) CHECK(std::abs(b) <= 1e-15);
  for (double b : g.d_decoder_bias) CHECK(std::abs(b) <= 1e-15);
}

TEST_CASE("gradient check passes for every activation") {
  const Matrix batch = random_matrix(5, 6, 91, 0.8);
  for (const Activation act : {Activation::Linear, Activation::ReLU, Activation::Sigmoid}) {
    const AutoencoderModel m = random_model(6, 3, act, 17);
    CHECK(gradient_check(m, batch, 1e-5) <= 1e-4);
  }
}

TEST_CASE("gradient check conventions") {
  SUBCASE("zero model on a zero batch reports zero error") {
    AutoencoderModel m;
    m.activation = Activation::Linear;
    m.encoder_weights = Matrix(2, 3);
    m.decoder_weights = Matrix(3, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) m.encoder_weights(i, j) = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j) m.decoder_weights(i, j) = 0.0;
    m.encoder_bias.assign(2, 0.0);
    m.decoder_bias.assign(3, 0.0);
    Matrix zero(4, 3);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 3; ++j) zero(i, j) = 0.0;
    CHECK(gradient_check(m, zero, 1e-5) == 0.0);
  }
  SUBCASE("a doubled analytic gradient is flagged at relative error about 1") {
    const AutoencoderModel m = random_model(5, 2, Activation::Linear, 23);
    const Matrix batch = random_matrix(6, 5, 29, 0.7);
    const AeGradients analytic = ae_gradients(m, batch);
    const AeGradients fd = ae_fd_gradients(m, batch, 1e-5);
    double worst = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const double corrupted = 2.0 * analytic.d_decoder_weights(i, j);
        const double reference = fd.d_decoder_weights(i, j);
        const double err =
            std::abs(corrupted - reference) / std::max(std::abs(reference), 1e-12);
        worst = std::max(worst, err);
      }
    CHECK(worst >= 0.9);
    CHECK(worst <= 1.1);
  }
  SUBCASE("epsilon outside the stable range is rejected") {
    const AutoencoderModel m = random_model(4, 2, Activation::Linear, 31);
    const Matrix batch = random_matrix(3, 4, 37);
    CHECK_THROWS_AS(gradient_check(m, batch, 1e-8), InvalidSpec);
    CHECK_THROWS_AS(gradient_check(m, batch, 1e-2), InvalidSpec);
    CHECK_THROWS_AS(gradient_check(m, Matrix(0, 4), 1e-5), TooFewSamples);
  }
}

TEST_CASE("linear autoencoder approaches the pca optimum on noisy rank-2 data") {
  const Matrix x = noisy_low_rank(200, 10, 2, 0.1, 7);

  const PcaModel pca = fit_pca(x, 2);
  const double pca_residual = mean_sq_residual(x, pca_inverse_transform(pca, pca_transform(pca, x)));

  EmbedConfig cfg;
  cfg.method = EmbedMethod::Autoencoder;
  cfg.k = 2;
  cfg.activation = Activation::Linear;
  cfg.epochs = 4000;
  cfg.batch_size = 200;  // full batch: plain gradient descent converges to the linear optimum
  cfg.learning_rate = 0.2;
  cfg.seed = 11;
  const AutoencoderModel ae = fit_autoencoder(x, cfg);

  REQUIRE(ae.training_log.size() == cfg.epochs);
  const double ae_final = ae.training_log.back();
  CHECK(ae_final <= pca_residual * 1.10);
}

TEST_CASE("training descends at a small learning rate") {
  const Matrix x = noisy_low_rank(100, 8, 2, 0.1, 3);
  EmbedConfig cfg;
  cfg.method = EmbedMethod::Autoencoder;
  cfg.k = 3;
  cfg.activation = Activation::Linear;
  cfg.epochs = 40;
  cfg.batch_size = 100;  // full batch: every step is true gradient descent
  cfg.learning_rate = 0.005;
  cfg.seed = 2;
  const AutoencoderModel m = fit_autoencoder(x, cfg);
  for (std::size_t e = 1; e < m.training_log.size(); ++e)
    CHECK(m.training_log[e] <= m.training_log[e - 1] + 1e-6);
}

TEST_CASE("encoding basics") {
  SUBCASE("zero weights give zero codes") {
    AutoencoderModel m;
    m.activation = Activation::Linear;
    m.encoder_weights = Matrix(2, 3);
    m.decoder_weights = Matrix(3, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) m.encoder_weights(i, j) = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j) m.decoder_weights(i, j) = 0.0;
    m.encoder_bias.assign(2, 0.0);
    m.decoder_bias.assign(3, 0.0);
    const Matrix codes = ae_encode(m, random_matrix(5, 3, 1));
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t c = 0; c < 2; ++c) CHECK(codes(i, c) == 0.0);
  }
  SUBCASE("relu codes are non-negative") {
    const AutoencoderModel m = random_model(6, 4, Activation::ReLU, 3);
    const Matrix codes = ae_encode(m, random_matrix(30, 6, 5));
    for (std::size_t i = 0; i < codes.rows(); ++i)
      for (std::size_t c = 0; c < codes.cols(); ++c) CHECK(codes(i, c) >= 0.0);
  }
  SUBCASE("encode is pure") {
    const AutoencoderModel m = random_model(5, 2, Activation::Sigmoid, 9);
    const Matrix x = random_matrix(10, 5, 13);
    const Matrix a = ae_encode(m, x);
    const Matrix b = ae_encode(m, x);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t c = 0; c < a.cols(); ++c) CHECK(a(i, c) == b(i, c));
  }
  SUBCASE("dimension mismatch throws") {
    const AutoencoderModel m = random_model(5, 2, Activation::Linear, 9);
    CHECK_THROWS_AS(ae_encode(m, random_matrix(3, 4, 1)), DimensionMismatch);
  }
}

TEST_CASE("autoencoder training is deterministic per seed") {
  const Matrix x = noisy_low_rank(60, 6, 2, 0.1, 17);
  EmbedConfig cfg;
  cfg.method = EmbedMethod::Autoencoder;
  cfg.k = 2;
  cfg.epochs = 10;
  cfg.seed = 5;
  const AutoencoderModel a = fit_autoencoder(x, cfg);
  const AutoencoderModel b = fit_autoencoder(x, cfg);
  CHECK(a.training_log == b.training_log);
  for (std::size_t i = 0; i < a.encoder_weights.rows(); ++i)
    for (std::size_t j = 0; j < a.encoder_weights.cols(); ++j)
      CHECK(a.encoder_weights(i, j) == b.encoder_weights(i, j));
}

TEST_CASE("divergent training reports non-finite loss") {
  const Matrix x = random_matrix(50, 5, 1, 10.0);
  EmbedConfig cfg;
  cfg.method = EmbedMethod::Autoencoder;
  cfg.k = 3;
  cfg.epochs = 50;
  cfg.learning_rate = 1e6;
  CHECK_THROWS_AS(fit_autoencoder(x, cfg), NonFiniteLoss);
}

TEST_CASE("embed config validation and naming") {
  const Matrix x = random_matrix(20, 4, 1);
  EmbedConfig cfg;
  cfg.method = EmbedMethod::Autoencoder;
  cfg.k = 5;  // wider than the data
  CHECK_THROWS_AS(fit_autoencoder(x, cfg), InvalidK);
  cfg.k = 2;
  cfg.epochs = 0;
  CHECK_THROWS_AS(fit_autoencoder(x, cfg), InvalidSpec);

  EmbedConfig name_cfg;
  name_cfg.method = EmbedMethod::Pca;
  name_cfg.k = 10;
  CHECK(name_cfg.name() == "pca-10");
  name_cfg.method = EmbedMethod::Autoencoder;
  name_cfg.k = 30;
  CHECK(name_cfg.name() == "ae-30");
  CHECK(parse_embed_method("pca") == EmbedMethod::Pca);
  CHECK(parse_embed_method("ae") == EmbedMethod::Autoencoder);
  for (const Activation a : {Activation::Linear, Activation::ReLU, Activation::Sigmoid})
    CHECK(parse_activation(to_string(a)) == a);
}

TEST_CASE("model persistence round-trips") {
  const auto dir = scratch();
  const Matrix x = random_matrix(40, 6, 3);

  const PcaModel pm = fit_pca(x, 3);
  save_pca(pm, dir / "m.pca");
  const PcaModel pb = load_pca(dir / "m.pca");
  CHECK(pb.k == pm.k);
  CHECK(pb.mean == pm.mean);
  CHECK(pb.explained_variance == pm.explained_variance);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(pb.components(i, j) == pm.components(i, j));

  EmbedConfig cfg;
  cfg.method = EmbedMethod::Autoencoder;
  cfg.k = 2;
  cfg.epochs = 5;
  const AutoencoderModel am = fit_autoencoder(x, cfg);
  save_autoencoder(am, dir / "m.ae");
  const AutoencoderModel ab = load_autoencoder(dir / "m.ae");
  CHECK(ab.activation == am.activation);
  CHECK(ab.training_log == am.training_log);
  CHECK(ab.encoder_bias == am.encoder_bias);
  CHECK(ab.decoder_bias == am.decoder_bias);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(ab.encoder_weights(i, j) == am.encoder_weights(i, j));

  // Cross-loading the wrong model kind fails.
  CHECK_THROWS_AS(load_pca(dir / "m.ae"), IoError);
  CHECK_THROWS_AS(load_autoencoder(dir / "m.pca"), IoError);
}
