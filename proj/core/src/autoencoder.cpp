#include <algorithm>
#include <cmath>
#include <random>

#include "binclust/embed.hpp"

namespace binclust {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Linear: return z;
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

// Derivative in terms of the pre-activation z.
double activate_grad(Activation a, double z) {
  switch (a) {
    case Activation::Linear: return 1.0;
    case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

void check_width(const AutoencoderModel& m, const Matrix& data) {
  if (data.cols() != m.input_dim())
    throw DimensionMismatch("autoencoder expects " + std::to_string(m.input_dim()) +
                            " features, data has " + std::to_string(data.cols()));
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "relu";
}

Activation parse_activation(const std::string& s) {
  if (s == "linear") return Activation::Linear;
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw Error("unknown activation '" + s + "'");
}

std::string to_string(EmbedMethod m) {
  return m == EmbedMethod::Pca ? "pca" : "ae";
}

EmbedMethod parse_embed_method(const std::string& s) {
  if (s == "pca") return EmbedMethod::Pca;
  if (s == "ae" || s == "autoencoder") return EmbedMethod::Autoencoder;
  throw Error("unknown embed method '" + s + "'");
}

std::string EmbedConfig::name() const {
  return to_string(method) + "-" + std::to_string(k);
}

Matrix ae_encode(const AutoencoderModel& m, const Matrix& data) {
  check_width(m, data);
  const std::size_t k = m.code_dim();
  const std::size_t d = m.input_dim();
  Matrix codes(data.rows(), k);
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t r = 0; r < k; ++r) {
      double z = m.encoder_bias[r];
      for (std::size_t j = 0; j < d; ++j) z += m.encoder_weights(r, j) * data(i, j);
      codes(i, r) = activate(m.activation, z);
    }
  return codes;
}

Matrix ae_decode(const AutoencoderModel& m, const Matrix& codes) {
  if (codes.cols() != m.code_dim())
    throw DimensionMismatch("expected " + std::to_string(m.code_dim()) +
                            " code columns, got " + std::to_string(codes.cols()));
  const std::size_t k = m.code_dim();
  const std::size_t d = m.input_dim();
  Matrix out(codes.rows(), d);
  for (std::size_t i = 0; i < codes.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double v = m.decoder_bias[j];
      for (std::size_t r = 0; r < k; ++r) v += m.decoder_weights(j, r) * codes(i, r);
      out(i, j) = v;
    }
  return out;
}

Matrix ae_reconstruct(const AutoencoderModel& m, const Matrix& data) {
  return ae_decode(m, ae_encode(m, data));
}

double ae_loss(const AutoencoderModel& m, const Matrix& batch) {
  check_width(m, batch);
  const Matrix rec = ae_reconstruct(m, batch);
  double s = 0.0;
  for (std::size_t i = 0; i < batch.rows() * batch.cols(); ++i) {
    const double r = rec.data()[i] - batch.data()[i];
    s += r * r;
  }
  return s / static_cast<double>(batch.rows() * batch.cols());
}

AeGradients ae_gradients(const AutoencoderModel& m, const Matrix& batch) {
  check_width(m, batch);
  if (batch.rows() == 0) throw TooFewSamples("gradient of an empty batch");
  const std::size_t k = m.code_dim();
  const std::size_t d = m.input_dim();
  const std::size_t b = batch.rows();

  AeGradients g;
  g.d_encoder_weights = Matrix(k, d);
  g.d_encoder_bias.assign(k, 0.0);
  g.d_decoder_weights = Matrix(d, k);
  g.d_decoder_bias.assign(d, 0.0);

  std::vector<double> z(k), a(k), residual(d), dz(k);
  const double scale = 2.0 / static_cast<double>(b * d);
  for (std::size_t i = 0; i < b; ++i) {
    const auto x = batch.row(i);
    for (std::size_t r = 0; r < k; ++r) {
      double s = m.encoder_bias[r];
      for (std::size_t j = 0; j < d; ++j) s += m.encoder_weights(r, j) * x[j];
      z[r] = s;
      a[r] = activate(m.activation, s);
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = m.decoder_bias[j];
      for (std::size_t r = 0; r < k; ++r) v += m.decoder_weights(j, r) * a[r];
      residual[j] = scale * (v - x[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
      g.d_decoder_bias[j] += residual[j];
      for (std::size_t r = 0; r < k; ++r) g.d_decoder_weights(j, r) += residual[j] * a[r];
    }
    for (std::size_t r = 0; r < k; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += m.decoder_weights(j, r) * residual[j];
      dz[r] = s * activate_grad(m.activation, z[r]);
    }
    for (std::size_t r = 0; r < k; ++r) {
      g.d_encoder_bias[r] += dz[r];
      for (std::size_t j = 0; j < d; ++j) g.d_encoder_weights(r, j) += dz[r] * x[j];
    }
  }
  return g;
}

AeGradients ae_fd_gradients(AutoencoderModel m, const Matrix& batch, double epsilon) {
  check_width(m, batch);
  AeGradients g;
  g.d_encoder_weights = Matrix(m.code_dim(), m.input_dim());
  g.d_encoder_bias.assign(m.code_dim(), 0.0);
  g.d_decoder_weights = Matrix(m.input_dim(), m.code_dim());
  g.d_decoder_bias.assign(m.input_dim(), 0.0);

  auto central = [&](double& param) {
    const double saved = param;
    param = saved + epsilon;
    const double up = ae_loss(m, batch);
    param = saved - epsilon;
    const double down = ae_loss(m, batch);
    param = saved;
    return (up - down) / (2.0 * epsilon);
  };
  for (std::size_t i = 0; i < m.code_dim() * m.input_dim(); ++i)
    g.d_encoder_weights.data()[i] = central(m.encoder_weights.data()[i]);
  for (std::size_t i = 0; i < m.code_dim(); ++i)
    g.d_encoder_bias[i] = central(m.encoder_bias[i]);
  for (std::size_t i = 0; i < m.input_dim() * m.code_dim(); ++i)
    g.d_decoder_weights.data()[i] = central(m.decoder_weights.data()[i]);
  for (std::size_t i = 0; i < m.input_dim(); ++i)
    g.d_decoder_bias[i] = central(m.decoder_bias[i]);
  return g;
}

double gradient_check(const AutoencoderModel& m, const Matrix& batch, double epsilon) {
  if (epsilon < 1e-7 || epsilon > 1e-3)
    throw InvalidSpec("epsilon must be in [1e-7, 1e-3]");
  if (batch.rows() == 0) throw TooFewSamples("gradient check needs a non-empty batch");
  const AeGradients analytic = ae_gradients(m, batch);
  const AeGradients fd = ae_fd_gradients(m, batch, epsilon);

  double worst = 0.0;
  auto compare = [&](double a, double f) {
    if (std::abs(a) < 1e-12 && std::abs(f) < 1e-12) return;
    const double err = std::abs(a - f) / std::max(std::abs(f), 1e-12);
    worst = std::max(worst, err);
  };
  for (std::size_t i = 0; i < analytic.d_encoder_weights.rows() * analytic.d_encoder_weights.cols(); ++i)
    compare(analytic.d_encoder_weights.data()[i], fd.d_encoder_weights.data()[i]);
  for (std::size_t i = 0; i < analytic.d_encoder_bias.size(); ++i)
    compare(analytic.d_encoder_bias[i], fd.d_encoder_bias[i]);
  for (std::size_t i = 0; i < analytic.d_decoder_weights.rows() * analytic.d_decoder_weights.cols(); ++i)
    compare(analytic.d_decoder_weights.data()[i], fd.d_decoder_weights.data()[i]);
  for (std::size_t i = 0; i < analytic.d_decoder_bias.size(); ++i)
    compare(analytic.d_decoder_bias[i], fd.d_decoder_bias[i]);
  return worst;
}

AutoencoderModel fit_autoencoder(const Matrix& data, const EmbedConfig& cfg) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n == 0) throw TooFewSamples("autoencoder fit on empty data");
  if (cfg.k < 1 || cfg.k > d)
    throw InvalidK("k must be in [1, d], got " + std::to_string(cfg.k));
  if (cfg.epochs < 1) throw InvalidSpec("epochs must be >= 1");
  if (cfg.batch_size < 1) throw InvalidSpec("batch_size must be >= 1");

  AutoencoderModel m;
  m.activation = cfg.activation;
  m.encoder_weights = Matrix(cfg.k, d);
  m.encoder_bias.assign(cfg.k, 0.0);
  m.decoder_weights = Matrix(d, cfg.k);
  m.decoder_bias.assign(d, 0.0);

  std::mt19937_64 rng(cfg.seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(d + cfg.k));
  std::uniform_real_distribution<double> xavier(-limit, limit);
  for (std::size_t i = 0; i < cfg.k * d; ++i) m.encoder_weights.data()[i] = xavier(rng);
  for (std::size_t i = 0; i < d * cfg.k; ++i) m.decoder_weights.data()[i] = xavier(rng);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  m.training_log.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(order[i], order[pick(rng)]);
    }
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, n);
      Matrix batch(stop - start, d);
      for (std::size_t i = start; i < stop; ++i)
        for (std::size_t j = 0; j < d; ++j) batch(i - start, j) = data(order[i], j);
      const AeGradients g = ae_gradients(m, batch);
      const double lr = cfg.learning_rate;
      for (std::size_t i = 0; i < cfg.k * d; ++i)
        m.encoder_weights.data()[i] -= lr * g.d_encoder_weights.data()[i];
      for (std::size_t i = 0; i < cfg.k; ++i) m.encoder_bias[i] -= lr * g.d_encoder_bias[i];
      for (std::size_t i = 0; i < d * cfg.k; ++i)
        m.decoder_weights.data()[i] -= lr * g.d_decoder_weights.data()[i];
      for (std::size_t i = 0; i < d; ++i) m.decoder_bias[i] -= lr * g.d_decoder_bias[i];
    }
    const double loss = ae_loss(m, data);
    if (!std::isfinite(loss))
      throw NonFiniteLoss("loss diverged at epoch " + std::to_string(epoch) +
                          "; lower the learning rate");
    m.training_log.push_back(loss);
  }
  return m;
}

}  // namespace binclust
