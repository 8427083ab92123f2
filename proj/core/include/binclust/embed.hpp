#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "binclust/matrix.hpp"

namespace binclust {

// Exact PCA: rows of `components` are the top-k principal axes, orthonormal,
// sign-canonicalized so each row's largest-magnitude entry is positive.
struct PcaModel {
  std::vector<double> mean;              // length d
  Matrix components;                     // k x d
  std::vector<double> explained_variance;  // length k, descending
  std::size_t k = 0;

  std::size_t input_dim() const { return mean.size(); }
};

enum class Activation { Linear, ReLU, Sigmoid };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

// Single-bottleneck autoencoder d -> k -> d with a linear output layer.
struct AutoencoderModel {
  Matrix encoder_weights;              // k x d
  std::vector<double> encoder_bias;    // k
  Matrix decoder_weights;              // d x k
  std::vector<double> decoder_bias;    // d
  Activation activation = Activation::ReLU;
  std::vector<double> training_log;    // full-data MSE after each epoch

  std::size_t input_dim() const { return encoder_weights.cols(); }
  std::size_t code_dim() const { return encoder_weights.rows(); }
};

enum class EmbedMethod { Pca, Autoencoder };

std::string to_string(EmbedMethod m);
EmbedMethod parse_embed_method(const std::string& s);

struct EmbedConfig {
  EmbedMethod method = EmbedMethod::Pca;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  // Autoencoder hyperparameters.
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  Activation activation = Activation::ReLU;

  std::string name() const;  // e.g. "pca-10", "ae-30"
};

// ---- PCA ----

// Top-k eigenpairs of the sample covariance (denominator n-1). When n < d
// the decomposition runs on the n x n Gram matrix instead.
PcaModel fit_pca(const Matrix& data, std::size_t k);

Matrix pca_transform(const PcaModel& m, const Matrix& data);
Matrix pca_inverse_transform(const PcaModel& m, const Matrix& codes);

// ---- Autoencoder ----

// Mini-batch SGD on mean squared reconstruction error, Xavier-uniform init,
// deterministic for a fixed seed. Throws NonFiniteLoss on divergence.
AutoencoderModel fit_autoencoder(const Matrix& data, const EmbedConfig& cfg);

Matrix ae_encode(const AutoencoderModel& m, const Matrix& data);
Matrix ae_decode(const AutoencoderModel& m, const Matrix& codes);
Matrix ae_reconstruct(const AutoencoderModel& m, const Matrix& data);

// Mean over samples and dimensions of the squared reconstruction residual.
double ae_loss(const AutoencoderModel& m, const Matrix& batch);

struct AeGradients {
  Matrix d_encoder_weights;
  std::vector<double> d_encoder_bias;
  Matrix d_decoder_weights;
  std::vector<double> d_decoder_bias;
};

AeGradients ae_gradients(const AutoencoderModel& m, const Matrix& batch);
AeGradients ae_fd_gradients(AutoencoderModel m, const Matrix& batch, double epsilon);

// Max relative error between analytic and central finite-difference
// gradients over every parameter. Error is measured against the
// finite-difference value; pairs where both sides are below 1e-12 count
// as 0.
double gradient_check(const AutoencoderModel& m, const Matrix& batch, double epsilon);

// ---- Persistence (magic BCE1) ----

void save_pca(const PcaModel& m, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);
void save_autoencoder(const AutoencoderModel& m, const std::filesystem::path& path);
AutoencoderModel load_autoencoder(const std::filesystem::path& path);

}  // namespace binclust
