#pragma once

// Fully connected autoencoder used on board (encoder) and at the ground
// station (intermediate layer + decoder), trained either with the contrastive
// packet-loss objective (CAE) or with plain reconstruction MSE (AE).
//
//   encoder:       z  = relu(W2 relu(W1 x + b1) + b2)
//   intermediate:  r  = relu(W3 z + b3),  r^ = relu(W3 z^ + b3)
//   decoder:       x^ = relu(Wd r^ + bd)

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "satsense/embedding.hpp"
#include "satsense/optim.hpp"
#include "satsense/sampler.hpp"

namespace satsense {

struct CompressorDims {
  std::size_t input = 6400;        // 2PN
  std::size_t hidden = 1600;       // K1
  std::size_t embedding = 640;     // M
  std::size_t intermediate = 2048; // K2

  void validate() const;
  double compression_factor() const { return static_cast<double>(input) / static_cast<double>(embedding); }
};

struct EncoderParams {
  Matrix w1;  // hidden x input
  Vector b1;
  Matrix w2;  // embedding x hidden
  Vector b2;
};

struct DecoderParams {
  Matrix w3;  // intermediate x embedding
  Vector b3;
  Matrix wd;  // input x intermediate
  Vector bd;
};

struct RecoveredObservation {
  std::vector<double> values;  // length 2PN, row-major 2P x N
};

struct Decoded {
  RecoveredObservation recovered;
  Vector intermediate;  // r^ as seen by the decoder
};

Embedding encode(std::span<const double> x, const EncoderParams& p);
Decoded decode(const Embedding& z, const DecoderParams& p);

// Batched forms operate on column-per-sample matrices.
Matrix encode_batch(const Matrix& x, const EncoderParams& p);
Matrix intermediate_batch(const Matrix& z, const DecoderParams& p);
Matrix decode_batch(const Matrix& z, const DecoderParams& p);

/// Mean squared error over all elements.
double ae_loss(std::span<const double> x, std::span<const double> x_hat);

/// 1 - cos(r, r^). Throws UndefinedCosine if either vector has zero norm.
double cosine_loss(std::span<const double> r, std::span<const double> r_hat);

/// alpha1 * mse(x, x^) + alpha2 * (1 - cos(r, r^)).
double cae_loss(std::span<const double> x, std::span<const double> x_hat, std::span<const double> r,
                std::span<const double> r_hat, double alpha1 = 1.0, double alpha2 = 3.0);

enum class CompressorKind { cae, ae };

std::string_view to_string(CompressorKind k);
CompressorKind parse_compressor_kind(std::string_view name);

struct Autoencoder {
  CompressorKind kind = CompressorKind::cae;
  CompressorDims dims;
  EncoderParams encoder;
  DecoderParams decoder;

  std::vector<ParamView> parameters();
};

/// Fan-in uniform weights and zero biases, all derived from `seed`.
Autoencoder make_autoencoder(const CompressorDims& dims, std::uint64_t seed, CompressorKind kind);
Autoencoder zeros_like(const Autoencoder& model);

struct LossWeights {
  double alpha1 = 1.0;
  double alpha2 = 3.0;
};

struct BatchLoss {
  double total = 0.0;
  double reconstruction = 0.0;
  double contrastive = 0.0;
};

/// Given the batch embeddings (embedding x B), returns a keep mask of the
/// same shape: 1 where the element survived transmission, 0 where lost.
using KeepMaskFn = std::function<Matrix(const Matrix& z)>;

/// Batch-mean loss of the contrastive objective. An empty `corrupt` means no
/// loss on the link (z^ = z). When `grads` is non-null it receives the
/// gradient of the batch-mean loss with respect to every parameter.
/// The cosine term uses norms stabilized by a small epsilon, so a zero r or r^
/// scores cos = 0 (full penalty) rather than being undefined.
BatchLoss autoencoder_loss(const Autoencoder& model, const Matrix& x, const KeepMaskFn& corrupt,
                           const LossWeights& weights, Autoencoder* grads);

/// The downlink corruption operator: (clean embedding, loss rate, seed) -> received embedding.
using CorruptionOp = std::function<Embedding(const Embedding&, double rate, std::uint64_t seed)>;

struct CompressorOptions {
  std::size_t hidden = 1600;
  std::size_t embedding = 640;
  std::size_t intermediate = 2048;
  LossWeights weights;
  // Per-batch training loss rate is drawn uniformly from this range.
  double min_train_rate = 0.0;
  double max_train_rate = 0.03;
};

struct CompressorTraining {
  Autoencoder model;
  std::vector<double> history;  // mean training loss per epoch
};

/// Stacks normalized observations column-wise (2PN x count).
Matrix observation_matrix(std::span<const SatObservation> dataset);

CompressorTraining train_cae(const Matrix& data, const CorruptionOp& corrupt, const TrainSchedule& schedule,
                             const CompressorOptions& options);
CompressorTraining train_cae(std::span<const SatObservation> dataset, const CorruptionOp& corrupt,
                             const TrainSchedule& schedule, const CompressorOptions& options);

/// Same architecture trained on reconstruction MSE with a lossless link.
CompressorTraining train_ae(const Matrix& data, const TrainSchedule& schedule, const CompressorOptions& options);
CompressorTraining train_ae(std::span<const SatObservation> dataset, const TrainSchedule& schedule,
                            const CompressorOptions& options);

}  // namespace satsense
