#include "satsense/compressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "satsense/error.hpp"
#include "satsense/rng.hpp"

namespace satsense {

namespace {

constexpr double kCosineEps = 1e-12;

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

Matrix relu_grad(const Matrix& pre, const Matrix& upstream) {
  return (pre.array() > 0.0).select(upstream, 0.0);
}

Matrix affine(const Matrix& w, const Vector& b, const Matrix& x) {
  Matrix out = w * x;
  out.colwise() += b;
  return out;
}

void check_encoder(const EncoderParams& p) {
  if (p.w1.rows() != p.b1.size() || p.w2.rows() != p.b2.size() || p.w2.cols() != p.w1.rows()) {
    throw InvalidArgument("encoder parameter dimensions are inconsistent");
  }
}

void check_decoder(const DecoderParams& p) {
  if (p.w3.rows() != p.b3.size() || p.wd.rows() != p.bd.size() || p.wd.cols() != p.w3.rows()) {
    throw InvalidArgument("decoder parameter dimensions are inconsistent");
  }
}

}  // namespace

void CompressorDims::validate() const {
  if (input == 0 || hidden == 0 || embedding == 0 || intermediate == 0) {
    throw InvalidArgument("compressor dimensions must be positive");
  }
}

Matrix encode_batch(const Matrix& x, const EncoderParams& p) {
  check_encoder(p);
  if (x.rows() != p.w1.cols()) throw InvalidArgument("encoder input dimension mismatch");
  return relu(affine(p.w2, p.b2, relu(affine(p.w1, p.b1, x))));
}

Matrix intermediate_batch(const Matrix& z, const DecoderParams& p) {
  check_decoder(p);
  if (z.rows() != p.w3.cols()) throw InvalidArgument("embedding dimension mismatch");
  return relu(affine(p.w3, p.b3, z));
}

Matrix decode_batch(const Matrix& z, const DecoderParams& p) {
  return relu(affine(p.wd, p.bd, intermediate_batch(z, p)));
}

Embedding encode(std::span<const double> x, const EncoderParams& p) {
  const Eigen::Map<const Vector> input(x.data(), static_cast<Eigen::Index>(x.size()));
  const Matrix z = encode_batch(input, p);
  Embedding e;
  e.values.resize(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) e.values[static_cast<std::size_t>(i)] = static_cast<float>(z(i, 0));
  return e;
}

Decoded decode(const Embedding& z, const DecoderParams& p) {
  check_decoder(p);
  if (static_cast<Eigen::Index>(z.size()) != p.w3.cols()) throw InvalidArgument("embedding dimension mismatch");
  Vector zin(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) zin(static_cast<Eigen::Index>(i)) = z.values[i];
  Decoded out;
  out.intermediate = relu(affine(p.w3, p.b3, zin));
  const Vector xhat = relu(affine(p.wd, p.bd, out.intermediate));
  out.recovered.values.assign(xhat.data(), xhat.data() + xhat.size());
  return out;
}

double ae_loss(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size()) throw InvalidArgument("ae_loss: length mismatch");
  if (x.empty()) throw InvalidArgument("ae_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - x_hat[i]) * (x[i] - x_hat[i]);
  return acc / static_cast<double>(x.size());
}

double cosine_loss(std::span<const double> r, std::span<const double> r_hat) {
  if (r.size() != r_hat.size()) throw InvalidArgument("cosine_loss: length mismatch");
  const double dot = std::inner_product(r.begin(), r.end(), r_hat.begin(), 0.0);
  const double nr = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
  const double nh = std::sqrt(std::inner_product(r_hat.begin(), r_hat.end(), r_hat.begin(), 0.0));
  if (nr == 0.0 || nh == 0.0) throw UndefinedCosine("cosine undefined for zero-norm vector");
  return 1.0 - dot / (nr * nh);
}

double cae_loss(std::span<const double> x, std::span<const double> x_hat, std::span<const double> r,
                std::span<const double> r_hat, double alpha1, double alpha2) {
  return alpha1 * ae_loss(x, x_hat) + alpha2 * cosine_loss(r, r_hat);
}

std::string_view to_string(CompressorKind k) { return k == CompressorKind::cae ? "cae" : "ae"; }

CompressorKind parse_compressor_kind(std::string_view name) {
  if (name == "cae") return CompressorKind::cae;
  if (name == "ae") return CompressorKind::ae;
  throw InvalidArgument("unknown compressor kind: " + std::string(name));
}

std::vector<ParamView> Autoencoder::parameters() {
  return {view_of("enc_w1", encoder.w1), view_of("enc_b1", encoder.b1), view_of("enc_w2", encoder.w2),
          view_of("enc_b2", encoder.b2), view_of("dec_w3", decoder.w3), view_of("dec_b3", decoder.b3),
          view_of("dec_wd", decoder.wd), view_of("dec_bd", decoder.bd)};
}

Autoencoder make_autoencoder(const CompressorDims& dims, std::uint64_t seed, CompressorKind kind) {
  dims.validate();
  Autoencoder m;
  m.kind = kind;
  m.dims = dims;
  const auto in = static_cast<Eigen::Index>(dims.input);
  const auto k1 = static_cast<Eigen::Index>(dims.hidden);
  const auto emb = static_cast<Eigen::Index>(dims.embedding);
  const auto k2 = static_cast<Eigen::Index>(dims.intermediate);
  m.encoder.w1.resize(k1, in);
  m.encoder.w2.resize(emb, k1);
  m.decoder.w3.resize(k2, emb);
  m.decoder.wd.resize(in, k2);
  fan_in_uniform(m.encoder.w1, dims.input, derive_seed(seed, 1));
  fan_in_uniform(m.encoder.w2, dims.hidden, derive_seed(seed, 2));
  fan_in_uniform(m.decoder.w3, dims.embedding, derive_seed(seed, 3));
  fan_in_uniform(m.decoder.wd, dims.intermediate, derive_seed(seed, 4));
  m.encoder.b1 = Vector::Zero(k1);
  m.encoder.b2 = Vector::Zero(emb);
  m.decoder.b3 = Vector::Zero(k2);
  m.decoder.bd = Vector::Zero(in);
  return m;
}

Autoencoder zeros_like(const Autoencoder& model) {
  Autoencoder g = model;
  zero_all(g.parameters());
  return g;
}

BatchLoss autoencoder_loss(const Autoencoder& model, const Matrix& x, const KeepMaskFn& corrupt,
                           const LossWeights& weights, Autoencoder* grads) {
  const EncoderParams& enc = model.encoder;
  const DecoderParams& dec = model.decoder;
  check_encoder(enc);
  check_decoder(dec);
  if (x.rows() != enc.w1.cols() || dec.wd.rows() != x.rows()) throw InvalidArgument("batch dimension mismatch");
  const Eigen::Index batch = x.cols();
  if (batch == 0) throw InvalidArgument("empty batch");
  const double B = static_cast<double>(batch);
  const double D = static_cast<double>(x.rows());

  const Matrix h1 = affine(enc.w1, enc.b1, x);
  const Matrix a1 = relu(h1);
  const Matrix h2 = affine(enc.w2, enc.b2, a1);
  const Matrix z = relu(h2);

  Matrix keep;
  const bool lossy = static_cast<bool>(corrupt);
  if (lossy) {
    keep = corrupt(z);
    if (keep.rows() != z.rows() || keep.cols() != z.cols()) throw InvalidArgument("keep mask shape mismatch");
  }
  const Matrix z_hat = lossy ? Matrix(z.cwiseProduct(keep)) : z;

  const Matrix u = affine(dec.w3, dec.b3, z);
  const Matrix r = relu(u);
  const Matrix u_hat = lossy ? affine(dec.w3, dec.b3, z_hat) : u;
  const Matrix r_hat = lossy ? relu(u_hat) : r;
  const Matrix v = affine(dec.wd, dec.bd, r_hat);
  const Matrix x_hat = relu(v);

  BatchLoss loss;
  const Matrix diff = x_hat - x;
  loss.reconstruction = diff.squaredNorm() / (D * B);

  // Cosine term, per sample, with the norms stabilized so that a collapsed
  // (all-zero) intermediate scores cos = 0 instead of being undefined.
  std::vector<double> cos_val(static_cast<std::size_t>(batch), 1.0);
  double cos_sum = 0.0;
  const bool contrastive = lossy && weights.alpha2 != 0.0;
  if (contrastive) {
    for (Eigen::Index b = 0; b < batch; ++b) {
      const double den = std::sqrt((r.col(b).squaredNorm() + kCosineEps) * (r_hat.col(b).squaredNorm() + kCosineEps));
      const double c = r.col(b).dot(r_hat.col(b)) / den;
      cos_val[static_cast<std::size_t>(b)] = c;
      cos_sum += 1.0 - c;
    }
  }
  loss.contrastive = cos_sum / B;
  loss.total = weights.alpha1 * loss.reconstruction + weights.alpha2 * loss.contrastive;

  if (grads == nullptr) return loss;

  const Matrix d_xhat = (2.0 * weights.alpha1 / (D * B)) * diff;
  const Matrix d_v = relu_grad(v, d_xhat);
  grads->decoder.wd.noalias() = d_v * r_hat.transpose();
  grads->decoder.bd = d_v.rowwise().sum();
  Matrix d_rhat = dec.wd.transpose() * d_v;
  Matrix d_r = Matrix::Zero(r.rows(), r.cols());

  if (contrastive) {
    const double scale = -weights.alpha2 / B;
    for (Eigen::Index b = 0; b < batch; ++b) {
      const double c = cos_val[static_cast<std::size_t>(b)];
      const double a = r.col(b).squaredNorm() + kCosineEps;
      const double h = r_hat.col(b).squaredNorm() + kCosineEps;
      const double den = std::sqrt(a * h);
      d_rhat.col(b) += scale * (r.col(b) / den - c * r_hat.col(b) / h);
      d_r.col(b) += scale * (r_hat.col(b) / den - c * r.col(b) / a);
    }
  }

  Matrix d_z;
  if (lossy) {
    const Matrix d_uhat = relu_grad(u_hat, d_rhat);
    const Matrix d_u = relu_grad(u, d_r);
    grads->decoder.w3.noalias() = d_u * z.transpose() + d_uhat * z_hat.transpose();
    grads->decoder.b3 = d_u.rowwise().sum() + d_uhat.rowwise().sum();
    d_z = dec.w3.transpose() * d_u + keep.cwiseProduct(dec.w3.transpose() * d_uhat);
  } else {
    const Matrix d_u = relu_grad(u, d_rhat);
    grads->decoder.w3.noalias() = d_u * z.transpose();
    grads->decoder.b3 = d_u.rowwise().sum();
    d_z = dec.w3.transpose() * d_u;
  }

  const Matrix d_h2 = relu_grad(h2, d_z);
  grads->encoder.w2.noalias() = d_h2 * a1.transpose();
  grads->encoder.b2 = d_h2.rowwise().sum();
  const Matrix d_h1 = relu_grad(h1, enc.w2.transpose() * d_h2);
  grads->encoder.w1.noalias() = d_h1 * x.transpose();
  grads->encoder.b1 = d_h1.rowwise().sum();
  return loss;
}

Matrix observation_matrix(std::span<const SatObservation> dataset) {
  if (dataset.empty()) throw InvalidArgument("empty dataset");
  const std::size_t dim = dataset.front().values.size();
  Matrix data(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    const SatObservation& obs = dataset[s];
    if (!obs.normalized) throw InvalidArgument("training observations must be normalized");
    if (obs.values.size() != dim) throw InvalidArgument("observations have mixed dimensions");
    data.col(static_cast<Eigen::Index>(s)) = Eigen::Map<const Vector>(obs.values.data(), static_cast<Eigen::Index>(dim));
  }
  return data;
}

namespace {

CompressorTraining train_compressor(const Matrix& data, const CorruptionOp* corrupt, const TrainSchedule& schedule,
                                    const CompressorOptions& options, CompressorKind kind) {
  if (data.cols() == 0) throw InvalidArgument("empty dataset");
  if (schedule.batch_size == 0 || schedule.epochs == 0) throw InvalidArgument("schedule needs epochs and batch size");
  CompressorDims dims{static_cast<std::size_t>(data.rows()), options.hidden, options.embedding, options.intermediate};

  // CAE and AE share the initial weights and batch order for a given seed.
  CompressorTraining result{make_autoencoder(dims, derive_seed(schedule.seed, 0xAE), kind), {}};
  Autoencoder& model = result.model;
  Autoencoder grads = zeros_like(model);
  std::vector<ParamView> params = model.parameters();
  std::vector<ParamView> grad_views = grads.parameters();
  Adam adam;
  Rng order_rng(derive_seed(schedule.seed, 0x5EED));
  Rng corruption_rng(derive_seed(schedule.seed, 0xC0DE));

  const LossWeights weights = kind == CompressorKind::cae ? options.weights : LossWeights{1.0, 0.0};
  const auto n = static_cast<std::size_t>(data.cols());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
    const double lr = schedule.learning_rate(epoch);
    std::shuffle(order.begin(), order.end(), order_rng.engine());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += schedule.batch_size) {
      const std::size_t count = std::min(schedule.batch_size, n - start);
      Matrix batch(data.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t i = 0; i < count; ++i) batch.col(static_cast<Eigen::Index>(i)) = data.col(static_cast<Eigen::Index>(order[start + i]));

      KeepMaskFn keep_fn;
      if (corrupt != nullptr) {
        const double rate = corruption_rng.uniform(options.min_train_rate, options.max_train_rate);
        const std::uint64_t batch_seed = corruption_rng.next_seed();
        keep_fn = [&, rate, batch_seed](const Matrix& z) {
          Matrix keep = Matrix::Ones(z.rows(), z.cols());
          for (Eigen::Index b = 0; b < z.cols(); ++b) {
            Embedding clean;
            clean.values.resize(static_cast<std::size_t>(z.rows()));
            for (Eigen::Index i = 0; i < z.rows(); ++i) clean.values[static_cast<std::size_t>(i)] = static_cast<float>(z(i, b));
            const Embedding received = (*corrupt)(clean, rate, derive_seed(batch_seed, static_cast<std::uint64_t>(b)));
            if (!received.corrupted) continue;
            for (Eigen::Index i = 0; i < z.rows(); ++i) {
              if (received.loss_mask[static_cast<std::size_t>(i)]) keep(i, b) = 0.0;
            }
          }
          return keep;
        };
      }

      const BatchLoss loss = autoencoder_loss(model, batch, keep_fn, weights, &grads);
      if (!std::isfinite(loss.total)) {
        result.history.push_back(loss.total);
        throw TrainingFailure("compressor training diverged in epoch " + std::to_string(epoch), result.history);
      }
      epoch_loss += loss.total * static_cast<double>(count);
      adam.step(params, grad_views, lr);
    }
    result.history.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

}  // namespace

CompressorTraining train_cae(const Matrix& data, const CorruptionOp& corrupt, const TrainSchedule& schedule,
                             const CompressorOptions& options) {
  if (!corrupt) throw InvalidArgument("train_cae requires a corruption operator");
  return train_compressor(data, &corrupt, schedule, options, CompressorKind::cae);
}

CompressorTraining train_cae(std::span<const SatObservation> dataset, const CorruptionOp& corrupt,
                             const TrainSchedule& schedule, const CompressorOptions& options) {
  return train_cae(observation_matrix(dataset), corrupt, schedule, options);
}

CompressorTraining train_ae(const Matrix& data, const TrainSchedule& schedule, const CompressorOptions& options) {
  return train_compressor(data, nullptr, schedule, options, CompressorKind::ae);
}

CompressorTraining train_ae(std::span<const SatObservation> dataset, const TrainSchedule& schedule,
                            const CompressorOptions& options) {
  return train_ae(observation_matrix(dataset), schedule, options);
}

}  // namespace satsense
