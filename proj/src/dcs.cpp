#include "satsense/dcs.hpp"

#include <cmath>
#include <limits>

#include "fit_classifier.hpp"
#include "satsense/error.hpp"
#include "satsense/rng.hpp"

namespace satsense {

namespace {

constexpr Eigen::Index kKernel = 3;

// Feature maps are (channels x rows*cols), spatial index = y * cols + x.
Matrix im2col(const Matrix& in, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index out_r = rows - kKernel + 1;
  const Eigen::Index out_c = cols - kKernel + 1;
  Matrix out(in.rows() * kKernel * kKernel, out_r * out_c);
  for (Eigen::Index c = 0; c < in.rows(); ++c) {
    for (Eigen::Index ky = 0; ky < kKernel; ++ky) {
      for (Eigen::Index kx = 0; kx < kKernel; ++kx) {
        const Eigen::Index row = c * kKernel * kKernel + ky * kKernel + kx;
        for (Eigen::Index y = 0; y < out_r; ++y) {
          for (Eigen::Index x = 0; x < out_c; ++x) out(row, y * out_c + x) = in(c, (y + ky) * cols + x + kx);
        }
      }
    }
  }
  return out;
}

Matrix col2im(const Matrix& d_cols, Eigen::Index channels, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index out_r = rows - kKernel + 1;
  const Eigen::Index out_c = cols - kKernel + 1;
  Matrix d_in = Matrix::Zero(channels, rows * cols);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (Eigen::Index ky = 0; ky < kKernel; ++ky) {
      for (Eigen::Index kx = 0; kx < kKernel; ++kx) {
        const Eigen::Index row = c * kKernel * kKernel + ky * kKernel + kx;
        for (Eigen::Index y = 0; y < out_r; ++y) {
          for (Eigen::Index x = 0; x < out_c; ++x) d_in(c, (y + ky) * cols + x + kx) += d_cols(row, y * out_c + x);
        }
      }
    }
  }
  return d_in;
}

struct Pooled {
  Matrix out;
  std::vector<Eigen::Index> argmax;  // per output element, flat spatial index into the input
};

Pooled maxpool2(const Matrix& in, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index out_r = rows / 2;
  const Eigen::Index out_c = cols / 2;
  Pooled p{Matrix(in.rows(), out_r * out_c), std::vector<Eigen::Index>(static_cast<std::size_t>(in.rows() * out_r * out_c))};
  for (Eigen::Index c = 0; c < in.rows(); ++c) {
    for (Eigen::Index y = 0; y < out_r; ++y) {
      for (Eigen::Index x = 0; x < out_c; ++x) {
        Eigen::Index best = (2 * y) * cols + 2 * x;
        for (Eigen::Index dy = 0; dy < 2; ++dy) {
          for (Eigen::Index dx = 0; dx < 2; ++dx) {
            const Eigen::Index idx = (2 * y + dy) * cols + 2 * x + dx;
            if (in(c, idx) > in(c, best)) best = idx;
          }
        }
        const Eigen::Index o = y * out_c + x;
        p.out(c, o) = in(c, best);
        p.argmax[static_cast<std::size_t>(c * out_r * out_c + o)] = best;
      }
    }
  }
  return p;
}

Matrix maxpool2_backward(const Matrix& d_out, const std::vector<Eigen::Index>& argmax, Eigen::Index in_spatial) {
  Matrix d_in = Matrix::Zero(d_out.rows(), in_spatial);
  for (Eigen::Index c = 0; c < d_out.rows(); ++c) {
    for (Eigen::Index o = 0; o < d_out.cols(); ++o) {
      d_in(c, argmax[static_cast<std::size_t>(c * d_out.cols() + o)]) += d_out(c, o);
    }
  }
  return d_in;
}

Matrix conv(const Matrix& w, const Vector& b, const Matrix& cols) {
  Matrix out = w * cols;
  out.colwise() += b;
  return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ConvTrace {
  Matrix cols1, pre1;
  Pooled pool1;
  Matrix cols2, pre2;
  Pooled pool2;
};

// Convolutional trunk for one image; returns the flattened features.
Vector trunk_forward(std::span<const double> input, const DcsModel& m, ConvTrace* trace) {
  const DcsConfig& c = m.config;
  if (input.size() != c.rows * c.cols) throw InvalidArgument("DCS input length != K*2PN");
  const auto rows = static_cast<Eigen::Index>(c.rows);
  const auto cols = static_cast<Eigen::Index>(c.cols);
  const Matrix image = Eigen::Map<const Matrix>(input.data(), 1, rows * cols);

  ConvTrace local;
  ConvTrace& t = trace != nullptr ? *trace : local;
  t.cols1 = im2col(image, rows, cols);
  t.pre1 = conv(m.conv1_w, m.conv1_b, t.cols1);
  t.pool1 = maxpool2(t.pre1.cwiseMax(0.0), rows - 2, cols - 2);
  t.cols2 = im2col(t.pool1.out, static_cast<Eigen::Index>(c.pool1_rows()), static_cast<Eigen::Index>(c.pool1_cols()));
  t.pre2 = conv(m.conv2_w, m.conv2_b, t.cols2);
  t.pool2 = maxpool2(t.pre2.cwiseMax(0.0), static_cast<Eigen::Index>(c.conv2_rows()), static_cast<Eigen::Index>(c.conv2_cols()));

  // Channel-major flattening.
  const Matrix& p = t.pool2.out;
  Vector flat(p.size());
  for (Eigen::Index ch = 0; ch < p.rows(); ++ch) flat.segment(ch * p.cols(), p.cols()) = p.row(ch).transpose();
  return flat;
}

}  // namespace

void DcsConfig::validate() const {
  if (rows < 4 || cols < 4) throw InvalidArgument("DCS input too small for two conv/pool stages");
  if (conv1_filters == 0 || conv2_filters == 0 || hidden == 0 || num_bands == 0) {
    throw InvalidArgument("DCS layer sizes must be positive");
  }
  if (pool1_rows() < 3 || pool1_cols() < 3 || pool2_rows() == 0 || pool2_cols() == 0) {
    throw InvalidArgument("DCS input too small for two conv/pool stages");
  }
}

std::vector<ParamView> DcsModel::parameters() {
  return {view_of("conv1_w", conv1_w), view_of("conv1_b", conv1_b), view_of("conv2_w", conv2_w),
          view_of("conv2_b", conv2_b), view_of("fc1_w", fc1_w),     view_of("fc1_b", fc1_b),
          view_of("fc2_w", fc2_w),     view_of("fc2_b", fc2_b)};
}

DcsModel make_dcs(const DcsConfig& config, std::uint64_t seed) {
  config.validate();
  DcsModel m;
  m.config = config;
  const auto f1 = static_cast<Eigen::Index>(config.conv1_filters);
  const auto f2 = static_cast<Eigen::Index>(config.conv2_filters);
  const auto hidden = static_cast<Eigen::Index>(config.hidden);
  m.conv1_w.resize(f1, kKernel * kKernel);
  m.conv2_w.resize(f2, f1 * kKernel * kKernel);
  m.fc1_w.resize(hidden, static_cast<Eigen::Index>(config.flat_dim()));
  m.fc2_w.resize(static_cast<Eigen::Index>(config.num_bands), hidden);
  fan_in_uniform(m.conv1_w, 9, derive_seed(seed, 1));
  fan_in_uniform(m.conv2_w, config.conv1_filters * 9, derive_seed(seed, 2));
  fan_in_uniform(m.fc1_w, config.flat_dim(), derive_seed(seed, 3));
  fan_in_uniform(m.fc2_w, config.hidden, derive_seed(seed, 4));
  m.conv1_b = Vector::Zero(f1);
  m.conv2_b = Vector::Zero(f2);
  m.fc1_b = Vector::Zero(hidden);
  m.fc2_b = Vector::Zero(static_cast<Eigen::Index>(config.num_bands));
  return m;
}

DcsModel zeros_like(const DcsModel& model) {
  DcsModel g = model;
  zero_all(g.parameters());
  return g;
}

OccupancyPrediction dcs_forward(std::span<const double> input, const DcsModel& model) {
  const Vector flat = trunk_forward(input, model, nullptr);
  const Vector hidden = (model.fc1_w * flat + model.fc1_b).cwiseMax(0.0);
  const Vector logits = model.fc2_w * hidden + model.fc2_b;
  std::vector<double> scores(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index k = 0; k < logits.size(); ++k) scores[static_cast<std::size_t>(k)] = sigmoid(logits(k));
  return OccupancyPrediction::from_scores(std::move(scores));
}

namespace {

// Row-major flattening of the K x 2PN node matrix gives the (K*2P) x N image.
std::vector<double> image_of(const SensingGraph& graph) {
  std::vector<double> img(static_cast<std::size_t>(graph.features.size()));
  const Eigen::Index dim = graph.features.cols();
  for (Eigen::Index i = 0; i < graph.features.rows(); ++i) {
    for (Eigen::Index c = 0; c < dim; ++c) img[static_cast<std::size_t>(i * dim + c)] = graph.features(i, c);
  }
  return img;
}

}  // namespace

OccupancyPrediction dcs_forward(const SensingGraph& graph, const DcsModel& model) {
  const std::vector<double> img = image_of(graph);
  return dcs_forward(std::span<const double>(img), model);
}

double dcs_loss(const DcsModel& model, std::span<const LabeledGraph> data, std::span<const std::size_t> batch,
                DcsModel* grads) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const DcsConfig& c = model.config;
  const auto nb = static_cast<Eigen::Index>(batch.size());
  const auto bands = static_cast<Eigen::Index>(c.num_bands);

  std::vector<ConvTrace> traces(batch.size());
  Matrix flat(static_cast<Eigen::Index>(c.flat_dim()), nb);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const LabeledGraph& s = data[batch[b]];
    if (s.label.size() != c.num_bands) throw InvalidArgument("label length != num_bands");
    const std::vector<double> img = image_of(s.graph);
    flat.col(static_cast<Eigen::Index>(b)) = trunk_forward(img, model, grads != nullptr ? &traces[b] : nullptr);
  }
  Matrix pre3 = model.fc1_w * flat;
  pre3.colwise() += model.fc1_b;
  const Matrix a3 = pre3.cwiseMax(0.0);
  Matrix logits = model.fc2_w * a3;
  logits.colwise() += model.fc2_b;
  const Matrix scores = logits.unaryExpr([](double v) { return sigmoid(v); });
  Matrix labels(bands, nb);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (Eigen::Index k = 0; k < bands; ++k) labels(k, static_cast<Eigen::Index>(b)) = data[batch[b]].label[static_cast<std::size_t>(k)];
  }
  const Matrix diff = scores - labels;
  const double denom = static_cast<double>(nb * bands);
  const double loss = diff.squaredNorm() / denom;
  if (grads == nullptr) return loss;

  zero_all(grads->parameters());
  const Matrix d_logits = ((2.0 / denom) * diff).cwiseProduct(scores.cwiseProduct((1.0 - scores.array()).matrix()));
  grads->fc2_w.noalias() = d_logits * a3.transpose();
  grads->fc2_b = d_logits.rowwise().sum();
  const Matrix d_pre3 = (pre3.array() > 0.0).select((model.fc2_w.transpose() * d_logits).array(), 0.0).matrix();
  grads->fc1_w.noalias() = d_pre3 * flat.transpose();
  grads->fc1_b = d_pre3.rowwise().sum();
  const Matrix d_flat = model.fc1_w.transpose() * d_pre3;

  const auto f2 = static_cast<Eigen::Index>(c.conv2_filters);
  const auto f1 = static_cast<Eigen::Index>(c.conv1_filters);
  const auto p2_spatial = static_cast<Eigen::Index>(c.pool2_rows() * c.pool2_cols());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const ConvTrace& t = traces[b];
    Matrix d_p2(f2, p2_spatial);
    for (Eigen::Index ch = 0; ch < f2; ++ch) {
      d_p2.row(ch) = d_flat.col(static_cast<Eigen::Index>(b)).segment(ch * p2_spatial, p2_spatial).transpose();
    }
    Matrix d_pre2 = maxpool2_backward(d_p2, t.pool2.argmax, t.pre2.cols());
    d_pre2 = (t.pre2.array() > 0.0).select(d_pre2.array(), 0.0).matrix();
    grads->conv2_w.noalias() += d_pre2 * t.cols2.transpose();
    grads->conv2_b += d_pre2.rowwise().sum();
    const Matrix d_cols2 = model.conv2_w.transpose() * d_pre2;
    const Matrix d_p1 = col2im(d_cols2, f1, static_cast<Eigen::Index>(c.pool1_rows()), static_cast<Eigen::Index>(c.pool1_cols()));
    Matrix d_pre1 = maxpool2_backward(d_p1, t.pool1.argmax, t.pre1.cols());
    d_pre1 = (t.pre1.array() > 0.0).select(d_pre1.array(), 0.0).matrix();
    grads->conv1_w.noalias() += d_pre1 * t.cols1.transpose();
    grads->conv1_b += d_pre1.rowwise().sum();
  }
  return loss;
}

ClassifierTraining<DcsModel> train_dcs(std::span<const LabeledGraph> train, std::span<const LabeledGraph> val,
                                       const TrainSchedule& schedule, const DcsConfig& config,
                                       const EpochLogger& logger) {
  auto predict = [](const SensingGraph& g, const DcsModel& m) { return dcs_forward(g, m); };
  return detail::fit_classifier(make_dcs(config, derive_seed(schedule.seed, 0xDC5)), train, val, schedule, dcs_loss,
                                predict, logger, "DCS");
}

}  // namespace satsense
