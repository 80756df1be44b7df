#include "satsense/glss.hpp"

#include <cmath>
#include <string>

#include "fit_classifier.hpp"
#include "satsense/error.hpp"
#include "satsense/rng.hpp"

namespace satsense {

SensingGraph build_graph(std::span<const RecoveredObservation> recovered) {
  if (recovered.size() < 2) throw InvalidArgument("a sensing graph needs at least two satellites");
  const std::size_t dim = recovered.front().values.size();
  if (dim == 0) throw InvalidArgument("empty node features");
  SensingGraph g;
  g.features.resize(static_cast<Eigen::Index>(recovered.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < recovered.size(); ++i) {
    if (recovered[i].values.size() != dim) throw InvalidArgument("node feature vectors have mixed lengths");
    for (std::size_t c = 0; c < dim; ++c) {
      const double v = recovered[i].values[c];
      if (!std::isfinite(v)) throw InvalidArgument("node features must be finite");
      g.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return g;
}

OccupancyPrediction OccupancyPrediction::from_scores(std::vector<double> scores, double threshold) {
  OccupancyPrediction p;
  p.decisions.reserve(scores.size());
  for (double s : scores) p.decisions.push_back(s >= threshold ? 1 : 0);
  p.scores = std::move(scores);
  return p;
}

void GlssConfig::validate() const {
  if (input_dim == 0 || hidden == 0 || gat1_out == 0 || gat2_out == 0 || heads == 0 || num_bands == 0) {
    throw InvalidArgument("GLSS dimensions must be positive");
  }
}

std::vector<ParamView> GlssModel::parameters() {
  std::vector<ParamView> out{view_of("dense1_w", dense1_w), view_of("dense1_b", dense1_b)};
  gat1.append_parameters("gat1", out);
  gat2.append_parameters("gat2", out);
  out.push_back(view_of("dense2_w", dense2_w));
  out.push_back(view_of("dense2_b", dense2_b));
  return out;
}

GlssModel make_glss(const GlssConfig& config, std::uint64_t seed) {
  config.validate();
  GlssModel m;
  m.config = config;
  m.dense1_w.resize(static_cast<Eigen::Index>(config.hidden), static_cast<Eigen::Index>(config.input_dim));
  fan_in_uniform(m.dense1_w, config.input_dim, derive_seed(seed, 1));
  m.dense1_b = Vector::Zero(static_cast<Eigen::Index>(config.hidden));
  m.gat1 = make_gat_layer(config.hidden, config.gat1_out, config.heads, config.combine, derive_seed(seed, 2));
  m.gat2 = make_gat_layer(m.gat1.output_dim(), config.gat2_out, config.heads, config.combine, derive_seed(seed, 3));
  m.dense2_w.resize(static_cast<Eigen::Index>(config.num_bands), static_cast<Eigen::Index>(m.gat2.output_dim()));
  fan_in_uniform(m.dense2_w, m.gat2.output_dim(), derive_seed(seed, 4));
  m.dense2_b = Vector::Zero(static_cast<Eigen::Index>(config.num_bands));
  return m;
}

GlssModel zeros_like(const GlssModel& model) {
  GlssModel g = model;
  zero_all(g.parameters());
  return g;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix dense_affine(const Matrix& x, const Matrix& w, const Vector& b) {
  Matrix pre = x * w.transpose();
  pre.rowwise() += b.transpose();
  return pre;
}

}  // namespace

OccupancyPrediction glss_forward(const SensingGraph& graph, const GlssModel& model) {
  if (graph.feature_dim() != model.config.input_dim) throw InvalidArgument("graph feature dim != GLSS input dim");
  if (graph.nodes() == 0) throw InvalidArgument("empty graph");
  const Matrix h0 = dense_affine(graph.features, model.dense1_w, model.dense1_b).cwiseMax(0.0);
  const Matrix h1 = gat_layer_forward(h0, model.gat1);
  const Matrix h2 = gat_layer_forward(h1, model.gat2);
  const Vector pooled = h2.colwise().mean().transpose();
  const Vector logits = model.dense2_w * pooled + model.dense2_b;
  std::vector<double> scores(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index k = 0; k < logits.size(); ++k) scores[static_cast<std::size_t>(k)] = sigmoid(logits(k));
  return OccupancyPrediction::from_scores(std::move(scores));
}

double glss_loss(const GlssModel& model, std::span<const LabeledGraph> data, std::span<const std::size_t> batch,
                 GlssModel* grads) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const auto bands = static_cast<Eigen::Index>(model.config.num_bands);
  const auto in_dim = static_cast<Eigen::Index>(model.config.input_dim);

  // Stack every node of the batch for the shared dense layer.
  std::vector<Eigen::Index> offsets{0};
  for (std::size_t idx : batch) {
    const LabeledGraph& s = data[idx];
    if (s.graph.features.cols() != in_dim) throw InvalidArgument("graph feature dim != GLSS input dim");
    if (s.label.size() != model.config.num_bands) throw InvalidArgument("label length != num_bands");
    offsets.push_back(offsets.back() + s.graph.features.rows());
  }
  Matrix x(offsets.back(), in_dim);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    x.middleRows(offsets[b], offsets[b + 1] - offsets[b]) = data[batch[b]].graph.features;
  }
  const Matrix pre0 = dense_affine(x, model.dense1_w, model.dense1_b);
  const Matrix h0 = pre0.cwiseMax(0.0);

  const auto nb = static_cast<Eigen::Index>(batch.size());
  std::vector<GatCache> cache1(batch.size()), cache2(batch.size());
  Matrix pooled(nb, static_cast<Eigen::Index>(model.gat2.output_dim()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Matrix h0_b = h0.middleRows(offsets[b], offsets[b + 1] - offsets[b]);
    const Matrix h1 = gat_forward_cached(h0_b, model.gat1, cache1[b]);
    const Matrix h2 = gat_forward_cached(h1, model.gat2, cache2[b]);
    pooled.row(static_cast<Eigen::Index>(b)) = h2.colwise().mean();
  }
  Matrix logits = pooled * model.dense2_w.transpose();
  logits.rowwise() += model.dense2_b.transpose();
  const Matrix scores = logits.unaryExpr([](double v) { return sigmoid(v); });
  Matrix labels(nb, bands);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (Eigen::Index k = 0; k < bands; ++k) labels(static_cast<Eigen::Index>(b), k) = data[batch[b]].label[static_cast<std::size_t>(k)];
  }
  const Matrix diff = scores - labels;
  const double denom = static_cast<double>(nb * bands);
  const double loss = diff.squaredNorm() / denom;
  if (grads == nullptr) return loss;

  zero_all(grads->parameters());
  const Matrix d_logits = ((2.0 / denom) * diff).cwiseProduct(scores.cwiseProduct((1.0 - scores.array()).matrix()));
  grads->dense2_w.noalias() = d_logits.transpose() * pooled;
  grads->dense2_b = d_logits.colwise().sum().transpose();
  const Matrix d_pooled = d_logits * model.dense2_w;

  Matrix d_h0(h0.rows(), h0.cols());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Eigen::Index nodes = offsets[b + 1] - offsets[b];
    const Matrix d_h2 = Matrix::Ones(nodes, 1) * (d_pooled.row(static_cast<Eigen::Index>(b)) / static_cast<double>(nodes));
    const Matrix d_h1 = gat_backward(d_h2, model.gat2, cache2[b], grads->gat2);
    d_h0.middleRows(offsets[b], nodes) = gat_backward(d_h1, model.gat1, cache1[b], grads->gat1);
  }
  const Matrix d_pre0 = (pre0.array() > 0.0).select(d_h0.array(), 0.0).matrix();
  grads->dense1_w.noalias() = d_pre0.transpose() * x;
  grads->dense1_b = d_pre0.colwise().sum().transpose();
  return loss;
}

double accuracy_metric(std::span<const OccupancyPrediction> predictions,
                       std::span<const std::vector<std::uint8_t>> truths) {
  if (predictions.size() != truths.size()) throw InvalidArgument("prediction/truth count mismatch");
  if (predictions.empty()) throw InvalidArgument("no predictions");
  std::size_t correct = 0, total = 0;
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    const auto& d = predictions[s].decisions;
    if (d.size() != truths[s].size()) throw InvalidArgument("decision/truth length mismatch");
    for (std::size_t k = 0; k < d.size(); ++k) {
      correct += d[k] == truths[s][k] ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

ClassifierTraining<GlssModel> train_glss(std::span<const LabeledGraph> train, std::span<const LabeledGraph> val,
                                         const TrainSchedule& schedule, const GlssConfig& config,
                                         const EpochLogger& logger) {
  return detail::fit_classifier(make_glss(config, derive_seed(schedule.seed, 0x6A7)), train, val, schedule,
                                glss_loss, glss_forward, logger, "GLSS");
}

}  // namespace satsense
