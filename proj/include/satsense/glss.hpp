#pragma once

// Ground-station fusion classifier: per-node dense layer, two graph attention
// layers, mean pooling over satellites and a sigmoid output per band.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "satsense/compressor.hpp"
#include "satsense/gat.hpp"
#include "satsense/optim.hpp"

namespace satsense {

/// Fully connected graph over K satellites; row i holds satellite i's
/// recovered observation. Every node attends to every node, itself included.
struct SensingGraph {
  Matrix features;  // K x 2PN

  std::size_t nodes() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }
};

SensingGraph build_graph(std::span<const RecoveredObservation> recovered);

struct OccupancyPrediction {
  std::vector<double> scores;
  std::vector<std::uint8_t> decisions;

  static OccupancyPrediction from_scores(std::vector<double> scores, double threshold = 0.5);
};

struct LabeledGraph {
  SensingGraph graph;
  std::vector<std::uint8_t> label;
};

struct GlssConfig {
  std::size_t input_dim = 6400;
  std::size_t hidden = 640;
  std::size_t gat1_out = 256;
  std::size_t gat2_out = 128;
  std::size_t heads = 6;
  std::size_t num_bands = 40;
  HeadCombine combine = HeadCombine::concat;

  void validate() const;
};

struct GlssModel {
  GlssConfig config;
  Matrix dense1_w;  // hidden x input
  Vector dense1_b;
  GatLayerParams gat1;
  GatLayerParams gat2;
  Matrix dense2_w;  // num_bands x gat2 output
  Vector dense2_b;

  std::vector<ParamView> parameters();
};

GlssModel make_glss(const GlssConfig& config, std::uint64_t seed);
GlssModel zeros_like(const GlssModel& model);

OccupancyPrediction glss_forward(const SensingGraph& graph, const GlssModel& model);

/// Mean over (batch, band) of (score - label)^2 for the selected samples;
/// writes gradients of that mean into `grads` when non-null.
double glss_loss(const GlssModel& model, std::span<const LabeledGraph> data, std::span<const std::size_t> batch,
                 GlssModel* grads);

/// Fraction of (sample, band) pairs where the decision equals the truth bit.
double accuracy_metric(std::span<const OccupancyPrediction> predictions,
                       std::span<const std::vector<std::uint8_t>> truths);

template <typename Model>
struct ClassifierTraining {
  Model model;
  std::vector<double> history;       // mean training loss per epoch
  std::vector<double> val_accuracy;  // per epoch, empty without a validation set
};

/// Called after each epoch with (epoch, learning rate, train loss, val accuracy or NaN).
using EpochLogger = std::function<void(std::size_t, double, double, double)>;

ClassifierTraining<GlssModel> train_glss(std::span<const LabeledGraph> train, std::span<const LabeledGraph> val,
                                         const TrainSchedule& schedule, const GlssConfig& config,
                                         const EpochLogger& logger = {});

}  // namespace satsense
