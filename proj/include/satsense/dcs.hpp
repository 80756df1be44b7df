#pragma once

// CNN baseline on concatenated observations. The K satellites' 2P x N
// matrices are stacked into one (K*2P) x N single-channel image:
//   conv 3x3 (16, ReLU) -> maxpool 2x2 -> conv 3x3 (32, ReLU) -> maxpool 2x2
//   -> dense 256 (ReLU) -> dense num_bands (sigmoid)
// Convolutions are unpadded with stride 1; pooling floors odd sizes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "satsense/glss.hpp"
#include "satsense/optim.hpp"

namespace satsense {

struct DcsConfig {
  std::size_t rows = 160;  // K * 2P
  std::size_t cols = 400;  // N
  std::size_t conv1_filters = 16;
  std::size_t conv2_filters = 32;
  std::size_t hidden = 256;
  std::size_t num_bands = 40;

  void validate() const;
  // Spatial sizes after each stage.
  std::size_t conv1_rows() const { return rows - 2; }
  std::size_t conv1_cols() const { return cols - 2; }
  std::size_t pool1_rows() const { return conv1_rows() / 2; }
  std::size_t pool1_cols() const { return conv1_cols() / 2; }
  std::size_t conv2_rows() const { return pool1_rows() - 2; }
  std::size_t conv2_cols() const { return pool1_cols() - 2; }
  std::size_t pool2_rows() const { return conv2_rows() / 2; }
  std::size_t pool2_cols() const { return conv2_cols() / 2; }
  std::size_t flat_dim() const { return conv2_filters * pool2_rows() * pool2_cols(); }
};

struct DcsModel {
  DcsConfig config;
  Matrix conv1_w;  // filters x 9
  Vector conv1_b;
  Matrix conv2_w;  // filters x (conv1_filters * 9)
  Vector conv2_b;
  Matrix fc1_w;    // hidden x flat_dim
  Vector fc1_b;
  Matrix fc2_w;    // num_bands x hidden
  Vector fc2_b;

  std::vector<ParamView> parameters();
};

DcsModel make_dcs(const DcsConfig& config, std::uint64_t seed);
DcsModel zeros_like(const DcsModel& model);

/// `input` is the row-major (K*2P) x N image, i.e. the K node feature rows concatenated.
OccupancyPrediction dcs_forward(std::span<const double> input, const DcsModel& model);
OccupancyPrediction dcs_forward(const SensingGraph& graph, const DcsModel& model);

double dcs_loss(const DcsModel& model, std::span<const LabeledGraph> data, std::span<const std::size_t> batch,
                DcsModel* grads);

ClassifierTraining<DcsModel> train_dcs(std::span<const LabeledGraph> train, std::span<const LabeledGraph> val,
                                       const TrainSchedule& schedule, const DcsConfig& config,
                                       const EpochLogger& logger = {});

}  // namespace satsense
