#pragma once

// End-to-end workflow: training of the compressors and classifiers, and the
// evaluation pass over the test split (channel -> sampling -> normalization
// -> encode -> packet channel -> decode -> graph -> classifier -> metrics).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satsense/compressor.hpp"
#include "satsense/config.hpp"
#include "satsense/dataset.hpp"
#include "satsense/dcs.hpp"
#include "satsense/glss.hpp"
#include "satsense/results.hpp"

namespace satsense {

struct RecoveryMetrics {
  double mse = 0.0;
  double pearson = 0.0;
};

/// MSE and Pearson correlation of the flattened pair. Propagates
/// UndefinedCorrelation for constant inputs.
RecoveryMetrics recovery_metrics(std::span<const double> x, std::span<const double> x_hat);

using LogFn = std::function<void(const std::string&)>;

struct TrainingHooks {
  LogFn log;
  // Returns the per-epoch callback for a classifier ("glss", "dcs", possibly tagged).
  std::function<EpochLogger(const std::string& model)> epoch_logger;
};

struct TrainedModels {
  std::optional<Autoencoder> cae;
  std::optional<Autoencoder> ae;
  std::optional<GlssModel> glss;
  std::optional<DcsModel> dcs;
  std::map<std::string, std::vector<double>> history;  // training loss per epoch, by model

  const Autoencoder& compressor(const std::string& name) const;
};

/// Training-split observations, one column per (scene, satellite).
Matrix observation_columns(std::span<const SceneSample> samples);

CompressorTraining train_compressor_model(const ExperimentConfig& cfg, CompressorKind kind,
                                          std::span<const SceneSample> train, const TrainingHooks& hooks = {});

/// Graphs of recovered observations: each scene's embeddings cross the packet
/// channel at a loss rate drawn from cfg.classifier_train_loss.
std::vector<LabeledGraph> recovered_graphs(const ExperimentConfig& cfg, const Autoencoder& compressor,
                                           std::span<const SceneSample> samples);

ClassifierTraining<GlssModel> train_glss_model(const ExperimentConfig& cfg, std::span<const LabeledGraph> train,
                                               std::span<const LabeledGraph> val, const TrainingHooks& hooks = {},
                                               const std::string& name = "glss");
ClassifierTraining<DcsModel> train_dcs_model(const ExperimentConfig& cfg, std::span<const LabeledGraph> train,
                                             std::span<const LabeledGraph> val, const TrainingHooks& hooks = {},
                                             const std::string& name = "dcs");

/// Trains every model selected in the config. The classifiers see data
/// recovered by `cfg.classifier_compressor`.
TrainedModels train_models(const ExperimentConfig& cfg, const TrainingHooks& hooks = {});

/// Checkpoints live in <dir>/<model>/.
void save_models(const std::filesystem::path& dir, const ExperimentConfig& cfg, const TrainedModels& models);
/// Loads the models the config selects; a missing checkpoint is a ConfigError.
TrainedModels load_models(const std::filesystem::path& dir, const ExperimentConfig& cfg);

/// Seed of the packet drops for one satellite in one test condition. It does
/// not depend on the model, so every compressor sees the same drop pattern.
std::uint64_t test_drop_seed(std::uint64_t scene_seed, std::size_t snr_index, std::size_t loss_index,
                             std::size_t satellite);

struct DropRecord {
  std::uint64_t scene_seed = 0;
  std::size_t snr_index = 0;
  std::size_t loss_index = 0;
  std::size_t satellite = 0;
  std::string model;
  std::vector<std::uint8_t> loss_mask;  // empty when nothing was lost
};

struct PipelineOptions {
  std::function<void(const DropRecord&)> on_drop;
  LogFn log;
  // Renames models in the emitted rows, e.g. "glss" -> "glss[heads=2]".
  std::string tag;
};

/// Evaluates every (test scene, SNR, loss rate) condition and aggregates the
/// metrics per (model, SNR, loss rate, num_signals) plus an "all" row.
ResultsTable run_pipeline(const ExperimentConfig& cfg, const TrainedModels& models,
                          const PipelineOptions& options = {});

}  // namespace satsense
