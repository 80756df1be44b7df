#pragma once

// Experiment configuration. Serialized as JSON; a file or command-line
// override may only touch keys that already exist in the schema.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "satsense/compressor.hpp"
#include "satsense/dcs.hpp"
#include "satsense/glss.hpp"
#include "satsense/sampler.hpp"
#include "satsense/scene.hpp"

namespace satsense {

struct ExperimentConfig {
  std::string profile = "default";
  std::uint64_t seed = 20240901;

  BandGrid grid;
  ChannelDrawConfig channel;
  std::size_t satellites = 10;  // K

  std::size_t cosets = 8;               // P
  std::size_t ratio = 16;               // L
  std::size_t samples_per_coset = 400;  // N
  SamplingMode sampling_mode = SamplingMode::subnyquist;

  std::vector<double> snr_grid_db{-10.0, -5.0, 0.0, 5.0, 10.0};
  std::vector<double> loss_grid{0.01, 0.02, 0.03};
  std::vector<std::size_t> num_signals{2, 3};
  // Training scenes draw their mean SNR uniformly from this range.
  double train_snr_min_db = -10.0;
  double train_snr_max_db = 10.0;
  // Loss rates the classifiers' training data is corrupted with.
  std::vector<double> classifier_train_loss{0.01, 0.02, 0.03};

  std::size_t train_scenes = 8000;
  std::size_t val_scenes = 1000;
  std::size_t test_scenes = 1000;

  CompressorOptions compressor;
  TrainSchedule compressor_schedule;

  std::size_t glss_hidden = 640;
  std::size_t glss_gat1_out = 256;
  std::size_t glss_gat2_out = 128;
  std::size_t glss_heads = 6;
  HeadCombine glss_combine = HeadCombine::concat;
  TrainSchedule glss_schedule;

  std::size_t dcs_conv1_filters = 16;
  std::size_t dcs_conv2_filters = 32;
  std::size_t dcs_hidden = 256;
  TrainSchedule dcs_schedule;

  // Model selection: any of {"cae", "ae"} and {"glss", "dcs"}. Classifiers
  // are trained on, and evaluated with, `classifier_compressor` recoveries.
  std::vector<std::string> compressors{"cae", "ae"};
  std::vector<std::string> classifiers{"glss", "dcs"};
  std::string classifier_compressor = "cae";

  std::size_t doppler_satellites = 10;
  std::size_t doppler_scenes = 20;
  std::size_t doppler_samples = 6400;

  std::string output_dir = "runs/default";

  static ExperimentConfig default_profile();
  static ExperimentConfig quick_profile();
  static ExperimentConfig for_profile(const std::string& name);

  void validate() const;

  CosetConfig coset_config() const;
  std::size_t observation_dim() const { return 2 * cosets * samples_per_coset; }
  CompressorDims compressor_dims() const;
  GlssConfig glss_config() const;
  DcsConfig dcs_config() const;
  bool uses_compressor(const std::string& name) const;
  bool uses_classifier(const std::string& name) const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Overlays `patch` onto `base`. Unknown keys and type errors raise ConfigError.
ExperimentConfig apply_patch(const ExperimentConfig& base, const nlohmann::json& patch);

/// "a.b.c=value". The value is parsed as JSON, falling back to a plain string.
ExperimentConfig apply_override(const ExperimentConfig& base, const std::string& assignment);

/// Reads a config file; its optional "profile" key selects the base profile.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace satsense
