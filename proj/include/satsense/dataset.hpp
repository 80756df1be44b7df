#pragma once

// Seeded scene datasets. Every scene, channel draw and observation is a pure
// function of (config, split, index), so splits can be regenerated anywhere.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "satsense/config.hpp"
#include "satsense/sampler.hpp"
#include "satsense/scene.hpp"

namespace satsense {

enum class Split { train, val, test };

std::string_view to_string(Split s);

std::uint64_t scene_seed(const ExperimentConfig& cfg, Split split, std::size_t index);
std::size_t split_size(const ExperimentConfig& cfg, Split split);

/// Throws ConfigError if any scene seed appears in more than one split.
void check_split_hygiene(const ExperimentConfig& cfg);

/// Occupancy (num_signals drawn from the config list) and Nyquist-rate baseband.
WidebandScene make_scene(const ExperimentConfig& cfg, std::uint64_t seed);

/// Mean SNR of a training or validation scene.
double training_snr_db(const ExperimentConfig& cfg, std::uint64_t seed);

/// Per-satellite channels around `mean_snr_db`. Doppler and the SNR offset of
/// satellite k depend only on (seed, k), so sweeping the mean SNR or the
/// satellite count keeps every other draw fixed.
std::vector<ChannelRealization> satellite_channels(const ExperimentConfig& cfg, std::uint64_t seed,
                                                   double mean_snr_db, std::size_t count);

/// Channel, acquisition (config sampling mode) and normalization per satellite.
std::vector<SatObservation> observe_scene(const ExperimentConfig& cfg, const WidebandScene& scene,
                                          std::span<const ChannelRealization> channels);

struct SceneSample {
  std::uint64_t seed = 0;
  double mean_snr_db = 0.0;
  OccupancyTruth truth;
  std::vector<SatObservation> observations;  // one per satellite
};

SceneSample build_scene_sample(const ExperimentConfig& cfg, std::uint64_t seed, double mean_snr_db);

/// Train/val scenes use their drawn training SNR; test scenes use `test_snr_db`.
std::vector<SceneSample> build_split(const ExperimentConfig& cfg, Split split, double test_snr_db = 0.0);

/// observations.f32 holds [scenes, K, 2P, N]; dataset.json holds grid,
/// sampling, seeds, channel draws, normalization stats and truth bits.
void write_dataset(const std::filesystem::path& dir, const ExperimentConfig& cfg, Split split,
                   std::span<const SceneSample> samples);

}  // namespace satsense
