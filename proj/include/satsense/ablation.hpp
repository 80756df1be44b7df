#pragma once

// One-axis sweeps around a base configuration, and the Doppler
// decorrelation analysis.

#include <string>
#include <string_view>
#include <vector>

#include "satsense/config.hpp"
#include "satsense/pipeline.hpp"
#include "satsense/results.hpp"

namespace satsense {

enum class AblationAxis { heads, embedding_dim, num_satellites, num_cosets, sampling_mode };

std::string_view to_string(AblationAxis a);
AblationAxis parse_ablation_axis(std::string_view name);

/// Sweep values as strings: heads {2,4,6,8}, embedding_dim {200,640},
/// num_satellites {3,5,7,10}, num_cosets {4,6,8}, sampling_mode {nyquist,subnyquist}.
std::vector<std::string> sweep_values(AblationAxis axis);

/// The base config with one axis set to `value`.
ExperimentConfig with_axis(const ExperimentConfig& base, AblationAxis axis, const std::string& value);

/// Trains and evaluates GLSS (on `classifier_compressor` recoveries) at every
/// sweep point. Rows are tagged with the point, e.g. "glss[heads=2]". The
/// embedding sweep also records a compression_factor row per point. The
/// compressor is trained once and shared by the heads and satellite sweeps,
/// whose points do not change its input.
ResultsTable ablate(const ExperimentConfig& cfg, AblationAxis axis, const TrainingHooks& hooks = {});

struct DopplerAnalysis {
  std::vector<double> doppler_hz;            // shifts of the first scene
  std::vector<std::vector<double>> matrix;   // its Pearson matrix
  std::vector<double> mean_abs_offdiag;      // per scene
  double overall_mean_abs_offdiag = 0.0;
};

/// Draws `doppler_scenes` scenes of `doppler_samples` Nyquist samples and
/// `doppler_satellites` shifts uniform in +-channel.doppler_max_hz each.
DopplerAnalysis analyze_doppler(const ExperimentConfig& cfg);
ResultsTable to_table(const DopplerAnalysis& a, std::uint64_t seed);

}  // namespace satsense
