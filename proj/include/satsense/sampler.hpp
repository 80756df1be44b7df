#pragma once

// Multi-coset sub-Nyquist acquisition and per-observation z-scoring.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "satsense/scene.hpp"

namespace satsense {

struct CosetConfig {
  std::size_t cosets = 8;              // P
  std::size_t ratio = 16;              // L
  std::size_t samples_per_coset = 400; // N
  std::vector<std::size_t> offsets;    // c_j, distinct, each < L

  void validate() const;
  std::size_t rows() const { return 2 * cosets; }
  std::size_t flat_size() const { return 2 * cosets * samples_per_coset; }
  // Nyquist samples consumed by one acquisition.
  std::size_t required_length() const;
  double rate_fraction() const { return static_cast<double>(cosets) / static_cast<double>(ratio); }

  /// Distinct offsets drawn once from `seed` and stored sorted.
  static CosetConfig with_random_offsets(std::size_t cosets, std::size_t ratio,
                                         std::size_t samples_per_coset, std::uint64_t seed);
};

enum class SamplingMode { subnyquist, nyquist };

std::string_view to_string(SamplingMode m);
SamplingMode parse_sampling_mode(std::string_view name);

/// One satellite's 2P x N real sample matrix, row-major. Rows [0, P) hold the
/// real parts of each coset, rows [P, 2P) the imaginary parts.
struct SatObservation {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  CosetConfig config;
  SamplingMode mode = SamplingMode::subnyquist;
  bool normalized = false;
  double mean = 0.0;
  double stddev = 1.0;
  ChannelRealization channel;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> flat() const { return values; }
};

/// Row j takes x[n L + c_j], n = 0..N-1. Pure index selection.
SatObservation multicoset_sample(const ReceivedSignal& rx, const CosetConfig& cfg);

/// Full-rate counterpart with the same 2P x N shape: P * N consecutive Nyquist
/// samples, row j holding x[j N + n].
SatObservation nyquist_sample(const ReceivedSignal& rx, const CosetConfig& cfg);

SatObservation acquire(const ReceivedSignal& rx, const CosetConfig& cfg, SamplingMode mode);

/// Joint z-score over all 2PN entries; keeps (mean, std) in the observation.
SatObservation normalize(SatObservation obs);

}  // namespace satsense
