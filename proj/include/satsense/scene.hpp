#pragma once

// Wideband RF scene synthesis and per-satellite channel impairments.
//
// The sensed span [f_lo, f_hi) is represented as complex baseband sampled at
// the Nyquist rate f_hi - f_lo, with f_lo mapped to digital frequency 0. Band k
// therefore sits at baseband offset (k + 0.5) * band_width.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "satsense/rng.hpp"

namespace satsense {

using Complex = std::complex<double>;
using ComplexSignal = std::vector<Complex>;

struct BandGrid {
  double f_lo = 13.025e9;
  double f_hi = 13.825e9;
  double band_width = 20e6;
  std::size_t num_bands = 40;

  void validate() const;
  double nyquist_rate() const { return f_hi - f_lo; }
  double band_center(std::size_t band) const;
  double band_offset(std::size_t band) const;
};

enum class Modulation { qpsk, psk8, qam16 };

std::string_view to_string(Modulation m);
Modulation parse_modulation(std::string_view name);

struct OccupancyTruth {
  std::vector<std::uint8_t> bits;
  std::vector<std::optional<Modulation>> modulation;

  std::size_t num_signals() const;
  void validate() const;
};

struct WidebandScene {
  OccupancyTruth truth;
  ComplexSignal baseband;
  double sample_rate = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr double kMaxDopplerHz = 480e3;

struct ChannelRealization {
  double doppler_hz = 0.0;
  double path_loss_db = 0.0;
  // +inf disables noise entirely.
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  bool noise_enabled() const;
  void validate() const;
};

struct ReceivedSignal {
  ComplexSignal samples;
  double sample_rate = 0.0;
  ChannelRealization channel;
  OccupancyTruth truth;
};

/// Per-satellite channel draw around a scene-level mean SNR.
struct ChannelDrawConfig {
  double snr_spread_db = 3.0;
  double doppler_max_hz = kMaxDopplerHz;
  double path_loss_db = 0.0;
};

// Pulse shaping used for every carrier.
inline constexpr double kRolloff = 0.25;
inline constexpr int kPulseSpanSymbols = 12;

/// Picks `num_signals` distinct bands uniformly without replacement and a
/// uniformly random modulation for each.
OccupancyTruth generate_occupancy(const BandGrid& grid, std::size_t num_signals, Rng& rng);

/// Root-raised-cosine impulse response at time `t` measured in symbol periods.
double rrc_pulse(double t, double rolloff);

/// Sum of one RRC-shaped carrier per occupied band, each centred on its band
/// with unit average power, sampled at the Nyquist rate of the grid.
WidebandScene synthesize_baseband(const OccupancyTruth& truth, const BandGrid& grid,
                                  std::size_t duration_samples, Rng& rng);

/// Multiplies by exp(j 2 pi f n / fs). Phase is evaluated per sample, not accumulated.
ComplexSignal frequency_shift(std::span<const Complex> x, double shift_hz, double sample_rate);

double mean_power(std::span<const Complex> x);

/// scale(path_loss) * doppler-shifted scene + AWGN sized so that the realised
/// per-sample SNR equals the requested one.
ReceivedSignal apply_satellite_channel(const WidebandScene& scene, const ChannelRealization& ch);

ChannelRealization draw_channel(double mean_snr_db, const ChannelDrawConfig& cfg, Rng& rng);

/// Pearson coefficients between the real parts of the scene shifted by each
/// pair of Doppler offsets. Symmetric with unit diagonal.
std::vector<std::vector<double>> doppler_pearson_matrix(const WidebandScene& scene,
                                                        std::span<const double> doppler_hz);

}  // namespace satsense
