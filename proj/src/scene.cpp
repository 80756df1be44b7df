#include "satsense/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "satsense/error.hpp"
#include "satsense/stats.hpp"

namespace satsense {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex draw_symbol(Modulation m, Rng& rng) {
  switch (m) {
    case Modulation::qpsk: {
      static const double s = 1.0 / std::numbers::sqrt2;
      const double re = rng.index(2) ? s : -s;
      const double im = rng.index(2) ? s : -s;
      return {re, im};
    }
    case Modulation::psk8: {
      const double phase = kTwoPi * static_cast<double>(rng.index(8)) / 8.0;
      return std::polar(1.0, phase);
    }
    case Modulation::qam16: {
      static constexpr std::array<double, 4> levels{-3.0, -1.0, 1.0, 3.0};
      static const double scale = 1.0 / std::sqrt(10.0);
      return {levels[rng.index(4)] * scale, levels[rng.index(4)] * scale};
    }
  }
  return {};
}

// Adds one RRC-shaped, upconverted carrier to `out`.
void add_carrier(ComplexSignal& out, Modulation mod, double samples_per_symbol, double offset_hz,
                 double sample_rate, Rng& rng) {
  const std::size_t n_out = out.size();
  const int span = kPulseSpanSymbols;
  const long first_symbol = -span;
  const long last_symbol = static_cast<long>(std::ceil(static_cast<double>(n_out) / samples_per_symbol)) + span;

  std::vector<Complex> symbols;
  symbols.reserve(static_cast<std::size_t>(last_symbol - first_symbol + 1));
  for (long k = first_symbol; k <= last_symbol; ++k) symbols.push_back(draw_symbol(mod, rng));
  const double phase0 = rng.uniform(0.0, kTwoPi);

  ComplexSignal shaped(n_out, Complex{});
  const double rounded_sps = std::round(samples_per_symbol);
  if (std::abs(samples_per_symbol - rounded_sps) < 1e-9) {
    const long sps = static_cast<long>(rounded_sps);
    const long half = span * sps;
    std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
    for (long m = -half; m <= half; ++m) {
      taps[static_cast<std::size_t>(m + half)] = rrc_pulse(static_cast<double>(m) / rounded_sps, kRolloff);
    }
    const double energy = std::inner_product(taps.begin(), taps.end(), taps.begin(), 0.0);
    const double norm = std::sqrt(rounded_sps / energy);
    for (double& t : taps) t *= norm;

    for (long k = first_symbol; k <= last_symbol; ++k) {
      const Complex a = symbols[static_cast<std::size_t>(k - first_symbol)];
      const long centre = k * sps;
      const long lo = std::max<long>(0, centre - half);
      const long hi = std::min<long>(static_cast<long>(n_out) - 1, centre + half);
      for (long n = lo; n <= hi; ++n) shaped[static_cast<std::size_t>(n)] += a * taps[static_cast<std::size_t>(n - centre + half)];
    }
  } else {
    for (std::size_t n = 0; n < n_out; ++n) {
      const double t = static_cast<double>(n) / samples_per_symbol;
      const long k_lo = std::max<long>(first_symbol, static_cast<long>(std::ceil(t)) - span);
      const long k_hi = std::min<long>(last_symbol, static_cast<long>(std::floor(t)) + span);
      Complex acc{};
      for (long k = k_lo; k <= k_hi; ++k) {
        acc += symbols[static_cast<std::size_t>(k - first_symbol)] * rrc_pulse(t - static_cast<double>(k), kRolloff);
      }
      shaped[n] = acc;
    }
  }

  const double step = offset_hz / sample_rate;
  for (std::size_t n = 0; n < n_out; ++n) {
    const double cycles = std::fmod(step * static_cast<double>(n), 1.0);
    out[n] += shaped[n] * std::polar(1.0, kTwoPi * cycles + phase0);
  }
}

}  // namespace

void BandGrid::validate() const {
  if (!(band_width > 0.0)) throw InvalidArgument("band_width must be positive");
  if (!(f_hi > f_lo)) throw InvalidArgument("f_hi must exceed f_lo");
  if (num_bands == 0) throw InvalidArgument("num_bands must be positive");
  const double implied = (f_hi - f_lo) / band_width;
  if (std::abs(implied - static_cast<double>(num_bands)) > 1e-6) {
    throw InvalidArgument("num_bands must equal (f_hi - f_lo) / band_width");
  }
}

double BandGrid::band_offset(std::size_t band) const {
  if (band >= num_bands) throw InvalidArgument("band index out of range");
  return (static_cast<double>(band) + 0.5) * band_width;
}

double BandGrid::band_center(std::size_t band) const { return f_lo + band_offset(band); }

std::string_view to_string(Modulation m) {
  switch (m) {
    case Modulation::qpsk: return "QPSK";
    case Modulation::psk8: return "8PSK";
    case Modulation::qam16: return "16QAM";
  }
  return "?";
}

Modulation parse_modulation(std::string_view name) {
  if (name == "QPSK") return Modulation::qpsk;
  if (name == "8PSK") return Modulation::psk8;
  if (name == "16QAM") return Modulation::qam16;
  throw InvalidArgument("unknown modulation: " + std::string(name));
}

std::size_t OccupancyTruth::num_signals() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

void OccupancyTruth::validate() const {
  if (bits.size() != modulation.size()) throw InvalidArgument("occupancy bits/modulation length mismatch");
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] > 1) throw InvalidArgument("occupancy bits must be 0 or 1");
    if ((bits[k] == 1) != modulation[k].has_value()) {
      throw InvalidArgument("modulation must be defined exactly for occupied bands");
    }
  }
}

bool ChannelRealization::noise_enabled() const { return std::isfinite(snr_db); }

void ChannelRealization::validate() const {
  if (!(std::abs(doppler_hz) <= kMaxDopplerHz)) throw InvalidArgument("doppler outside [-480 kHz, 480 kHz]");
  if (!(path_loss_db >= 0.0)) throw InvalidArgument("path loss must be >= 0 dB");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw InvalidArgument("snr must be finite or +inf");
  }
}

OccupancyTruth generate_occupancy(const BandGrid& grid, std::size_t num_signals, Rng& rng) {
  grid.validate();
  if (num_signals < 1 || num_signals > grid.num_bands) {
    throw InvalidArgument("num_signals must lie in [1, num_bands]");
  }
  std::vector<std::size_t> order(grid.num_bands);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first num_signals entries are a uniform subset.
  for (std::size_t i = 0; i < num_signals; ++i) {
    const std::size_t j = i + rng.index(grid.num_bands - i);
    std::swap(order[i], order[j]);
  }
  OccupancyTruth truth;
  truth.bits.assign(grid.num_bands, 0);
  truth.modulation.assign(grid.num_bands, std::nullopt);
  for (std::size_t i = 0; i < num_signals; ++i) {
    truth.bits[order[i]] = 1;
    truth.modulation[order[i]] = static_cast<Modulation>(rng.index(3));
  }
  return truth;
}

double rrc_pulse(double t, double rolloff) {
  const double b = rolloff;
  const double pi = std::numbers::pi;
  if (std::abs(t) < 1e-12) return 1.0 - b + 4.0 * b / pi;
  if (b > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-9) {
    return (b / std::numbers::sqrt2) *
           ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * b)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * b)));
  }
  const double num = std::sin(pi * t * (1.0 - b)) + 4.0 * b * t * std::cos(pi * t * (1.0 + b));
  const double den = pi * t * (1.0 - (4.0 * b * t) * (4.0 * b * t));
  return num / den;
}

WidebandScene synthesize_baseband(const OccupancyTruth& truth, const BandGrid& grid,
                                  std::size_t duration_samples, Rng& rng) {
  grid.validate();
  truth.validate();
  if (truth.bits.size() != grid.num_bands) throw InvalidArgument("occupancy length != num_bands");
  if (duration_samples == 0) throw InvalidArgument("duration must be positive");

  WidebandScene scene;
  scene.truth = truth;
  scene.sample_rate = grid.nyquist_rate();
  scene.seed = rng.seed();
  scene.baseband.assign(duration_samples, Complex{});

  const double symbol_rate = grid.band_width / (1.0 + kRolloff);
  const double sps = scene.sample_rate / symbol_rate;
  for (std::size_t k = 0; k < grid.num_bands; ++k) {
    if (!truth.bits[k]) continue;
    add_carrier(scene.baseband, *truth.modulation[k], sps, grid.band_offset(k), scene.sample_rate, rng);
  }
  return scene;
}

ComplexSignal frequency_shift(std::span<const Complex> x, double shift_hz, double sample_rate) {
  ComplexSignal out(x.size());
  const double step = shift_hz / sample_rate;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double cycles = std::fmod(step * static_cast<double>(n), 1.0);
    out[n] = x[n] * std::polar(1.0, kTwoPi * cycles);
  }
  return out;
}

double mean_power(std::span<const Complex> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const Complex& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

ReceivedSignal apply_satellite_channel(const WidebandScene& scene, const ChannelRealization& ch) {
  ch.validate();
  ReceivedSignal rx;
  rx.sample_rate = scene.sample_rate;
  rx.channel = ch;
  rx.truth = scene.truth;

  const double gain = std::pow(10.0, -ch.path_loss_db / 20.0);
  if (ch.doppler_hz == 0.0) {
    rx.samples = scene.baseband;
  } else {
    rx.samples = frequency_shift(scene.baseband, ch.doppler_hz, scene.sample_rate);
  }
  if (gain != 1.0) {
    for (Complex& v : rx.samples) v *= gain;
  }
  if (!ch.noise_enabled()) return rx;

  // A silent scene has no signal power to reference; noise is then sized
  // against unit power so the observation is still well defined.
  double signal_power = mean_power(rx.samples);
  if (signal_power == 0.0) signal_power = 1.0;
  const double noise_power = signal_power / std::pow(10.0, ch.snr_db / 10.0);
  const double sigma = std::sqrt(noise_power / 2.0);
  Rng noise_rng(ch.seed);
  for (Complex& v : rx.samples) v += Complex(sigma * noise_rng.normal(), sigma * noise_rng.normal());
  return rx;
}

ChannelRealization draw_channel(double mean_snr_db, const ChannelDrawConfig& cfg, Rng& rng) {
  ChannelRealization ch;
  ch.doppler_hz = rng.uniform(-cfg.doppler_max_hz, cfg.doppler_max_hz);
  ch.path_loss_db = cfg.path_loss_db;
  ch.snr_db = cfg.snr_spread_db > 0.0 ? rng.uniform(mean_snr_db - cfg.snr_spread_db, mean_snr_db + cfg.snr_spread_db)
                                      : mean_snr_db;
  ch.seed = rng.next_seed();
  return ch;
}

std::vector<std::vector<double>> doppler_pearson_matrix(const WidebandScene& scene,
                                                        std::span<const double> doppler_hz) {
  if (doppler_hz.empty()) throw InvalidArgument("doppler list must be non-empty");
  std::vector<std::vector<double>> streams;
  streams.reserve(doppler_hz.size());
  for (double d : doppler_hz) {
    const ComplexSignal shifted = frequency_shift(scene.baseband, d, scene.sample_rate);
    std::vector<double> re(shifted.size());
    std::transform(shifted.begin(), shifted.end(), re.begin(), [](const Complex& c) { return c.real(); });
    streams.push_back(std::move(re));
  }
  const std::size_t n = streams.size();
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (stddev(streams[i]) == 0.0) throw UndefinedCorrelation("zero-variance sample stream");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = pearson(streams[i], streams[j]);
      matrix[i][j] = r;
      matrix[j][i] = r;
    }
  }
  return matrix;
}

}  // namespace satsense
