#include "satsense/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "satsense/error.hpp"
#include "satsense/stats.hpp"

namespace satsense {

void CosetConfig::validate() const {
  if (cosets == 0) throw InvalidArgument("coset count must be positive");
  if (cosets >= ratio) throw InvalidArgument("coset count must be smaller than L");
  if (samples_per_coset == 0) throw InvalidArgument("samples per coset must be >= 1");
  if (offsets.size() != cosets) throw InvalidArgument("need exactly one offset per coset");
  std::vector<std::size_t> sorted = offsets;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("coset offsets must be distinct");
  }
  if (sorted.back() >= ratio) throw InvalidArgument("coset offsets must be < L");
}

std::size_t CosetConfig::required_length() const {
  const std::size_t max_offset = offsets.empty() ? 0 : *std::max_element(offsets.begin(), offsets.end());
  return (samples_per_coset - 1) * ratio + max_offset + 1;
}

CosetConfig CosetConfig::with_random_offsets(std::size_t cosets, std::size_t ratio,
                                             std::size_t samples_per_coset, std::uint64_t seed) {
  if (cosets == 0 || cosets >= ratio) throw InvalidArgument("need 0 < P < L");
  Rng rng(seed);
  std::vector<std::size_t> pool(ratio);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < cosets; ++i) std::swap(pool[i], pool[i + rng.index(ratio - i)]);
  CosetConfig cfg;
  cfg.cosets = cosets;
  cfg.ratio = ratio;
  cfg.samples_per_coset = samples_per_coset;
  cfg.offsets.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cosets));
  std::sort(cfg.offsets.begin(), cfg.offsets.end());
  return cfg;
}

std::string_view to_string(SamplingMode m) {
  return m == SamplingMode::nyquist ? "nyquist" : "subnyquist";
}

SamplingMode parse_sampling_mode(std::string_view name) {
  if (name == "nyquist") return SamplingMode::nyquist;
  if (name == "subnyquist") return SamplingMode::subnyquist;
  throw InvalidArgument("unknown sampling mode: " + std::string(name));
}

namespace {

SatObservation empty_observation(const ReceivedSignal& rx, const CosetConfig& cfg, SamplingMode mode) {
  SatObservation obs;
  obs.rows = cfg.rows();
  obs.cols = cfg.samples_per_coset;
  obs.values.assign(obs.rows * obs.cols, 0.0);
  obs.config = cfg;
  obs.mode = mode;
  obs.channel = rx.channel;
  return obs;
}

}  // namespace

SatObservation multicoset_sample(const ReceivedSignal& rx, const CosetConfig& cfg) {
  cfg.validate();
  if (rx.samples.size() < cfg.required_length()) {
    throw InvalidArgument("received signal shorter than (N-1)L + max(c) + 1 samples");
  }
  SatObservation obs = empty_observation(rx, cfg, SamplingMode::subnyquist);
  const std::size_t P = cfg.cosets;
  const std::size_t N = cfg.samples_per_coset;
  for (std::size_t j = 0; j < P; ++j) {
    double* re = &obs.values[j * N];
    double* im = &obs.values[(j + P) * N];
    for (std::size_t n = 0; n < N; ++n) {
      const Complex& s = rx.samples[n * cfg.ratio + cfg.offsets[j]];
      re[n] = s.real();
      im[n] = s.imag();
    }
  }
  return obs;
}

SatObservation nyquist_sample(const ReceivedSignal& rx, const CosetConfig& cfg) {
  cfg.validate();
  const std::size_t P = cfg.cosets;
  const std::size_t N = cfg.samples_per_coset;
  if (rx.samples.size() < P * N) throw InvalidArgument("received signal shorter than P*N samples");
  SatObservation obs = empty_observation(rx, cfg, SamplingMode::nyquist);
  for (std::size_t j = 0; j < P; ++j) {
    for (std::size_t n = 0; n < N; ++n) {
      const Complex& s = rx.samples[j * N + n];
      obs.values[j * N + n] = s.real();
      obs.values[(j + P) * N + n] = s.imag();
    }
  }
  return obs;
}

SatObservation acquire(const ReceivedSignal& rx, const CosetConfig& cfg, SamplingMode mode) {
  return mode == SamplingMode::nyquist ? nyquist_sample(rx, cfg) : multicoset_sample(rx, cfg);
}

SatObservation normalize(SatObservation obs) {
  if (obs.normalized) throw InvalidArgument("observation is already normalized");
  if (obs.values.empty()) throw DegenerateInput("empty observation");
  const double mu = mean(obs.values);
  const double sigma = stddev(obs.values);
  if (!(sigma > 0.0)) throw DegenerateInput("zero-variance observation cannot be normalized");
  for (double& v : obs.values) v = (v - mu) / sigma;
  obs.normalized = true;
  obs.mean = mu;
  obs.stddev = sigma;
  return obs;
}

}  // namespace satsense
