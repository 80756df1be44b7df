#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "satsense/error.hpp"
#include "satsense/rng.hpp"
#include "satsense/sampler.hpp"

using namespace satsense;

namespace {

ReceivedSignal random_signal(std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  ReceivedSignal rx;
  rx.samples.resize(length);
  for (Complex& s : rx.samples) s = Complex(rng.normal(), rng.normal());
  rx.sample_rate = 800e6;
  return rx;
}

CosetConfig fixed_config(std::size_t P, std::size_t L, std::size_t N, std::vector<std::size_t> offsets) {
  CosetConfig c;
  c.cosets = P;
  c.ratio = L;
  c.samples_per_coset = N;
  c.offsets = std::move(offsets);
  return c;
}

// Brute-force loop over (j, n) picking x[n L + c_j].
std::vector<double> index_oracle(const ReceivedSignal& rx, const CosetConfig& c) {
  const std::size_t P = c.cosets, N = c.samples_per_coset;
  std::vector<double> out(2 * P * N);
  for (std::size_t j = 0; j < P; ++j) {
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t idx = n * c.ratio + c.offsets[j];
      out[j * N + n] = rx.samples[idx].real();
      out[(P + j) * N + n] = rx.samples[idx].imag();
    }
  }
  return out;
}

}  // namespace

TEST_CASE("multicoset_sample equals the index oracle bit for bit") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const CosetConfig c = CosetConfig::with_random_offsets(8, 16, 400, derive_seed(77, s));
    const ReceivedSignal rx = random_signal(c.required_length(), derive_seed(78, s));
    const SatObservation obs = multicoset_sample(rx, c);
    REQUIRE(obs.values.size() == 6400);
    CHECK(obs.values == index_oracle(rx, c));
  }
}

TEST_CASE("default shape is 16 x 400, flattened 6400") {
  const CosetConfig c = CosetConfig::with_random_offsets(8, 16, 400, 5);
  CHECK(c.rows() == 16);
  CHECK(c.flat_size() == 6400);
  const SatObservation obs = multicoset_sample(random_signal(c.required_length(), 1), c);
  CHECK(obs.rows == 16);
  CHECK(obs.cols == 400);
  CHECK(obs.values.size() == 6400);
  CHECK_FALSE(obs.normalized);
  CHECK(c.rate_fraction() == doctest::Approx(0.5));
  // 8 channels at 800 MHz / 16 = 50 MSPS each.
  CHECK(800e6 / static_cast<double>(c.ratio) == doctest::Approx(50e6));
}

TEST_CASE("zero input gives zero samples") {
  const CosetConfig c = fixed_config(4, 16, 100, {0, 3, 9, 15});
  ReceivedSignal rx;
  rx.samples.assign(c.required_length(), Complex(0.0, 0.0));
  const SatObservation obs = multicoset_sample(rx, c);
  for (double v : obs.values) CHECK(v == 0.0);
}

TEST_CASE("sampling is linear") {
  const CosetConfig c = fixed_config(4, 16, 100, {1, 2, 7, 11});
  const ReceivedSignal x = random_signal(c.required_length(), 10);
  const ReceivedSignal y = random_signal(c.required_length(), 11);
  const double a = 0.7, b = -2.3;
  ReceivedSignal mix;
  mix.samples.resize(x.samples.size());
  for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] = a * x.samples[i] + b * y.samples[i];
  const auto sx = multicoset_sample(x, c).values;
  const auto sy = multicoset_sample(y, c).values;
  const auto sm = multicoset_sample(mix, c).values;
  for (std::size_t i = 0; i < sm.size(); ++i) CHECK(sm[i] == doctest::Approx(a * sx[i] + b * sy[i]).epsilon(1e-12));
}

TEST_CASE("required length is (N-1)L + max(c) + 1 and shorter input is rejected") {
  const CosetConfig c = fixed_config(3, 16, 10, {0, 5, 12});
  CHECK(c.required_length() == 9 * 16 + 12 + 1);
  CHECK_NOTHROW(multicoset_sample(random_signal(c.required_length(), 2), c));
  CHECK_THROWS_AS(multicoset_sample(random_signal(c.required_length() - 1, 2), c), InvalidArgument);
}

TEST_CASE("coset config validation") {
  CHECK_THROWS_AS(fixed_config(2, 16, 10, {3, 3}).validate(), InvalidArgument);
  CHECK_THROWS_AS(fixed_config(2, 16, 10, {3, 16}).validate(), InvalidArgument);
  CHECK_THROWS_AS(fixed_config(16, 16, 10, std::vector<std::size_t>(16, 0)).validate(), InvalidArgument);
  CHECK_THROWS_AS(fixed_config(2, 16, 0, {0, 1}).validate(), InvalidArgument);
  CHECK_THROWS_AS(fixed_config(3, 16, 10, {0, 1}).validate(), InvalidArgument);
  CHECK_THROWS_AS(CosetConfig::with_random_offsets(16, 16, 10, 1), InvalidArgument);

  const CosetConfig r = CosetConfig::with_random_offsets(8, 16, 400, 42);
  CHECK_NOTHROW(r.validate());
  CHECK(std::is_sorted(r.offsets.begin(), r.offsets.end()));
  CHECK(r.offsets == CosetConfig::with_random_offsets(8, 16, 400, 42).offsets);
}

TEST_CASE("nyquist mode takes P*N consecutive samples in the same shape") {
  const CosetConfig c = fixed_config(4, 16, 25, {0, 4, 8, 12});
  const ReceivedSignal rx = random_signal(c.required_length(), 3);
  const SatObservation obs = nyquist_sample(rx, c);
  CHECK(obs.mode == SamplingMode::nyquist);
  REQUIRE(obs.values.size() == 200);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t n = 0; n < 25; ++n) {
      CHECK(obs.at(j, n) == rx.samples[j * 25 + n].real());
      CHECK(obs.at(j + 4, n) == rx.samples[j * 25 + n].imag());
    }
  }
  CHECK(acquire(rx, c, SamplingMode::subnyquist).values == multicoset_sample(rx, c).values);
  CHECK(acquire(rx, c, SamplingMode::nyquist).values == obs.values);
  CHECK(parse_sampling_mode(to_string(SamplingMode::nyquist)) == SamplingMode::nyquist);
  CHECK_THROWS_AS(parse_sampling_mode("compressive"), InvalidArgument);
}

TEST_CASE("normalize is the element-wise z-score") {
  const CosetConfig c = fixed_config(4, 16, 100, {0, 1, 2, 3});
  ReceivedSignal rx = random_signal(c.required_length(), 8);
  for (Complex& s : rx.samples) s = 3.0 * s + Complex(1.5, -0.5);
  const SatObservation raw = multicoset_sample(rx, c);

  double mu = 0.0;
  for (double v : raw.values) mu += v;
  mu /= static_cast<double>(raw.values.size());
  double var = 0.0;
  for (double v : raw.values) var += (v - mu) * (v - mu);
  const double sigma = std::sqrt(var / static_cast<double>(raw.values.size()));

  const SatObservation z = normalize(raw);
  CHECK(z.normalized);
  CHECK(z.mean == doctest::Approx(mu).epsilon(1e-12));
  CHECK(z.stddev == doctest::Approx(sigma).epsilon(1e-12));
  double zm = 0.0, zs = 0.0;
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    CHECK(z.values[i] == doctest::Approx((raw.values[i] - mu) / sigma).epsilon(1e-12));
    zm += z.values[i];
  }
  zm /= static_cast<double>(z.values.size());
  for (double v : z.values) zs += (v - zm) * (v - zm);
  zs = std::sqrt(zs / static_cast<double>(z.values.size()));
  CHECK(std::abs(zm) < 1e-6);
  CHECK(std::abs(zs - 1.0) < 1e-4);

  // Already standardized input is a fixed point.
  SatObservation again = z;
  again.normalized = false;
  const SatObservation twice = normalize(again);
  for (std::size_t i = 0; i < z.values.size(); ++i) CHECK(std::abs(twice.values[i] - z.values[i]) < 1e-6);
}

TEST_CASE("normalize rejects degenerate or repeated input") {
  const CosetConfig c = fixed_config(2, 16, 10, {0, 1});
  ReceivedSignal rx;
  rx.samples.assign(c.required_length(), Complex(2.0, 2.0));
  CHECK_THROWS_AS(normalize(multicoset_sample(rx, c)), DegenerateInput);
  const SatObservation z = normalize(multicoset_sample(random_signal(c.required_length(), 4), c));
  CHECK_THROWS_AS(normalize(z), InvalidArgument);
  CHECK_THROWS_AS(normalize(SatObservation{}), DegenerateInput);
}
