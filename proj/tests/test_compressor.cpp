#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "satsense/compressor.hpp"
#include "satsense/downlink.hpp"
#include "satsense/error.hpp"
#include "satsense/rng.hpp"

using namespace satsense;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
  }
  return m;
}

Autoencoder toy_model(std::uint64_t seed) {
  Autoencoder m = make_autoencoder(CompressorDims{6, 5, 4, 5}, seed, CompressorKind::cae);
  Rng rng(seed + 1);
  for (Vector* b : {&m.encoder.b1, &m.encoder.b2, &m.decoder.b3}) {
    for (Eigen::Index i = 0; i < b->size(); ++i) (*b)(i) = rng.uniform(0.05, 0.3);
  }
  m.decoder.bd.setConstant(0.3);
  return m;
}

// Drops element 1 of sample 0 and elements 2, 3 of sample 2.
Matrix fixed_keep(const Matrix& z) {
  Matrix keep = Matrix::Ones(z.rows(), z.cols());
  keep(1, 0) = 0.0;
  if (z.cols() > 2) {
    keep(2, 2) = 0.0;
    keep(3, 2) = 0.0;
  }
  return keep;
}

double loss_of(const Autoencoder& m, const Matrix& x, const LossWeights& w) {
  return autoencoder_loss(m, x, fixed_keep, w, nullptr).total;
}

}  // namespace

TEST_CASE("encode matches a hand-computed two-layer ReLU forward") {
  EncoderParams p;
  p.w1.resize(3, 4);
  p.w1 << 1, 0, -1, 0.5,
          0, 1, 1, 0,
         -1, -1, 0, 1;
  p.b1 = Vector(3);
  p.b1 << 0.5, -1, 0;
  p.w2.resize(2, 3);
  p.w2 << 1, 2, -0.5,
         -1, 0, 0.25;
  p.b2 = Vector(2);
  p.b2 << 0.1, 0.2;
  const std::vector<double> x{1, -2, 0.5, 3};
  // Layer 1: (2.5, -2.5, 4) -> (2.5, 0, 4). Layer 2: (0.6, -1.3) -> (0.6, 0).
  const Embedding z = encode(x, p);
  REQUIRE(z.size() == 2);
  CHECK(z.values[0] == 0.6f);
  CHECK(z.values[1] == 0.0f);
  CHECK_FALSE(z.corrupted);
  CHECK_THROWS_AS(encode(std::vector<double>{1, 2, 3}, p), InvalidArgument);
}

TEST_CASE("decode matches a hand-computed intermediate and output") {
  DecoderParams p;
  p.w3.resize(4, 3);
  p.w3 << 1, 0, 0,
          0, 1, -1,
          0.5, 0.5, 0.5,
         -1, 2, 0;
  p.b3 = Vector(4);
  p.b3 << 0, 0.5, -1, 0.25;
  p.wd.resize(5, 4);
  p.wd << 1, 1, 1, 1,
          2, 0, 0, -4,
          0, 0, 4, 0,
         -1, 0, 0, 0,
          0, 3, 0, 2;
  p.bd = Vector(5);
  p.bd << 0, 0, 0, 0.5, -0.1;
  Embedding z;
  z.values = {1.0f, 0.5f, 2.0f};
  // r = relu(1, -1, 0.75, 0.25); x^ = relu(2, 1, 3, -0.5, 0.4).
  const Decoded d = decode(z, p);
  REQUIRE(d.intermediate.size() == 4);
  CHECK(d.intermediate(0) == doctest::Approx(1.0));
  CHECK(d.intermediate(1) == 0.0);
  CHECK(d.intermediate(2) == doctest::Approx(0.75));
  CHECK(d.intermediate(3) == doctest::Approx(0.25));
  const std::vector<double> expected{2, 1, 3, 0, 0.4};
  REQUIRE(d.recovered.values.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(d.recovered.values[i] == doctest::Approx(expected[i]).epsilon(1e-12));

  z.values = {1.0f, 2.0f};
  CHECK_THROWS_AS(decode(z, p), InvalidArgument);
}

TEST_CASE("zero input with zero biases encodes to zero; zero params decode to zero") {
  const Autoencoder m = make_autoencoder(CompressorDims{12, 8, 4, 6}, 3, CompressorKind::cae);
  const Embedding z = encode(std::vector<double>(12, 0.0), m.encoder);
  for (float v : z.values) CHECK(v == 0.0f);
  Autoencoder zero = zeros_like(m);
  Embedding e;
  e.values.assign(4, 0.0f);
  for (double v : decode(e, zero.decoder).recovered.values) CHECK(v == 0.0);
}

TEST_CASE("default dims give 640 from 6400 and decode back to 6400") {
  const CompressorDims dims;
  CHECK(dims.input == 6400);
  CHECK(dims.embedding == 640);
  CHECK(dims.compression_factor() == doctest::Approx(10.0));
  const Autoencoder m = make_autoencoder(dims, 1, CompressorKind::cae);
  CHECK(m.encoder.w1.rows() == 1600);
  CHECK(m.decoder.w3.rows() == 2048);
  const Matrix x = random_matrix(6400, 1, 2);
  const Embedding z = encode(std::span<const double>(x.data(), 6400), m.encoder);
  CHECK(z.size() == 640);
  for (float v : z.values) CHECK(v >= 0.0f);
  CHECK(decode(z, m.decoder).recovered.values.size() == 6400);
}

TEST_CASE("encode/decode shape contract across configs") {
  for (std::size_t input : {8u, 50u, 800u}) {
    const Autoencoder m = make_autoencoder(CompressorDims{input, 16, 5, 12}, input, CompressorKind::ae);
    const Matrix x = random_matrix(static_cast<Eigen::Index>(input), 1, input);
    const Embedding z = encode(std::span<const double>(x.data(), input), m.encoder);
    CHECK(decode(z, m.decoder).recovered.values.size() == input);
  }
  CHECK_THROWS_AS(CompressorDims({0, 1, 1, 1}).validate(), InvalidArgument);
}

TEST_CASE("cae_loss matches hand-computed values") {
  struct Case {
    std::vector<double> x, xh, r, rh;
    double a1, a2, expected;
  };
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<double> lx, lxh;
  for (int i = 0; i < 10; ++i) {
    lx.push_back(0.1 * i);
    lxh.push_back(0.1 * i + 0.05 * (i % 2 == 0 ? 1 : -1));
  }
  const std::vector<Case> cases{
      // L = 0: perfect reconstruction, parallel intermediates.
      {{1, 2, 3}, {1, 2, 3}, {1, 0, 2}, {1, 0, 2}, 1, 3, 0.0},
      // L = 3: orthogonal intermediates with alpha2 = 3.
      {{1, -1}, {1, -1}, {1, 0}, {0, 2}, 1, 3, 3.0},
      {{1, 0}, {0, 0}, {1, 0}, {s, s}, 1, 3, 1.3786796564403572},
      {{0, 0}, {0, 0}, {1, 2}, {-2, -4}, 1, 3, 6.0},
      {{2, 2, 2, 2}, {1, 2, 3, 4}, {3, 4}, {6, 8}, 1, 3, 1.5},
      {{0.5, -1.5, 2.0}, {0.0, -1.0, 1.0}, {1, 1, 0}, {1, 0, 1}, 1, 3, 2.0},
      {{1, 2}, {3, 5}, {1, 0}, {0, 1}, 1, 0, 6.5},
      {{1, 2}, {3, 5}, {1, 0}, {0, 1}, 2, 3, 16.0},
      {{1, 1}, {0, 0}, {2, 1}, {2, 1}, 1, 3, 1.0},
      {lx, lxh, {1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}, 1, 3, 1.0934090909090908},
      {{3}, {1}, {1, 0, 0}, {-1, 1, 0}, 1, 3, 9.121320343559642},
  };
  for (const Case& c : cases) {
    CHECK(std::abs(cae_loss(c.x, c.xh, c.r, c.rh, c.a1, c.a2) - c.expected) < 1e-9);
  }
  // Defaults are alpha1 = 1, alpha2 = 3.
  CHECK(cae_loss(std::vector<double>{1, 0}, std::vector<double>{0, 0}, std::vector<double>{1, 0},
                 std::vector<double>{s, s}) == doctest::Approx(1.3786796564403572));
  const LossWeights w;
  CHECK(w.alpha1 == 1.0);
  CHECK(w.alpha2 == 3.0);
}

TEST_CASE("cosine term is undefined for zero vectors and bounded in [0, 2]") {
  const std::vector<double> zero{0, 0, 0}, v{1, 2, 3};
  CHECK_THROWS_AS(cosine_loss(zero, v), UndefinedCosine);
  CHECK_THROWS_AS(cosine_loss(v, zero), UndefinedCosine);
  CHECK_THROWS_AS(cae_loss(v, v, zero, v, 1, 3), UndefinedCosine);
  CHECK_THROWS_AS(cosine_loss(v, std::vector<double>{1, 2}), InvalidArgument);
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(5), b(5);
    for (double& e : a) e = rng.normal();
    for (double& e : b) e = rng.normal();
    const double l = cosine_loss(a, b);
    CHECK(l >= 0.0);
    CHECK(l <= 2.0);
    std::vector<double> scaled = a;
    const double c = rng.uniform(0.1, 10.0);
    for (double& e : scaled) e *= c;
    CHECK(std::abs(cosine_loss(a, scaled)) < 1e-12);
  }
  CHECK(cosine_loss(v, std::vector<double>{-1, -2, -3}) == doctest::Approx(2.0));
}

TEST_CASE("ae_loss is the mean squared error") {
  CHECK(ae_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(ae_loss(std::vector<double>{1, 1}, std::vector<double>{0, 0}) == 1.0);
  Rng rng(5);
  std::vector<double> a(1000), b(1000);
  for (double& e : a) e = rng.normal();
  for (double& e : b) e = rng.normal();
  CHECK(std::abs(ae_loss(a, b) - oracle::mse(a, b)) < 1e-12);
  CHECK_THROWS_AS(ae_loss(a, std::vector<double>{1.0}), InvalidArgument);
  CHECK_THROWS_AS(ae_loss(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("cae_loss with alpha2 = 0 equals alpha1 * ae_loss") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(20), xh(20), r(7), rh(7);
    for (double& e : x) e = rng.normal();
    for (double& e : xh) e = rng.normal();
    for (double& e : r) e = rng.normal();
    for (double& e : rh) e = rng.normal();
    const double a1 = rng.uniform(0.1, 3.0);
    CHECK(cae_loss(x, xh, r, rh, a1, 0.0) == doctest::Approx(a1 * ae_loss(x, xh)).epsilon(1e-14));
  }
}

TEST_CASE("batch loss agrees with the per-sample formula") {
  const Autoencoder m = toy_model(10);
  const Matrix x = random_matrix(6, 3, 11);
  const BatchLoss b = autoencoder_loss(m, x, fixed_keep, LossWeights{}, nullptr);
  double expected = 0.0;
  const Matrix z = encode_batch(x, m.encoder);
  const Matrix zh = z.cwiseProduct(fixed_keep(z));
  const Matrix r = intermediate_batch(z, m.decoder);
  const Matrix rh = intermediate_batch(zh, m.decoder);
  const Matrix xh = decode_batch(zh, m.decoder);
  for (Eigen::Index c = 0; c < 3; ++c) {
    const std::vector<double> xc(x.col(c).data(), x.col(c).data() + 6);
    const std::vector<double> xhc(xh.col(c).data(), xh.col(c).data() + 6);
    const std::vector<double> rc(r.col(c).data(), r.col(c).data() + 5);
    const std::vector<double> rhc(rh.col(c).data(), rh.col(c).data() + 5);
    expected += cae_loss(xc, xhc, rc, rhc, 1.0, 3.0) / 3.0;
  }
  CHECK(b.total == doctest::Approx(expected).epsilon(1e-9));
  CHECK(b.total == doctest::Approx(b.reconstruction + 3.0 * b.contrastive).epsilon(1e-12));

  // No corruption: the contrastive term vanishes.
  const BatchLoss clean = autoencoder_loss(m, x, {}, LossWeights{}, nullptr);
  CHECK(clean.contrastive == 0.0);
}

TEST_CASE("analytic gradients match central differences") {
  for (const LossWeights w : {LossWeights{1.0, 3.0}, LossWeights{1.0, 0.0}, LossWeights{0.5, 2.0}}) {
    Autoencoder m = toy_model(20);
    const Matrix x = random_matrix(6, 3, 21);
    Autoencoder g = zeros_like(m);
    autoencoder_loss(m, x, fixed_keep, w, &g);
    std::vector<ParamView> params = m.parameters();
    std::vector<ParamView> grads = g.parameters();
    const double h = 1e-5;
    for (std::size_t p = 0; p < params.size(); ++p) {
      std::vector<double> numeric(params[p].size());
      for (std::size_t i = 0; i < params[p].size(); ++i) {
        double& v = params[p].data[i];
        const double saved = v;
        v = saved + h;
        const double up = loss_of(m, x, w);
        v = saved - h;
        const double down = loss_of(m, x, w);
        v = saved;
        numeric[i] = (up - down) / (2.0 * h);
      }
      double diff = 0.0, na = 0.0, nn = 0.0;
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        diff += (grads[p].data[i] - numeric[i]) * (grads[p].data[i] - numeric[i]);
        na += grads[p].data[i] * grads[p].data[i];
        nn += numeric[i] * numeric[i];
      }
      const double scale = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
      INFO("parameter " << params[p].name << " alpha2 " << w.alpha2);
      CHECK(std::sqrt(diff) / scale < 1e-4);
      CHECK(std::sqrt(na) > 0.0);
    }
  }
}

TEST_CASE("a collapsed intermediate is penalized, not skipped") {
  Autoencoder m = toy_model(30);
  m.decoder.w3.setZero();
  m.decoder.b3.setConstant(-1.0);
  const Matrix x = random_matrix(6, 3, 31);
  const BatchLoss b = autoencoder_loss(m, x, fixed_keep, LossWeights{}, nullptr);
  // r = r^ = 0 for every sample, so every cosine is 0.
  CHECK(b.contrastive == doctest::Approx(1.0));
}

TEST_CASE("AE and CAE start from the same weights for a seed") {
  const CompressorDims d{10, 6, 3, 5};
  Autoencoder a = make_autoencoder(d, 42, CompressorKind::ae);
  Autoencoder c = make_autoencoder(d, 42, CompressorKind::cae);
  std::vector<ParamView> pa = a.parameters(), pc = c.parameters();
  REQUIRE(pa.size() == 8);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pc[i].name);
    CHECK(std::equal(pa[i].data, pa[i].data + pa[i].size(), pc[i].data));
  }
  CHECK(a.encoder.b1.isZero());
  CHECK(parse_compressor_kind("ae") == CompressorKind::ae);
  CHECK(to_string(CompressorKind::cae) == "cae");
  CHECK_THROWS_AS(parse_compressor_kind("vae"), InvalidArgument);
}

namespace {

// Low-rank nonnegative toy data so a small autoencoder can actually fit it.
Matrix toy_dataset(Eigen::Index n, std::uint64_t seed) {
  const Matrix basis = random_matrix(24, 3, seed).cwiseAbs();
  Matrix codes = random_matrix(3, n, seed + 1).cwiseAbs();
  return basis * codes;
}

Embedding packet_link(const Embedding& z, double rate, std::uint64_t seed) { return transmit(z, LossChannelConfig{rate, seed}); }

}  // namespace

TEST_CASE("CAE with no corruption and alpha2 = 0 trains exactly like the AE") {
  const Matrix data = toy_dataset(256, 40);
  TrainSchedule s;
  s.epochs = 8;
  s.batch_size = 32;
  s.seed = 41;
  CompressorOptions o;
  o.hidden = 16;
  o.embedding = 4;
  o.intermediate = 16;
  o.weights = LossWeights{1.0, 0.0};
  o.min_train_rate = 0.0;
  o.max_train_rate = 0.0;
  const CompressorTraining cae = train_cae(data, packet_link, s, o);
  const CompressorTraining ae = train_ae(data, s, o);
  REQUIRE(cae.history.size() == 8);
  CHECK(cae.history.back() == doctest::Approx(ae.history.back()).epsilon(1e-9));
  CHECK(cae.model.kind == CompressorKind::cae);
  CHECK(ae.model.kind == CompressorKind::ae);
  CHECK_THROWS_AS(train_cae(data, CorruptionOp{}, s, o), InvalidArgument);
}

TEST_CASE("training loss decreases on a smoothed window") {
  const Matrix data = toy_dataset(512, 50);
  TrainSchedule s;
  s.epochs = 40;
  s.batch_size = 32;
  s.seed = 51;
  CompressorOptions o;
  o.hidden = 32;
  o.embedding = 8;
  o.intermediate = 32;
  const CompressorTraining t = train_cae(data, packet_link, s, o);
  std::vector<double> smooth;
  for (std::size_t i = 4; i < t.history.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = i - 4; k <= i; ++k) acc += t.history[k];
    smooth.push_back(acc / 5.0);
  }
  const double tol = 0.01 * t.history.front();
  for (std::size_t i = 1; i < smooth.size(); ++i) CHECK(smooth[i] <= smooth[i - 1] + tol);
  CHECK(t.history.back() < 0.5 * t.history.front());
}

TEST_CASE("non-finite loss raises a training failure carrying the history") {
  Matrix data = toy_dataset(64, 60);
  data(3, 10) = std::nan("");
  TrainSchedule s;
  s.epochs = 3;
  s.batch_size = 64;
  CompressorOptions o;
  o.hidden = 8;
  o.embedding = 2;
  o.intermediate = 8;
  try {
    train_ae(data, s, o);
    FAIL("expected a training failure");
  } catch (const TrainingFailure& e) {
    REQUIRE_FALSE(e.history().empty());
    CHECK_FALSE(std::isfinite(e.history().back()));
  }
}

TEST_CASE("observation matrix requires normalized, equally sized observations") {
  SatObservation a;
  a.values = {1, 2, 3};
  a.normalized = true;
  SatObservation b = a;
  const std::vector<SatObservation> ok{a, b};
  const Matrix m = observation_matrix(ok);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  b.normalized = false;
  CHECK_THROWS_AS(observation_matrix(std::vector<SatObservation>{a, b}), InvalidArgument);
  b.normalized = true;
  b.values.push_back(4);
  CHECK_THROWS_AS(observation_matrix(std::vector<SatObservation>{a, b}), InvalidArgument);
}
