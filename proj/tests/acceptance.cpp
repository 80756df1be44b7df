// Acceptance run: one PASS/FAIL line per criterion. Criteria 1-4 and 11 call
// the library directly; 5-10 and 12 drive the satsense CLI on the quick
// profile and read back its CSV tables.
//
// Exit status is the number of failed criteria (0 when all pass).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "model_oracles.hpp"
#include "satsense/ablation.hpp"
#include "satsense/compressor.hpp"
#include "satsense/config.hpp"
#include "satsense/downlink.hpp"
#include "satsense/glss.hpp"
#include "satsense/results.hpp"
#include "satsense/rng.hpp"
#include "satsense/sampler.hpp"

namespace fs = std::filesystem;
using namespace satsense;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
  }
  return m;
}

// ---------------------------------------------------------------- oracles

Outcome sampler_oracle() {
  std::size_t mismatches = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const CosetConfig c = CosetConfig::with_random_offsets(8, 16, 400, derive_seed(0xACC1, s));
    Rng rng(derive_seed(0xACC2, s));
    ReceivedSignal rx;
    rx.samples.resize(c.required_length());
    for (Complex& x : rx.samples) x = Complex(rng.normal(), rng.normal());
    const SatObservation obs = multicoset_sample(rx, c);
    if (obs.values.size() != 2 * 8 * 400) {
      ++mismatches;
      continue;
    }
    for (std::size_t j = 0; j < 8; ++j) {
      for (std::size_t n = 0; n < 400; ++n) {
        const Complex v = rx.samples[n * 16 + c.offsets[j]];
        if (obs.values[j * 400 + n] != v.real() || obs.values[(8 + j) * 400 + n] != v.imag()) ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatched samples over 100 signals"};
}

Outcome gat_oracle() {
  Rng rng(0xACC3);
  double worst = 0.0;
  for (HeadCombine combine : {HeadCombine::concat, HeadCombine::mean}) {
    GlssConfig c;
    c.input_dim = 9;
    c.hidden = 7;
    c.gat1_out = 5;
    c.gat2_out = 4;
    c.heads = 3;
    c.num_bands = 6;
    c.combine = combine;
    for (std::size_t trial = 0; trial < 20; ++trial) {
      GlssModel m = make_glss(c, derive_seed(0xACC4, trial));
      for (Eigen::Index i = 0; i < m.dense1_b.size(); ++i) m.dense1_b(i) = rng.uniform(-0.2, 0.2);
      for (Eigen::Index i = 0; i < m.dense2_b.size(); ++i) m.dense2_b(i) = rng.uniform(-0.2, 0.2);
      const std::size_t k = 1 + trial % 5;
      SensingGraph g;
      g.features = random_matrix(static_cast<Eigen::Index>(k), 9, rng);
      const OccupancyPrediction p = glss_forward(g, m);
      const oracle::Vec want = oracle::glss(g.features, m);
      for (std::size_t b = 0; b < want.size(); ++b) worst = std::max(worst, std::abs(p.scores[b] - want[b]));
    }
  }
  double row_err = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t nodes = 1 + rng.index(8), in = 1 + rng.index(6), out = 1 + rng.index(5);
    const std::size_t heads = 1 + rng.index(4);
    const GatLayerParams layer = make_gat_layer(in, out, heads, HeadCombine::concat, derive_seed(0xACC5, inst));
    const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const Matrix h = random_matrix(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(in), rng, scale);
    for (std::size_t t = 0; t < heads; ++t) {
      const Matrix a = attention_coefficients(h, layer, t);
      for (Eigen::Index i = 0; i < a.rows(); ++i) row_err = std::max(row_err, std::abs(a.row(i).sum() - 1.0));
    }
  }
  return {worst < 1e-6 && row_err < 1e-6,
          "max |forward - oracle| " + sci(worst) + ", max |row sum - 1| " + sci(row_err)};
}

Outcome loss_formulas() {
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
  // Expected values computed by hand / in an independent script.
  const std::vector<Case> cases{
      {{1, 2, 3}, {1, 2, 3}, {1, 0, 2}, {1, 0, 2}, 1, 3, 0.0},
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
  double worst_value = 0.0;
  for (const Case& c : cases) {
    worst_value = std::max(worst_value, std::abs(cae_loss(c.x, c.xh, c.r, c.rh, c.a1, c.a2) - c.expected));
  }

  Autoencoder m = make_autoencoder(CompressorDims{6, 5, 4, 5}, 0xACC6, CompressorKind::cae);
  Rng rng(0xACC7);
  for (Vector* b : {&m.encoder.b1, &m.encoder.b2, &m.decoder.b3}) {
    for (Eigen::Index i = 0; i < b->size(); ++i) (*b)(i) = rng.uniform(0.05, 0.3);
  }
  m.decoder.bd.setConstant(0.3);
  const Matrix x = random_matrix(6, 3, rng);
  const KeepMaskFn keep = [](const Matrix& z) {
    Matrix k = Matrix::Ones(z.rows(), z.cols());
    k(1, 0) = 0.0;
    k(2, 2) = 0.0;
    return k;
  };
  const LossWeights w{1.0, 3.0};
  Autoencoder g = zeros_like(m);
  autoencoder_loss(m, x, keep, w, &g);
  const double grad_err = oracle::max_gradient_error(m.parameters(), g.parameters(),
                                                     [&] { return autoencoder_loss(m, x, keep, w, nullptr).total; });
  return {worst_value < 1e-9 && grad_err < 1e-4, std::to_string(cases.size()) + " vectors, max error " +
                                                     sci(worst_value) + "; gradient relative error " + sci(grad_err)};
}

Outcome packet_channel() {
  bool roundtrip = true;
  for (std::size_t m : {1u, 46u, 640u}) {
    Rng rng(m);
    Embedding z;
    z.values.resize(m);
    for (float& v : z.values) v = static_cast<float>(rng.normal());
    const Embedding r = transmit(z, LossChannelConfig{0.0, 1});
    roundtrip = roundtrip && r.size() == m && std::memcmp(r.values.data(), z.values.data(), 4 * m) == 0;
  }
  Embedding big;
  big.values.assign(46 * 1000, 1.0f);
  bool rates = true;
  std::string detail;
  for (double rate : {0.01, 0.02, 0.03}) {
    std::size_t drops = 0, total = 0;
    for (std::uint64_t k = 0; total < 100000; ++k) {
      const PacketStream s = drop_packets(packetize(big), LossChannelConfig{rate, derive_seed(0xACC8, k)});
      drops += s.dropped_count();
      total += s.packets.size();
    }
    const double n = static_cast<double>(total);
    const double frac = static_cast<double>(drops) / n;
    const double sigma = std::sqrt(rate * (1.0 - rate) / n);
    rates = rates && std::abs(frac - rate) <= 3.0 * sigma;
    detail += fmt(frac, 5) + "/" + fmt(rate, 2) + " ";
  }
  Embedding e640;
  e640.values.assign(640, 0.5f);
  const std::size_t count = packetize(e640).packets.size();
  return {roundtrip && rates && count == 14, std::string("roundtrip ") + (roundtrip ? "ok" : "broken") +
                                                 ", drop rates " + detail + ", M=640 -> " + std::to_string(count) +
                                                 " packets"};
}

Outcome doppler() {
  const DopplerAnalysis a = analyze_doppler(ExperimentConfig::default_profile());
  return {a.overall_mean_abs_offdiag < 0.3, "mean |off-diagonal Pearson| " + fmt(a.overall_mean_abs_offdiag)};
}

// ---------------------------------------------------------------- CLI runs

struct Runner {
  std::string cli;
  fs::path work;
  bool reuse = false;

  // Runs the CLI unless `product` already exists and reuse is on.
  bool run(const std::string& args, const fs::path& product, const std::string& log_name) const {
    if (reuse && fs::exists(product)) return true;
    fs::create_directories(work / "logs");
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" + (work / "logs" / (log_name + ".log")).string() +
                            "\" 2>&1";
    std::cerr << "running: " << cmd << '\n';
    const int rc = std::system(cmd.c_str());
    if (rc != 0) std::cerr << "  exited with status " << rc << '\n';
    return rc == 0 && fs::exists(product);
  }
};

double value_or_nan(const ResultsTable& t, const std::string& model, const std::string& metric, double snr,
                    double loss) {
  return t.find(model, metric, snr, loss).value_or(std::nan(""));
}

// Mean accuracy of a model over the given SNRs and every loss rate.
double mean_accuracy(const ResultsTable& t, const std::string& model, const std::vector<double>& snrs,
                     const std::vector<double>& losses) {
  double sum = 0.0;
  for (double s : snrs) {
    for (double l : losses) sum += value_or_nan(t, model, "accuracy", s, l);
  }
  return sum / static_cast<double>(snrs.size() * losses.size());
}

Outcome compare_recovery(const ResultsTable& t, const std::string& metric, bool lower_is_better) {
  std::size_t wins = 0, cells = 0;
  std::string worst;
  for (double snr : {-5.0, 0.0, 5.0, 10.0}) {
    for (double loss : {0.01, 0.03}) {
      const double cae = value_or_nan(t, "cae", metric, snr, loss);
      const double ae = value_or_nan(t, "ae", metric, snr, loss);
      ++cells;
      const bool win = lower_is_better ? cae < ae : cae > ae;
      if (win) {
        ++wins;
      } else if (worst.empty()) {
        worst = "; first loss at (" + fmt(snr, 0) + " dB, " + fmt(loss * 100, 0) + "%): cae " + fmt(cae) + " vs ae " +
                fmt(ae);
      }
    }
  }
  return {wins == cells, "cae better in " + std::to_string(wins) + "/" + std::to_string(cells) + " cells" + worst};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satsense acceptance criteria"};
  Runner runner;
  std::vector<int> only;
  app.add_option("--cli", runner.cli, "path to the satsense executable")->required();
  app.add_option("--work", runner.work, "scratch directory for CLI runs")->required();
  app.add_flag("--reuse", runner.reuse, "reuse CLI outputs already present in the work directory");
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };
  const fs::path quick = runner.work / "quick";
  const ExperimentConfig qcfg = ExperimentConfig::quick_profile();
  const std::string quick_args = "--profile quick -q -o \"" + quick.string() + "\"";

  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    if (!wanted(id)) return;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")"
              << std::endl;
  };

  report(1, "sampler equals index oracle", sampler_oracle);
  report(2, "GLSS forward equals attention oracle", gat_oracle);
  report(3, "loss values and gradients", loss_formulas);
  report(4, "packet channel", packet_channel);

  ResultsTable results;
  bool have_results = false;
  if (wanted(5) || wanted(6) || wanted(7)) {
    have_results = runner.run("evaluate --train " + quick_args, quick / "results.csv", "evaluate_quick");
    if (have_results) results = ResultsTable::read_csv(quick / "results.csv");
  }
  auto need_results = [&] {
    if (!have_results) throw std::runtime_error("quick evaluate run failed, see logs/evaluate_quick.log");
  };
  report(5, "CAE MSE below AE MSE at every cell", [&] {
    need_results();
    return compare_recovery(results, "mse", true);
  });
  report(6, "CAE Pearson above AE Pearson at every cell", [&] {
    need_results();
    return compare_recovery(results, "pearson", false);
  });
  report(7, "GLSS at least DCS at every cell, gap >= 1 point at (-10 dB, 3%)", [&] {
    need_results();
    std::size_t ok = 0, cells = 0;
    for (double snr : qcfg.snr_grid_db) {
      for (double loss : qcfg.loss_grid) {
        ++cells;
        if (value_or_nan(results, "glss", "accuracy", snr, loss) >= value_or_nan(results, "dcs", "accuracy", snr, loss))
          ++ok;
      }
    }
    const double gap =
        value_or_nan(results, "glss", "accuracy", -10.0, 0.03) - value_or_nan(results, "dcs", "accuracy", -10.0, 0.03);
    return Outcome{ok == cells && gap >= 0.01, "glss >= dcs in " + std::to_string(ok) + "/" + std::to_string(cells) +
                                                   " cells, gap at (-10 dB, 3%) " + fmt(100 * gap, 2) + " points"};
  });

  auto ablation = [&](AblationAxis axis) {
    const std::string name(to_string(axis));
    const fs::path csv = quick / ("ablation_" + name + ".csv");
    if (!runner.run("ablate --axis " + name + " " + quick_args, csv, "ablate_" + name)) {
      throw std::runtime_error("ablation " + name + " failed, see logs/ablate_" + name + ".log");
    }
    return ResultsTable::read_csv(csv);
  };

  report(8, "accuracy(K=10) - accuracy(K=5) >= 4 points at 0 dB", [&] {
    const ResultsTable t = ablation(AblationAxis::num_satellites);
    const double k10 = mean_accuracy(t, "glss[K=10]", {0.0}, qcfg.loss_grid);
    const double k5 = mean_accuracy(t, "glss[K=5]", {0.0}, qcfg.loss_grid);
    return Outcome{k10 - k5 >= 0.04,
                   "K=10 " + fmt(k10) + ", K=5 " + fmt(k5) + ", difference " + fmt(100 * (k10 - k5), 2) + " points"};
  });
  report(9, "accuracy non-decreasing from 2 to 6 heads (1 point noise), 6 heads default", [&] {
    const ResultsTable t = ablation(AblationAxis::heads);
    const double h2 = mean_accuracy(t, "glss[heads=2]", qcfg.snr_grid_db, qcfg.loss_grid);
    const double h4 = mean_accuracy(t, "glss[heads=4]", qcfg.snr_grid_db, qcfg.loss_grid);
    const double h6 = mean_accuracy(t, "glss[heads=6]", qcfg.snr_grid_db, qcfg.loss_grid);
    const bool default_six = ExperimentConfig::default_profile().glss_heads == 6 && qcfg.glss_heads == 6;
    return Outcome{h4 >= h2 - 0.01 && h6 >= h4 - 0.01 && default_six,
                   "heads 2/4/6: " + fmt(h2) + " / " + fmt(h4) + " / " + fmt(h6)};
  });
  report(10, "8 >= 6 >= 4 cosets at -10 dB (1 point noise); Nyquist >= sub-Nyquist", [&] {
    const ResultsTable c = ablation(AblationAxis::num_cosets);
    const double p4 = mean_accuracy(c, "glss[P=4]", {-10.0}, qcfg.loss_grid);
    const double p6 = mean_accuracy(c, "glss[P=6]", {-10.0}, qcfg.loss_grid);
    const double p8 = mean_accuracy(c, "glss[P=8]", {-10.0}, qcfg.loss_grid);
    const ResultsTable m = ablation(AblationAxis::sampling_mode);
    const double ny = mean_accuracy(m, "glss[mode=nyquist]", qcfg.snr_grid_db, qcfg.loss_grid);
    const double sub = mean_accuracy(m, "glss[mode=subnyquist]", qcfg.snr_grid_db, qcfg.loss_grid);
    return Outcome{p8 >= p6 - 0.01 && p6 >= p4 - 0.01 && ny >= sub,
                   "cosets 4/6/8: " + fmt(p4) + " / " + fmt(p6) + " / " + fmt(p8) + "; nyquist " + fmt(ny) +
                       ", sub-nyquist " + fmt(sub)};
  });

  report(11, "Doppler decorrelation below 0.3", doppler);

  report(12, "evaluate is byte-for-byte deterministic", [&] {
    const fs::path dir = runner.work / "determinism";
    fs::create_directories(dir);
    // A small config keeps the two full train + evaluate runs short.
    const nlohmann::json cfg = {
        {"profile", "quick"},
        {"satellites", 3},
        {"sampling", {{"cosets", 2}, {"samples_per_coset", 40}}},
        {"dataset", {{"train", 60}, {"val", 10}, {"test", 10}}},
        {"compressor", {{"hidden", 60}, {"embedding", 16}, {"intermediate", 60}, {"schedule", {{"epochs", 3}}}}},
        {"glss", {{"hidden", 32}, {"gat1_out", 16}, {"gat2_out", 8}, {"heads", 2}, {"schedule", {{"epochs", 3}}}}},
        {"dcs", {{"conv1_filters", 4}, {"conv2_filters", 4}, {"hidden", 16}, {"schedule", {{"epochs", 3}}}}},
    };
    std::ofstream(dir / "config.json") << cfg.dump(2) << '\n';
    std::string csv[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path out = dir / (i == 0 ? "a" : "b");
      fs::remove_all(out);
      const std::string args =
          "evaluate --train -q -c \"" + (dir / "config.json").string() + "\" -o \"" + out.string() + "\"";
      const bool saved = runner.reuse;
      runner.reuse = false;
      const bool ok = runner.run(args, out / "results.csv", std::string("determinism_") + (i == 0 ? "a" : "b"));
      runner.reuse = saved;
      if (!ok) throw std::runtime_error("evaluate run failed");
      std::ifstream in(out / "results.csv", std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      csv[i] = ss.str();
    }
    return Outcome{!csv[0].empty() && csv[0] == csv[1],
                   std::to_string(csv[0].size()) + " bytes, " + (csv[0] == csv[1] ? "identical" : "different")};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures;
}
