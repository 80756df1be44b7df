#include "satsense/ablation.hpp"

#include <cmath>
#include <optional>

#include "satsense/error.hpp"
#include "satsense/rng.hpp"

namespace satsense {

std::string_view to_string(AblationAxis a) {
  switch (a) {
    case AblationAxis::heads: return "heads";
    case AblationAxis::embedding_dim: return "embedding_dim";
    case AblationAxis::num_satellites: return "num_satellites";
    case AblationAxis::num_cosets: return "num_cosets";
    case AblationAxis::sampling_mode: return "sampling_mode";
  }
  return "?";
}

AblationAxis parse_ablation_axis(std::string_view name) {
  for (AblationAxis a : {AblationAxis::heads, AblationAxis::embedding_dim, AblationAxis::num_satellites,
                         AblationAxis::num_cosets, AblationAxis::sampling_mode}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("unknown ablation axis '" + std::string(name) + "'");
}

std::vector<std::string> sweep_values(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::heads: return {"2", "4", "6", "8"};
    case AblationAxis::embedding_dim: return {"200", "640"};
    case AblationAxis::num_satellites: return {"3", "5", "7", "10"};
    case AblationAxis::num_cosets: return {"4", "6", "8"};
    case AblationAxis::sampling_mode: return {"nyquist", "subnyquist"};
  }
  return {};
}

namespace {

std::string tag_of(AblationAxis axis, const std::string& value) {
  switch (axis) {
    case AblationAxis::heads: return "heads=" + value;
    case AblationAxis::embedding_dim: return "M=" + value;
    case AblationAxis::num_satellites: return "K=" + value;
    case AblationAxis::num_cosets: return "P=" + value;
    case AblationAxis::sampling_mode: return "mode=" + value;
  }
  return value;
}

}  // namespace

ExperimentConfig with_axis(const ExperimentConfig& base, AblationAxis axis, const std::string& value) {
  ExperimentConfig c = base;
  try {
    switch (axis) {
      case AblationAxis::heads: c.glss_heads = std::stoul(value); break;
      case AblationAxis::embedding_dim: c.compressor.embedding = std::stoul(value); break;
      case AblationAxis::num_satellites: c.satellites = std::stoul(value); break;
      case AblationAxis::num_cosets: c.cosets = std::stoul(value); break;
      case AblationAxis::sampling_mode: c.sampling_mode = parse_sampling_mode(value); break;
    }
  } catch (const std::logic_error&) {
    throw ConfigError("bad value '" + value + "' for axis " + std::string(to_string(axis)));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ResultsTable ablate(const ExperimentConfig& cfg, AblationAxis axis, const TrainingHooks& hooks) {
  ExperimentConfig base = cfg;
  base.compressors = {cfg.classifier_compressor};
  base.classifiers = {"glss"};
  base.validate();
  check_split_hygiene(base);
  const CompressorKind kind = parse_compressor_kind(base.classifier_compressor);

  // Heads and satellite count leave the compressor's input untouched.
  std::optional<Autoencoder> shared;
  if (axis == AblationAxis::heads || axis == AblationAxis::num_satellites) {
    const auto train = build_split(base, Split::train);
    shared = train_compressor_model(base, kind, train, hooks).model;
  }

  ResultsTable table;
  for (const std::string& value : sweep_values(axis)) {
    const ExperimentConfig c = with_axis(base, axis, value);
    const std::string tag = tag_of(axis, value);
    if (hooks.log) hooks.log("ablation point " + tag);
    const auto train = build_split(c, Split::train);
    const auto val = build_split(c, Split::val);

    TrainedModels models;
    Autoencoder comp = shared ? *shared : train_compressor_model(c, kind, train, hooks).model;
    const auto train_graphs = recovered_graphs(c, comp, train);
    const auto val_graphs = recovered_graphs(c, comp, val);
    models.glss = train_glss_model(c, train_graphs, val_graphs, hooks, "glss[" + tag + "]").model;
    (kind == CompressorKind::cae ? models.cae : models.ae) = std::move(comp);

    PipelineOptions opts;
    opts.tag = tag;
    opts.log = hooks.log;
    table.extend(run_pipeline(c, models, opts));
    if (axis == AblationAxis::embedding_dim) {
      table.append(ResultRow{c.classifier_compressor + "[" + tag + "]", std::nullopt, std::nullopt, "",
                             "compression_factor", c.compressor_dims().compression_factor(), c.seed});
    }
  }
  return table;
}

DopplerAnalysis analyze_doppler(const ExperimentConfig& cfg) {
  cfg.validate();
  DopplerAnalysis out;
  double total = 0.0;
  for (std::size_t s = 0; s < cfg.doppler_scenes; ++s) {
    Rng rng(derive_seed(cfg.seed, 0xD0991E5, s));
    const std::size_t n = cfg.num_signals[rng.index(cfg.num_signals.size())];
    const OccupancyTruth truth = generate_occupancy(cfg.grid, n, rng);
    const WidebandScene scene = synthesize_baseband(truth, cfg.grid, cfg.doppler_samples, rng);
    std::vector<double> shifts(cfg.doppler_satellites);
    for (double& d : shifts) d = rng.uniform(-cfg.channel.doppler_max_hz, cfg.channel.doppler_max_hz);
    const auto m = doppler_pearson_matrix(scene, shifts);
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m.size(); ++j) {
        if (i == j) continue;
        acc += std::abs(m[i][j]);
        ++pairs;
      }
    }
    out.mean_abs_offdiag.push_back(acc / static_cast<double>(pairs));
    total += out.mean_abs_offdiag.back();
    if (s == 0) {
      out.doppler_hz = shifts;
      out.matrix = m;
    }
  }
  out.overall_mean_abs_offdiag = cfg.doppler_scenes == 0 ? 0.0 : total / static_cast<double>(cfg.doppler_scenes);
  return out;
}

ResultsTable to_table(const DopplerAnalysis& a, std::uint64_t seed) {
  ResultsTable t;
  t.append(ResultRow{"doppler", std::nullopt, std::nullopt, "", "mean_abs_offdiag_pearson",
                     a.overall_mean_abs_offdiag, seed});
  for (std::size_t i = 0; i < a.doppler_hz.size(); ++i) {
    t.append(ResultRow{"doppler", std::nullopt, std::nullopt, "", "shift_hz[" + std::to_string(i) + "]",
                       a.doppler_hz[i], seed});
  }
  for (std::size_t i = 0; i < a.matrix.size(); ++i) {
    for (std::size_t j = 0; j < a.matrix.size(); ++j) {
      t.append(ResultRow{"doppler", std::nullopt, std::nullopt, "",
                         "pearson[" + std::to_string(i) + "-" + std::to_string(j) + "]", a.matrix[i][j], seed});
    }
  }
  return t;
}

}  // namespace satsense
