#include "satsense/pipeline.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "satsense/checkpoint.hpp"
#include "satsense/downlink.hpp"
#include "satsense/error.hpp"
#include "satsense/rng.hpp"
#include "satsense/stats.hpp"

namespace satsense {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTrainLossTag = 0x7A1E;
constexpr std::uint64_t kTrainDropTag = 0x7A1D;
constexpr std::uint64_t kTestDropTag = 0xD0;

void say(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

Embedding over_link(const Embedding& z, double rate, std::uint64_t seed) {
  return transmit(z, LossChannelConfig{rate, seed});
}

std::vector<RecoveredObservation> recover_scene(const Autoencoder& model, std::span<const SatObservation> obs,
                                                double rate, const std::function<std::uint64_t(std::size_t)>& seed_of,
                                                std::vector<Embedding>* received = nullptr) {
  std::vector<RecoveredObservation> out;
  out.reserve(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const Embedding rx = over_link(encode(obs[k].flat(), model.encoder), rate, seed_of(k));
    out.push_back(decode(rx, model.decoder).recovered);
    if (received != nullptr) received->push_back(rx);
  }
  return out;
}

}  // namespace

RecoveryMetrics recovery_metrics(std::span<const double> x, std::span<const double> x_hat) {
  return RecoveryMetrics{mean_squared_error(x, x_hat), pearson(x, x_hat)};
}

const Autoencoder& TrainedModels::compressor(const std::string& name) const {
  const std::optional<Autoencoder>& m = name == "cae" ? cae : ae;
  if (name != "cae" && name != "ae") throw ConfigError("unknown compressor '" + name + "'");
  if (!m) throw ConfigError("compressor '" + name + "' is not available");
  return *m;
}

Matrix observation_columns(std::span<const SceneSample> samples) {
  if (samples.empty() || samples.front().observations.empty()) throw InvalidArgument("no observations");
  const auto dim = static_cast<Eigen::Index>(samples.front().observations.front().values.size());
  Eigen::Index count = 0;
  for (const SceneSample& s : samples) count += static_cast<Eigen::Index>(s.observations.size());
  Matrix x(dim, count);
  Eigen::Index col = 0;
  for (const SceneSample& s : samples) {
    for (const SatObservation& o : s.observations) {
      if (static_cast<Eigen::Index>(o.values.size()) != dim) throw InvalidArgument("mixed observation sizes");
      x.col(col++) = Eigen::Map<const Vector>(o.values.data(), dim);
    }
  }
  return x;
}

CompressorTraining train_compressor_model(const ExperimentConfig& cfg, CompressorKind kind,
                                          std::span<const SceneSample> train, const TrainingHooks& hooks) {
  const Matrix x = observation_columns(train);
  say(hooks.log, "training " + std::string(to_string(kind)) + " on " + std::to_string(x.cols()) +
                     " observations of dim " + std::to_string(x.rows()));
  CompressorTraining t = kind == CompressorKind::cae
                             ? train_cae(x, over_link, cfg.compressor_schedule, cfg.compressor)
                             : train_ae(x, cfg.compressor_schedule, cfg.compressor);
  round_to_f32(t.model.parameters());
  say(hooks.log, std::string(to_string(kind)) + " final training loss " + fmt(t.history.back(), 6));
  return t;
}

std::vector<LabeledGraph> recovered_graphs(const ExperimentConfig& cfg, const Autoencoder& compressor,
                                           std::span<const SceneSample> samples) {
  std::vector<LabeledGraph> out;
  out.reserve(samples.size());
  for (const SceneSample& s : samples) {
    Rng rng(derive_seed(s.seed, kTrainLossTag));
    const double rate = cfg.classifier_train_loss[rng.index(cfg.classifier_train_loss.size())];
    const auto rec = recover_scene(compressor, s.observations, rate,
                                   [&](std::size_t k) { return derive_seed(s.seed, kTrainDropTag, k); });
    out.push_back(LabeledGraph{build_graph(rec), s.truth.bits});
  }
  return out;
}

namespace {

EpochLogger epoch_logger_for(const TrainingHooks& hooks, const std::string& name) {
  EpochLogger inner = hooks.epoch_logger ? hooks.epoch_logger(name) : EpochLogger{};
  LogFn log = hooks.log;
  return [inner, log, name](std::size_t epoch, double lr, double loss, double acc) {
    if (inner) inner(epoch, lr, loss, acc);
    say(log, name + " epoch " + std::to_string(epoch) + " lr " + fmt(lr, 6) + " loss " + fmt(loss, 6) +
                 " val_acc " + fmt(acc));
  };
}

}  // namespace

ClassifierTraining<GlssModel> train_glss_model(const ExperimentConfig& cfg, std::span<const LabeledGraph> train,
                                               std::span<const LabeledGraph> val, const TrainingHooks& hooks,
                                               const std::string& name) {
  auto t = train_glss(train, val, cfg.glss_schedule, cfg.glss_config(), epoch_logger_for(hooks, name));
  round_to_f32(t.model.parameters());
  return t;
}

ClassifierTraining<DcsModel> train_dcs_model(const ExperimentConfig& cfg, std::span<const LabeledGraph> train,
                                             std::span<const LabeledGraph> val, const TrainingHooks& hooks,
                                             const std::string& name) {
  auto t = train_dcs(train, val, cfg.dcs_schedule, cfg.dcs_config(), epoch_logger_for(hooks, name));
  round_to_f32(t.model.parameters());
  return t;
}

TrainedModels train_models(const ExperimentConfig& cfg, const TrainingHooks& hooks) {
  cfg.validate();
  check_split_hygiene(cfg);
  say(hooks.log, "building training split (" + std::to_string(cfg.train_scenes) + " scenes)");
  const std::vector<SceneSample> train = build_split(cfg, Split::train);

  TrainedModels models;
  for (const std::string& name : cfg.compressors) {
    CompressorTraining t = train_compressor_model(cfg, parse_compressor_kind(name), train, hooks);
    models.history[name] = t.history;
    (name == "cae" ? models.cae : models.ae) = std::move(t.model);
  }
  if (cfg.classifiers.empty()) return models;

  const std::vector<SceneSample> val = build_split(cfg, Split::val);
  const Autoencoder& comp = models.compressor(cfg.classifier_compressor);
  const std::vector<LabeledGraph> train_graphs = recovered_graphs(cfg, comp, train);
  const std::vector<LabeledGraph> val_graphs = recovered_graphs(cfg, comp, val);
  for (const std::string& name : cfg.classifiers) {
    if (name == "glss") {
      auto t = train_glss_model(cfg, train_graphs, val_graphs, hooks);
      models.history[name] = t.history;
      models.glss = std::move(t.model);
    } else {
      auto t = train_dcs_model(cfg, train_graphs, val_graphs, hooks);
      models.history[name] = t.history;
      models.dcs = std::move(t.model);
    }
  }
  return models;
}

void save_models(const std::filesystem::path& dir, const ExperimentConfig& cfg, const TrainedModels& models) {
  auto extra = [&](const std::string& name, const TrainSchedule& schedule) {
    json j{{"config_seed", cfg.seed}, {"schedule", schedule}};
    if (auto it = models.history.find(name); it != models.history.end()) j["loss_history"] = it->second;
    return j;
  };
  if (models.cae) save_checkpoint(dir / "cae", *models.cae, extra("cae", cfg.compressor_schedule));
  if (models.ae) save_checkpoint(dir / "ae", *models.ae, extra("ae", cfg.compressor_schedule));
  if (models.glss) save_checkpoint(dir / "glss", *models.glss, extra("glss", cfg.glss_schedule));
  if (models.dcs) save_checkpoint(dir / "dcs", *models.dcs, extra("dcs", cfg.dcs_schedule));
}

TrainedModels load_models(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
  TrainedModels models;
  auto check_dims = [&](const Autoencoder& a, const std::string& name) {
    if (a.dims.input != cfg.observation_dim()) {
      throw ConfigError("checkpoint " + name + " expects input dim " + std::to_string(a.dims.input) +
                        ", config gives " + std::to_string(cfg.observation_dim()));
    }
  };
  for (const std::string& name : cfg.compressors) {
    Autoencoder a = load_autoencoder(dir / name);
    check_dims(a, name);
    (name == "cae" ? models.cae : models.ae) = std::move(a);
  }
  for (const std::string& name : cfg.classifiers) {
    if (name == "glss") {
      models.glss = load_glss(dir / "glss");
      if (models.glss->config.input_dim != cfg.observation_dim()) throw ConfigError("GLSS checkpoint dim mismatch");
    } else {
      models.dcs = load_dcs(dir / "dcs");
      if (models.dcs->config.rows != cfg.dcs_config().rows || models.dcs->config.cols != cfg.dcs_config().cols) {
        throw ConfigError("DCS checkpoint shape mismatch");
      }
    }
  }
  return models;
}

std::uint64_t test_drop_seed(std::uint64_t scene_seed, std::size_t snr_index, std::size_t loss_index,
                             std::size_t satellite) {
  return derive_seed(scene_seed, kTestDropTag, snr_index, loss_index, satellite);
}

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
};

// (model, snr index, loss index, num_signals, metric)
using CellKey = std::tuple<std::string, std::size_t, std::size_t, std::size_t, std::string>;

double scene_accuracy(const OccupancyPrediction& p, const std::vector<std::uint8_t>& truth) {
  std::size_t correct = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) correct += p.decisions[k] == truth[k] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

}  // namespace

ResultsTable run_pipeline(const ExperimentConfig& cfg, const TrainedModels& models, const PipelineOptions& options) {
  cfg.validate();
  check_split_hygiene(cfg);
  for (const std::string& c : cfg.compressors) models.compressor(c);
  if (cfg.uses_classifier("glss") && !models.glss) throw ConfigError("GLSS model not available");
  if (cfg.uses_classifier("dcs") && !models.dcs) throw ConfigError("DCS model not available");

  std::map<CellKey, Accumulator> cells;
  for (std::size_t i = 0; i < cfg.test_scenes; ++i) {
    const std::uint64_t seed = scene_seed(cfg, Split::test, i);
    const WidebandScene scene = make_scene(cfg, seed);
    const std::size_t nsig = scene.truth.num_signals();
    auto add = [&](const std::string& model, std::size_t si, std::size_t li, const std::string& metric, double v) {
      cells[CellKey{model, si, li, nsig, metric}].add(v);
    };
    for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
      const auto channels = satellite_channels(cfg, seed, cfg.snr_grid_db[si], cfg.satellites);
      const std::vector<SatObservation> obs = observe_scene(cfg, scene, channels);
      for (std::size_t li = 0; li < cfg.loss_grid.size(); ++li) {
        std::vector<RecoveredObservation> for_classifier;
        for (const std::string& name : cfg.compressors) {
          std::vector<Embedding> received;
          auto rec = recover_scene(models.compressor(name), obs, cfg.loss_grid[li],
                                   [&](std::size_t k) { return test_drop_seed(seed, si, li, k); }, &received);
          for (std::size_t k = 0; k < obs.size(); ++k) {
            const std::span<const double> x = obs[k].flat();
            add(name, si, li, "mse", mean_squared_error(x, rec[k].values));
            double r = 0.0;
            try {
              r = pearson(x, rec[k].values);
            } catch (const UndefinedCorrelation&) {
              r = 0.0;  // constant reconstruction carries no linear information
            }
            add(name, si, li, "pearson", r);
            if (options.on_drop) options.on_drop(DropRecord{seed, si, li, k, name, received[k].loss_mask});
          }
          if (name == cfg.classifier_compressor) for_classifier = std::move(rec);
        }
        if (cfg.classifiers.empty()) continue;
        const SensingGraph graph = build_graph(for_classifier);
        if (models.glss && cfg.uses_classifier("glss")) {
          add("glss", si, li, "accuracy", scene_accuracy(glss_forward(graph, *models.glss), scene.truth.bits));
        }
        if (models.dcs && cfg.uses_classifier("dcs")) {
          add("dcs", si, li, "accuracy", scene_accuracy(dcs_forward(graph, *models.dcs), scene.truth.bits));
        }
      }
    }
    if (options.log && (i + 1) % 50 == 0) options.log("evaluated " + std::to_string(i + 1) + " test scenes");
  }

  std::vector<std::pair<std::string, std::vector<std::string>>> order;
  for (const std::string& c : cfg.compressors) order.push_back({c, {"mse", "pearson"}});
  for (const std::string& c : cfg.classifiers) order.push_back({c, {"accuracy"}});

  ResultsTable table;
  for (const auto& [model, metrics] : order) {
    const std::string label = options.tag.empty() ? model : model + "[" + options.tag + "]";
    for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
      for (std::size_t li = 0; li < cfg.loss_grid.size(); ++li) {
        for (const std::string& metric : metrics) {
          Accumulator all;
          for (std::size_t n : cfg.num_signals) {
            const auto it = cells.find(CellKey{model, si, li, n, metric});
            if (it == cells.end()) continue;
            all.sum += it->second.sum;
            all.count += it->second.count;
            table.append(ResultRow{label, cfg.snr_grid_db[si], cfg.loss_grid[li], std::to_string(n), metric,
                                   it->second.sum / static_cast<double>(it->second.count), cfg.seed});
          }
          if (all.count > 0) {
            table.append(ResultRow{label, cfg.snr_grid_db[si], cfg.loss_grid[li], "all", metric,
                                   all.sum / static_cast<double>(all.count), cfg.seed});
          }
        }
      }
    }
  }
  return table;
}

}  // namespace satsense
