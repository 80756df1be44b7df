#include "satsense/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "satsense/checkpoint.hpp"
#include "satsense/error.hpp"
#include "satsense/rng.hpp"
#include "satsense/tensor_io.hpp"

namespace satsense {

using nlohmann::json;

ExperimentConfig ExperimentConfig::default_profile() {
  ExperimentConfig c;
  c.compressor_schedule.batch_size = 128;
  c.glss_schedule.batch_size = 32;
  c.dcs_schedule.batch_size = 32;
  return c;
}

ExperimentConfig ExperimentConfig::quick_profile() {
  ExperimentConfig c = default_profile();
  c.profile = "quick";
  c.satellites = 5;
  c.cosets = 4;
  c.samples_per_coset = 100;
  c.train_scenes = 1600;
  c.val_scenes = 200;
  c.test_scenes = 200;
  c.compressor.hidden = 400;
  c.compressor.embedding = 80;  // 10x compression of 2PN = 800, as at default scale
  c.compressor.intermediate = 400;
  c.glss_hidden = 256;
  c.glss_gat1_out = 64;
  c.glss_gat2_out = 32;
  c.dcs_hidden = 128;
  c.output_dir = "runs/quick";
  return c;
}

ExperimentConfig ExperimentConfig::for_profile(const std::string& name) {
  if (name == "default") return default_profile();
  if (name == "quick") return quick_profile();
  throw ConfigError("unknown profile '" + name + "' (expected default or quick)");
}

void ExperimentConfig::validate() const {
  try {
    grid.validate();
    coset_config();
    compressor_dims().validate();
    glss_config().validate();
    dcs_config().validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (satellites < 2) throw ConfigError("need at least two satellites");
  if (snr_grid_db.empty() || loss_grid.empty() || num_signals.empty() || classifier_train_loss.empty()) {
    throw ConfigError("SNR, loss-rate and num_signals grids must be non-empty");
  }
  for (double r : loss_grid) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("loss rates must lie in [0, 1]");
  }
  for (double r : classifier_train_loss) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("loss rates must lie in [0, 1]");
  }
  for (std::size_t n : num_signals) {
    if (n == 0 || n > grid.num_bands) throw ConfigError("num_signals entries must lie in [1, num_bands]");
  }
  if (!(train_snr_min_db <= train_snr_max_db)) throw ConfigError("train SNR range is empty");
  if (train_scenes == 0 || test_scenes == 0) throw ConfigError("train and test splits must be non-empty");
  if (compressor.min_train_rate < 0.0 || compressor.max_train_rate > 1.0 ||
      compressor.min_train_rate > compressor.max_train_rate) {
    throw ConfigError("compressor training loss-rate range is invalid");
  }
  for (const std::string& m : compressors) {
    if (m != "cae" && m != "ae") throw ConfigError("unknown compressor '" + m + "'");
  }
  for (const std::string& m : classifiers) {
    if (m != "glss" && m != "dcs") throw ConfigError("unknown classifier '" + m + "'");
  }
  if (!classifiers.empty() && !uses_compressor(classifier_compressor)) {
    throw ConfigError("classifier_compressor '" + classifier_compressor + "' is not among the selected compressors");
  }
  if (doppler_satellites < 2 || doppler_samples < 2) throw ConfigError("doppler analysis needs >= 2 streams and samples");
}

CosetConfig ExperimentConfig::coset_config() const {
  return CosetConfig::with_random_offsets(cosets, ratio, samples_per_coset, derive_seed(seed, 0xC05E7));
}

CompressorDims ExperimentConfig::compressor_dims() const {
  return CompressorDims{observation_dim(), compressor.hidden, compressor.embedding, compressor.intermediate};
}

GlssConfig ExperimentConfig::glss_config() const {
  GlssConfig g;
  g.input_dim = observation_dim();
  g.hidden = glss_hidden;
  g.gat1_out = glss_gat1_out;
  g.gat2_out = glss_gat2_out;
  g.heads = glss_heads;
  g.num_bands = grid.num_bands;
  g.combine = glss_combine;
  return g;
}

DcsConfig ExperimentConfig::dcs_config() const {
  DcsConfig d;
  d.rows = satellites * 2 * cosets;
  d.cols = samples_per_coset;
  d.conv1_filters = dcs_conv1_filters;
  d.conv2_filters = dcs_conv2_filters;
  d.hidden = dcs_hidden;
  d.num_bands = grid.num_bands;
  return d;
}

bool ExperimentConfig::uses_compressor(const std::string& name) const {
  return std::find(compressors.begin(), compressors.end(), name) != compressors.end();
}

bool ExperimentConfig::uses_classifier(const std::string& name) const {
  return std::find(classifiers.begin(), classifiers.end(), name) != classifiers.end();
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["profile"] = c.profile;
  j["seed"] = c.seed;
  j["grid"] = {{"f_lo", c.grid.f_lo}, {"f_hi", c.grid.f_hi}, {"band_width", c.grid.band_width},
               {"num_bands", c.grid.num_bands}};
  j["channel"] = {{"snr_spread_db", c.channel.snr_spread_db},
                  {"doppler_max_hz", c.channel.doppler_max_hz},
                  {"path_loss_db", c.channel.path_loss_db}};
  j["satellites"] = c.satellites;
  j["sampling"] = {{"cosets", c.cosets},
                   {"ratio", c.ratio},
                   {"samples_per_coset", c.samples_per_coset},
                   {"mode", std::string(to_string(c.sampling_mode))}};
  j["snr_grid_db"] = c.snr_grid_db;
  j["loss_grid"] = c.loss_grid;
  j["num_signals"] = c.num_signals;
  j["train_snr_db"] = {{"min", c.train_snr_min_db}, {"max", c.train_snr_max_db}};
  j["classifier_train_loss"] = c.classifier_train_loss;
  j["dataset"] = {{"train", c.train_scenes}, {"val", c.val_scenes}, {"test", c.test_scenes}};
  j["compressor"] = {{"hidden", c.compressor.hidden},
                     {"embedding", c.compressor.embedding},
                     {"intermediate", c.compressor.intermediate},
                     {"alpha1", c.compressor.weights.alpha1},
                     {"alpha2", c.compressor.weights.alpha2},
                     {"min_train_rate", c.compressor.min_train_rate},
                     {"max_train_rate", c.compressor.max_train_rate},
                     {"schedule", c.compressor_schedule}};
  j["glss"] = {{"hidden", c.glss_hidden},
               {"gat1_out", c.glss_gat1_out},
               {"gat2_out", c.glss_gat2_out},
               {"heads", c.glss_heads},
               {"combine", std::string(to_string(c.glss_combine))},
               {"schedule", c.glss_schedule}};
  j["dcs"] = {{"conv1_filters", c.dcs_conv1_filters},
              {"conv2_filters", c.dcs_conv2_filters},
              {"hidden", c.dcs_hidden},
              {"schedule", c.dcs_schedule}};
  j["models"] = {{"compressors", c.compressors},
                 {"classifiers", c.classifiers},
                 {"classifier_compressor", c.classifier_compressor}};
  j["doppler_analysis"] = {{"satellites", c.doppler_satellites},
                           {"scenes", c.doppler_scenes},
                           {"samples", c.doppler_samples}};
  j["output_dir"] = c.output_dir;
  return j;
}

namespace {

void check_keys(const json& base, const json& patch, const std::string& path) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    const json& b = base.at(it.key());
    if (b.is_object()) {
      if (!it.value().is_object()) throw ConfigError("config key '" + key + "' must be an object");
      check_keys(b, it.value(), key);
    }
  }
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  c.profile = j.at("profile").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const json& g = j.at("grid");
  c.grid.f_lo = g.at("f_lo");
  c.grid.f_hi = g.at("f_hi");
  c.grid.band_width = g.at("band_width");
  c.grid.num_bands = g.at("num_bands");
  const json& ch = j.at("channel");
  c.channel.snr_spread_db = ch.at("snr_spread_db");
  c.channel.doppler_max_hz = ch.at("doppler_max_hz");
  c.channel.path_loss_db = ch.at("path_loss_db");
  c.satellites = j.at("satellites");
  const json& s = j.at("sampling");
  c.cosets = s.at("cosets");
  c.ratio = s.at("ratio");
  c.samples_per_coset = s.at("samples_per_coset");
  c.sampling_mode = parse_sampling_mode(s.at("mode").get<std::string>());
  c.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
  c.loss_grid = j.at("loss_grid").get<std::vector<double>>();
  c.num_signals = j.at("num_signals").get<std::vector<std::size_t>>();
  c.train_snr_min_db = j.at("train_snr_db").at("min");
  c.train_snr_max_db = j.at("train_snr_db").at("max");
  c.classifier_train_loss = j.at("classifier_train_loss").get<std::vector<double>>();
  const json& d = j.at("dataset");
  c.train_scenes = d.at("train");
  c.val_scenes = d.at("val");
  c.test_scenes = d.at("test");
  const json& cp = j.at("compressor");
  c.compressor.hidden = cp.at("hidden");
  c.compressor.embedding = cp.at("embedding");
  c.compressor.intermediate = cp.at("intermediate");
  c.compressor.weights.alpha1 = cp.at("alpha1");
  c.compressor.weights.alpha2 = cp.at("alpha2");
  c.compressor.min_train_rate = cp.at("min_train_rate");
  c.compressor.max_train_rate = cp.at("max_train_rate");
  c.compressor_schedule = cp.at("schedule").get<TrainSchedule>();
  const json& gl = j.at("glss");
  c.glss_hidden = gl.at("hidden");
  c.glss_gat1_out = gl.at("gat1_out");
  c.glss_gat2_out = gl.at("gat2_out");
  c.glss_heads = gl.at("heads");
  c.glss_combine = parse_head_combine(gl.at("combine").get<std::string>());
  c.glss_schedule = gl.at("schedule").get<TrainSchedule>();
  const json& dc = j.at("dcs");
  c.dcs_conv1_filters = dc.at("conv1_filters");
  c.dcs_conv2_filters = dc.at("conv2_filters");
  c.dcs_hidden = dc.at("hidden");
  c.dcs_schedule = dc.at("schedule").get<TrainSchedule>();
  const json& m = j.at("models");
  c.compressors = m.at("compressors").get<std::vector<std::string>>();
  c.classifiers = m.at("classifiers").get<std::vector<std::string>>();
  c.classifier_compressor = m.at("classifier_compressor").get<std::string>();
  const json& da = j.at("doppler_analysis");
  c.doppler_satellites = da.at("satellites");
  c.doppler_scenes = da.at("scenes");
  c.doppler_samples = da.at("samples");
  c.output_dir = j.at("output_dir").get<std::string>();
  return c;
}

}  // namespace

ExperimentConfig apply_patch(const ExperimentConfig& base, const json& patch) {
  if (!patch.is_object()) throw ConfigError("config must be a JSON object");
  json merged = to_json(base);
  check_keys(merged, patch, "");
  merged.merge_patch(patch);
  ExperimentConfig c;
  try {
    c = from_json(merged);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig apply_override(const ExperimentConfig& base, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json patch = json::object();
  json* node = &patch;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed override key: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
  return apply_patch(base, patch);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = read_json(path);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const std::string profile = j.value("profile", std::string("default"));
  return apply_patch(ExperimentConfig::for_profile(profile), j);
}

}  // namespace satsense
