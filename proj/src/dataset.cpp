#include "satsense/dataset.hpp"

#include <unordered_map>

#include "satsense/error.hpp"
#include "satsense/rng.hpp"
#include "satsense/tensor_io.hpp"

namespace satsense {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSceneTag = 0x5CE4E;
constexpr std::uint64_t kOccupancyTag = 1;
constexpr std::uint64_t kChannelTag = 2;
constexpr std::uint64_t kTrainSnrTag = 3;

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::uint64_t scene_seed(const ExperimentConfig& cfg, Split split, std::size_t index) {
  return derive_seed(cfg.seed, kSceneTag, static_cast<std::uint64_t>(split), index);
}

std::size_t split_size(const ExperimentConfig& cfg, Split split) {
  switch (split) {
    case Split::train: return cfg.train_scenes;
    case Split::val: return cfg.val_scenes;
    case Split::test: return cfg.test_scenes;
  }
  return 0;
}

void check_split_hygiene(const ExperimentConfig& cfg) {
  std::unordered_map<std::uint64_t, Split> owner;
  for (Split s : {Split::train, Split::val, Split::test}) {
    for (std::size_t i = 0; i < split_size(cfg, s); ++i) {
      const auto [it, inserted] = owner.emplace(scene_seed(cfg, s, i), s);
      if (!inserted) {
        throw ConfigError("scene seed shared between " + std::string(to_string(it->second)) + " and " +
                          std::string(to_string(s)));
      }
    }
  }
}

WidebandScene make_scene(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kOccupancyTag));
  const std::size_t n = cfg.num_signals[rng.index(cfg.num_signals.size())];
  const OccupancyTruth truth = generate_occupancy(cfg.grid, n, rng);
  WidebandScene scene = synthesize_baseband(truth, cfg.grid, cfg.coset_config().required_length(), rng);
  scene.seed = seed;
  return scene;
}

double training_snr_db(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kTrainSnrTag));
  return rng.uniform(cfg.train_snr_min_db, cfg.train_snr_max_db);
}

std::vector<ChannelRealization> satellite_channels(const ExperimentConfig& cfg, std::uint64_t seed,
                                                   double mean_snr_db, std::size_t count) {
  std::vector<ChannelRealization> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, kChannelTag, k));
    out.push_back(draw_channel(mean_snr_db, cfg.channel, rng));
  }
  return out;
}

std::vector<SatObservation> observe_scene(const ExperimentConfig& cfg, const WidebandScene& scene,
                                          std::span<const ChannelRealization> channels) {
  const CosetConfig coset = cfg.coset_config();
  std::vector<SatObservation> out;
  out.reserve(channels.size());
  for (const ChannelRealization& ch : channels) {
    out.push_back(normalize(acquire(apply_satellite_channel(scene, ch), coset, cfg.sampling_mode)));
  }
  return out;
}

SceneSample build_scene_sample(const ExperimentConfig& cfg, std::uint64_t seed, double mean_snr_db) {
  const WidebandScene scene = make_scene(cfg, seed);
  const auto channels = satellite_channels(cfg, seed, mean_snr_db, cfg.satellites);
  return SceneSample{seed, mean_snr_db, scene.truth, observe_scene(cfg, scene, channels)};
}

std::vector<SceneSample> build_split(const ExperimentConfig& cfg, Split split, double test_snr_db) {
  const std::size_t count = split_size(cfg, split);
  std::vector<SceneSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = scene_seed(cfg, split, i);
    const double snr = split == Split::test ? test_snr_db : training_snr_db(cfg, seed);
    out.push_back(build_scene_sample(cfg, seed, snr));
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const ExperimentConfig& cfg, Split split,
                   std::span<const SceneSample> samples) {
  std::filesystem::create_directories(dir);
  const CosetConfig coset = cfg.coset_config();
  std::vector<float> values;
  values.reserve(samples.size() * cfg.satellites * coset.flat_size());
  json scenes = json::array();
  for (const SceneSample& s : samples) {
    json sats = json::array();
    for (const SatObservation& o : s.observations) {
      values.insert(values.end(), o.values.begin(), o.values.end());
      sats.push_back({{"doppler_hz", o.channel.doppler_hz},
                      {"path_loss_db", o.channel.path_loss_db},
                      {"snr_db", o.channel.snr_db},
                      {"seed", o.channel.seed},
                      {"mean", o.mean},
                      {"std", o.stddev}});
    }
    json modulations = json::array();
    for (const auto& m : s.truth.modulation) modulations.push_back(m ? json(std::string(to_string(*m))) : json());
    scenes.push_back({{"seed", s.seed},
                      {"mean_snr_db", s.mean_snr_db},
                      {"truth", s.truth.bits},
                      {"modulation", modulations},
                      {"satellites", sats}});
  }
  const std::string file = "observations.f32";
  write_f32(dir / file, std::span<const float>(values));
  json sidecar{{"split", std::string(to_string(split))},
               {"tensor", {{"file", file},
                           {"dtype", "float32-le"},
                           {"shape", {samples.size(), cfg.satellites, coset.rows(), coset.samples_per_coset}}}},
               {"grid", {{"f_lo", cfg.grid.f_lo}, {"f_hi", cfg.grid.f_hi}, {"band_width", cfg.grid.band_width},
                         {"num_bands", cfg.grid.num_bands}}},
               {"sampling", {{"P", coset.cosets}, {"L", coset.ratio}, {"N", coset.samples_per_coset},
                             {"offsets", coset.offsets}, {"mode", std::string(to_string(cfg.sampling_mode))}}},
               {"config_seed", cfg.seed},
               {"scenes", scenes}};
  write_json(dir / "dataset.json", sidecar);
}

}  // namespace satsense
