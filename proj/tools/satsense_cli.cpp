// satsense: command-line front end for dataset generation, training,
// evaluation, ablations and figure rendering.
//
// Exit codes: 0 success, 1 runtime error, 2 configuration error, 3 training failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "satsense/ablation.hpp"
#include "satsense/checkpoint.hpp"
#include "satsense/config.hpp"
#include "satsense/dataset.hpp"
#include "satsense/downlink.hpp"
#include "satsense/error.hpp"
#include "satsense/flops.hpp"
#include "satsense/pipeline.hpp"
#include "satsense/plots.hpp"

namespace fs = std::filesystem;
using namespace satsense;

namespace {

struct Common {
  std::string config_path;
  std::string profile;
  std::vector<std::string> overrides;
  std::string out;
  long long seed = -1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "JSON config file");
  cmd->add_option("--profile", c.profile, "base profile when no config file is given (default|quick)");
  cmd->add_option("-s,--set", c.overrides, "override a config key, e.g. glss.heads=4")->take_all();
  cmd->add_option("-o,--out", c.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", c.seed, "base seed (overrides seed)");
  cmd->add_flag("-q,--quiet", c.quiet, "no progress output");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = !c.config_path.empty() ? load_config(c.config_path)
                                                : ExperimentConfig::for_profile(c.profile.empty() ? "default" : c.profile);
  if (!c.config_path.empty() && !c.profile.empty()) {
    throw ConfigError("--profile cannot be combined with --config; set \"profile\" in the file");
  }
  for (const std::string& o : c.overrides) cfg = apply_override(cfg, o);
  if (c.seed >= 0) cfg = apply_patch(cfg, {{"seed", static_cast<std::uint64_t>(c.seed)}});
  if (!c.out.empty()) cfg = apply_patch(cfg, {{"output_dir", c.out}});
  cfg.validate();
  return cfg;
}

LogFn logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

TrainingHooks hooks_for(const Common& c, const ExperimentConfig& cfg) {
  TrainingHooks h;
  h.log = logger(c);
  const fs::path logs = fs::path(cfg.output_dir) / "logs";
  h.epoch_logger = [logs](const std::string& model) -> EpochLogger {
    fs::create_directories(logs);
    const fs::path file = logs / (model + "_epochs.csv");
    {
      std::ofstream out(file, std::ios::trunc);
      out << "epoch,lr,train_loss,val_accuracy\n";
    }
    return [file](std::size_t epoch, double lr, double loss, double acc) {
      std::ofstream out(file, std::ios::app);
      out << epoch << ',' << format_number(lr) << ',' << format_number(loss) << ',' << format_number(acc) << '\n';
    };
  };
  return h;
}

fs::path checkpoints(const ExperimentConfig& cfg) { return fs::path(cfg.output_dir) / "checkpoints"; }

void save_config(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::ofstream(fs::path(cfg.output_dir) / "config.json") << to_json(cfg).dump(2) << '\n';
}

int cmd_generate(const Common& c, const std::string& split_name, double test_snr) {
  const ExperimentConfig cfg = resolve(c);
  check_split_hygiene(cfg);
  save_config(cfg);
  const LogFn log = logger(c);
  for (Split s : {Split::train, Split::val, Split::test}) {
    if (split_name != "all" && split_name != to_string(s)) continue;
    const auto samples = build_split(cfg, s, test_snr);
    const fs::path dir = fs::path(cfg.output_dir) / "data" / std::string(to_string(s));
    write_dataset(dir, cfg, s, samples);
    if (log) log("wrote " + std::to_string(samples.size()) + " scenes to " + dir.string());
  }
  if (split_name != "all" && split_name != "train" && split_name != "val" && split_name != "test") {
    throw ConfigError("unknown split '" + split_name + "'");
  }
  return 0;
}

int cmd_train_compressor(const Common& c, CompressorKind kind) {
  const ExperimentConfig cfg = resolve(c);
  check_split_hygiene(cfg);
  save_config(cfg);
  const TrainingHooks hooks = hooks_for(c, cfg);
  const auto train = build_split(cfg, Split::train);
  CompressorTraining t = train_compressor_model(cfg, kind, train, hooks);
  TrainedModels m;
  m.history[std::string(to_string(kind))] = t.history;
  (kind == CompressorKind::cae ? m.cae : m.ae) = std::move(t.model);
  save_models(checkpoints(cfg), cfg, m);
  return 0;
}

int cmd_train_classifier(const Common& c, const std::string& which) {
  const ExperimentConfig cfg = resolve(c);
  check_split_hygiene(cfg);
  save_config(cfg);
  const TrainingHooks hooks = hooks_for(c, cfg);
  const Autoencoder comp = load_autoencoder(checkpoints(cfg) / cfg.classifier_compressor);
  if (comp.dims.input != cfg.observation_dim()) throw ConfigError("compressor checkpoint does not match config dims");
  const auto train = recovered_graphs(cfg, comp, build_split(cfg, Split::train));
  const auto val = recovered_graphs(cfg, comp, build_split(cfg, Split::val));
  TrainedModels m;
  if (which == "glss") {
    auto t = train_glss_model(cfg, train, val, hooks);
    m.history["glss"] = t.history;
    m.glss = std::move(t.model);
  } else {
    auto t = train_dcs_model(cfg, train, val, hooks);
    m.history["dcs"] = t.history;
    m.dcs = std::move(t.model);
  }
  save_models(checkpoints(cfg), cfg, m);
  return 0;
}

int cmd_evaluate(const Common& c, bool train, const std::string& csv) {
  const ExperimentConfig cfg = resolve(c);
  save_config(cfg);
  TrainedModels models;
  if (train) {
    models = train_models(cfg, hooks_for(c, cfg));
    save_models(checkpoints(cfg), cfg, models);
  } else {
    models = load_models(checkpoints(cfg), cfg);
  }
  PipelineOptions opts;
  opts.log = logger(c);
  const ResultsTable table = run_pipeline(cfg, models, opts);
  const fs::path path = csv.empty() ? fs::path(cfg.output_dir) / "results.csv" : fs::path(csv);
  table.write_csv(path);
  if (opts.log) opts.log("wrote " + std::to_string(table.size()) + " rows to " + path.string());
  return 0;
}

int cmd_ablate(const Common& c, const std::string& axis_name) {
  const ExperimentConfig cfg = resolve(c);
  save_config(cfg);
  std::vector<AblationAxis> axes;
  if (axis_name == "all") {
    axes = {AblationAxis::heads, AblationAxis::embedding_dim, AblationAxis::num_satellites, AblationAxis::num_cosets,
            AblationAxis::sampling_mode};
  } else {
    axes = {parse_ablation_axis(axis_name)};
  }
  for (AblationAxis a : axes) {
    const ResultsTable t = ablate(cfg, a, hooks_for(c, cfg));
    const fs::path path = fs::path(cfg.output_dir) / ("ablation_" + std::string(to_string(a)) + ".csv");
    t.write_csv(path);
    if (!c.quiet) std::cerr << "wrote " << path.string() << '\n';
  }
  return 0;
}

int cmd_analyze_doppler(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const DopplerAnalysis a = analyze_doppler(cfg);
  const fs::path path = fs::path(cfg.output_dir) / "doppler.csv";
  to_table(a, cfg.seed).write_csv(path);
  std::cout << "mean |off-diagonal Pearson| = " << format_number(a.overall_mean_abs_offdiag) << " over "
            << cfg.doppler_scenes << " scenes\n";
  return 0;
}

int cmd_flops(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const ResultsTable t = flops_report(cfg.glss_config(), {3, 5, 7, 10}, cfg.seed);
  t.write_csv(fs::path(cfg.output_dir) / "flops.csv");
  for (const ResultRow& r : t.rows()) std::cout << r.model << ' ' << format_number(r.value) << " MFLOPs\n";
  return 0;
}

int cmd_plot(const Common& c, const std::vector<std::string>& inputs) {
  const ExperimentConfig cfg = resolve(c);
  ResultsTable merged;
  std::vector<std::string> files = inputs;
  if (files.empty()) {
    for (const char* name : {"results.csv", "doppler.csv", "flops.csv", "ablation_heads.csv",
                             "ablation_embedding_dim.csv", "ablation_num_satellites.csv", "ablation_num_cosets.csv",
                             "ablation_sampling_mode.csv"}) {
      const fs::path p = fs::path(cfg.output_dir) / name;
      if (fs::exists(p)) files.push_back(p.string());
    }
  }
  if (files.empty()) throw ConfigError("no results tables found to plot");
  for (const std::string& f : files) merged.extend(ResultsTable::read_csv(f));
  for (const fs::path& p : emit_plots(merged, fs::path(cfg.output_dir) / "figures")) std::cout << p.string() << '\n';
  return 0;
}

int cmd_dump_packets(const Common& c, std::size_t scene, std::size_t satellite, double rate, double snr) {
  const ExperimentConfig cfg = resolve(c);
  if (satellite >= cfg.satellites) throw ConfigError("satellite index out of range");
  const Autoencoder comp = load_autoencoder(checkpoints(cfg) / cfg.classifier_compressor);
  const SceneSample s = build_scene_sample(cfg, scene_seed(cfg, Split::test, scene), snr);
  const Embedding z = encode(s.observations[satellite].flat(), comp.encoder);
  const PacketStream stream =
      drop_packets(packetize(z), LossChannelConfig{rate, test_drop_seed(s.seed, 0, 0, satellite)});
  std::cout << "# " << stream.packets.size() << " packets, " << stream.dropped_count() << " dropped, embedding dim "
            << z.size() << '\n'
            << hex_dump(stream);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-satellite collaborative spectrum sensing simulator"};
  app.require_subcommand(1);
  Common common;

  auto* gen = app.add_subcommand("generate", "write scene datasets");
  add_common(gen, common);
  std::string split = "all";
  double gen_snr = 0.0;
  gen->add_option("--split", split, "train|val|test|all");
  gen->add_option("--test-snr", gen_snr, "mean SNR (dB) for the test split");

  auto* tcae = app.add_subcommand("train-cae", "train the contrastive autoencoder");
  add_common(tcae, common);
  auto* tae = app.add_subcommand("train-ae", "train the plain autoencoder");
  add_common(tae, common);
  auto* tglss = app.add_subcommand("train-glss", "train the graph attention classifier");
  add_common(tglss, common);
  auto* tdcs = app.add_subcommand("train-dcs", "train the CNN baseline");
  add_common(tdcs, common);

  auto* eval = app.add_subcommand("evaluate", "run the end-to-end pipeline on the test split");
  add_common(eval, common);
  bool do_train = false;
  std::string csv;
  eval->add_flag("--train", do_train, "train all selected models first instead of loading checkpoints");
  eval->add_option("--csv", csv, "results path (default <out>/results.csv)");

  auto* abl = app.add_subcommand("ablate", "sweep one axis");
  add_common(abl, common);
  std::string axis;
  abl->add_option("--axis", axis, "heads|embedding_dim|num_satellites|num_cosets|sampling_mode|all")->required();

  auto* dop = app.add_subcommand("analyze-doppler", "Pearson coefficients across Doppler shifts");
  add_common(dop, common);
  auto* fl = app.add_subcommand("flops", "analytic GLSS FLOP counts");
  add_common(fl, common);

  auto* plot = app.add_subcommand("plot", "render figures from results tables");
  add_common(plot, common);
  std::vector<std::string> inputs;
  plot->add_option("inputs", inputs, "CSV tables (default: all tables in the output dir)");

  auto* dump = app.add_subcommand("dump-packets", "hex dump of one embedding's transport packets");
  add_common(dump, common);
  std::size_t scene = 0, satellite = 0;
  double rate = 0.0, dump_snr = 0.0;
  dump->add_option("--scene", scene, "test scene index");
  dump->add_option("--satellite", satellite, "satellite index");
  dump->add_option("--loss", rate, "packet loss rate");
  dump->add_option("--snr", dump_snr, "mean SNR (dB)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(common, split, gen_snr);
    if (tcae->parsed()) return cmd_train_compressor(common, CompressorKind::cae);
    if (tae->parsed()) return cmd_train_compressor(common, CompressorKind::ae);
    if (tglss->parsed()) return cmd_train_classifier(common, "glss");
    if (tdcs->parsed()) return cmd_train_classifier(common, "dcs");
    if (eval->parsed()) return cmd_evaluate(common, do_train, csv);
    if (abl->parsed()) return cmd_ablate(common, axis);
    if (dop->parsed()) return cmd_analyze_doppler(common);
    if (fl->parsed()) return cmd_flops(common);
    if (plot->parsed()) return cmd_plot(common, inputs);
    if (dump->parsed()) return cmd_dump_packets(common, scene, satellite, rate, dump_snr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const TrainingFailure& e) {
    std::cerr << "training failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
