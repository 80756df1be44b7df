#include "satsense/checkpoint.hpp"

#include <string>

#include "satsense/error.hpp"
#include "satsense/tensor_io.hpp"

namespace satsense {

using nlohmann::json;

void to_json(json& j, const CompressorDims& d) {
  j = json{{"input", d.input}, {"hidden", d.hidden}, {"embedding", d.embedding}, {"intermediate", d.intermediate}};
}

void from_json(const json& j, CompressorDims& d) {
  j.at("input").get_to(d.input);
  j.at("hidden").get_to(d.hidden);
  j.at("embedding").get_to(d.embedding);
  j.at("intermediate").get_to(d.intermediate);
}

void to_json(json& j, const GlssConfig& c) {
  j = json{{"input_dim", c.input_dim}, {"hidden", c.hidden},   {"gat1_out", c.gat1_out},
           {"gat2_out", c.gat2_out},   {"heads", c.heads},     {"num_bands", c.num_bands},
           {"combine", std::string(to_string(c.combine))}};
}

void from_json(const json& j, GlssConfig& c) {
  j.at("input_dim").get_to(c.input_dim);
  j.at("hidden").get_to(c.hidden);
  j.at("gat1_out").get_to(c.gat1_out);
  j.at("gat2_out").get_to(c.gat2_out);
  j.at("heads").get_to(c.heads);
  j.at("num_bands").get_to(c.num_bands);
  c.combine = parse_head_combine(j.at("combine").get<std::string>());
}

void to_json(json& j, const DcsConfig& c) {
  j = json{{"rows", c.rows},
           {"cols", c.cols},
           {"conv1_filters", c.conv1_filters},
           {"conv2_filters", c.conv2_filters},
           {"hidden", c.hidden},
           {"num_bands", c.num_bands}};
}

void from_json(const json& j, DcsConfig& c) {
  j.at("rows").get_to(c.rows);
  j.at("cols").get_to(c.cols);
  j.at("conv1_filters").get_to(c.conv1_filters);
  j.at("conv2_filters").get_to(c.conv2_filters);
  j.at("hidden").get_to(c.hidden);
  j.at("num_bands").get_to(c.num_bands);
}

void round_to_f32(std::span<const ParamView> params) {
  for (const ParamView& p : params) {
    for (std::size_t i = 0; i < p.size(); ++i) p.data[i] = static_cast<double>(static_cast<float>(p.data[i]));
  }
}

namespace {

void write_params(const std::filesystem::path& dir, std::span<const ParamView> params, json manifest) {
  std::filesystem::create_directories(dir);
  json shapes = json::object();
  for (const ParamView& p : params) {
    // Eigen storage is column-major; the container is row-major.
    std::vector<float> row_major(p.size());
    for (Eigen::Index r = 0; r < p.rows; ++r) {
      for (Eigen::Index c = 0; c < p.cols; ++c) {
        row_major[static_cast<std::size_t>(r * p.cols + c)] = static_cast<float>(p.data[c * p.rows + r]);
      }
    }
    write_f32(dir / (p.name + ".f32"), std::span<const float>(row_major));
    shapes[p.name] = {p.rows, p.cols};
  }
  manifest["parameters"] = shapes;
  write_json(dir / "manifest.json", manifest);
}

void read_params(const std::filesystem::path& dir, std::span<const ParamView> params, const json& manifest) {
  const json& shapes = manifest.at("parameters");
  if (shapes.size() != params.size()) throw ConfigError("checkpoint " + dir.string() + ": parameter count mismatch");
  for (const ParamView& p : params) {
    if (!shapes.contains(p.name)) throw ConfigError("checkpoint " + dir.string() + ": missing parameter " + p.name);
    const auto shape = shapes.at(p.name).get<std::vector<Eigen::Index>>();
    if (shape.size() != 2 || shape[0] != p.rows || shape[1] != p.cols) {
      throw ConfigError("checkpoint " + dir.string() + ": shape mismatch for " + p.name);
    }
    const std::filesystem::path file = dir / (p.name + ".f32");
    if (!std::filesystem::exists(file)) throw ConfigError("checkpoint file missing: " + file.string());
    const std::vector<float> values = read_f32(file);
    if (values.size() != p.size()) throw ConfigError("checkpoint " + file.string() + " has the wrong length");
    for (Eigen::Index r = 0; r < p.rows; ++r) {
      for (Eigen::Index c = 0; c < p.cols; ++c) p.data[c * p.rows + r] = values[static_cast<std::size_t>(r * p.cols + c)];
    }
  }
}

json base_manifest(std::string_view kind, const json& extra) {
  json m = extra.is_object() ? extra : json::object();
  m["kind"] = kind;
  return m;
}

}  // namespace

json read_manifest(const std::filesystem::path& dir) {
  const std::filesystem::path file = dir / "manifest.json";
  if (!std::filesystem::exists(file)) throw ConfigError("no checkpoint at " + dir.string());
  return read_json(file);
}

void save_checkpoint(const std::filesystem::path& dir, const Autoencoder& model, const json& extra) {
  Autoencoder copy = model;
  json m = base_manifest(to_string(model.kind), extra);
  m["dims"] = model.dims;
  write_params(dir, copy.parameters(), std::move(m));
}

void save_checkpoint(const std::filesystem::path& dir, const GlssModel& model, const json& extra) {
  GlssModel copy = model;
  json m = base_manifest("glss", extra);
  m["config"] = model.config;
  write_params(dir, copy.parameters(), std::move(m));
}

void save_checkpoint(const std::filesystem::path& dir, const DcsModel& model, const json& extra) {
  DcsModel copy = model;
  json m = base_manifest("dcs", extra);
  m["config"] = model.config;
  write_params(dir, copy.parameters(), std::move(m));
}

Autoencoder load_autoencoder(const std::filesystem::path& dir) {
  const json m = read_manifest(dir);
  try {
    const CompressorKind kind = parse_compressor_kind(m.at("kind").get<std::string>());
    Autoencoder model = make_autoencoder(m.at("dims").get<CompressorDims>(), 0, kind);
    read_params(dir, model.parameters(), m);
    return model;
  } catch (const json::exception& e) {
    throw ConfigError("bad checkpoint manifest in " + dir.string() + ": " + e.what());
  }
}

GlssModel load_glss(const std::filesystem::path& dir) {
  const json m = read_manifest(dir);
  try {
    if (m.at("kind") != "glss") throw ConfigError(dir.string() + " is not a GLSS checkpoint");
    GlssModel model = make_glss(m.at("config").get<GlssConfig>(), 0);
    read_params(dir, model.parameters(), m);
    return model;
  } catch (const json::exception& e) {
    throw ConfigError("bad checkpoint manifest in " + dir.string() + ": " + e.what());
  }
}

DcsModel load_dcs(const std::filesystem::path& dir) {
  const json m = read_manifest(dir);
  try {
    if (m.at("kind") != "dcs") throw ConfigError(dir.string() + " is not a DCS checkpoint");
    DcsModel model = make_dcs(m.at("config").get<DcsConfig>(), 0);
    read_params(dir, model.parameters(), m);
    return model;
  } catch (const json::exception& e) {
    throw ConfigError("bad checkpoint manifest in " + dir.string() + ": " + e.what());
  }
}

}  // namespace satsense
