#pragma once

// Model checkpoints: a directory holding one `<param>.f32` tensor file per
// parameter and a `manifest.json` with dims, shapes, schedule and history.

#include <filesystem>
#include <span>

#include "json.hpp"
#include "satsense/compressor.hpp"
#include "satsense/dcs.hpp"
#include "satsense/glss.hpp"

namespace satsense {

void to_json(nlohmann::json& j, const CompressorDims& d);
void from_json(const nlohmann::json& j, CompressorDims& d);
void to_json(nlohmann::json& j, const GlssConfig& c);
void from_json(const nlohmann::json& j, GlssConfig& c);
void to_json(nlohmann::json& j, const DcsConfig& c);
void from_json(const nlohmann::json& j, DcsConfig& c);

/// Rounds every parameter to float32 precision, the precision they are stored
/// at, so that a model behaves the same before and after a save/load cycle.
void round_to_f32(std::span<const ParamView> params);

/// `extra` is merged into the manifest (schedule, history, seeds...).
void save_checkpoint(const std::filesystem::path& dir, const Autoencoder& model, const nlohmann::json& extra = {});
void save_checkpoint(const std::filesystem::path& dir, const GlssModel& model, const nlohmann::json& extra = {});
void save_checkpoint(const std::filesystem::path& dir, const DcsModel& model, const nlohmann::json& extra = {});

// Missing or inconsistent checkpoints raise ConfigError.
Autoencoder load_autoencoder(const std::filesystem::path& dir);
GlssModel load_glss(const std::filesystem::path& dir);
DcsModel load_dcs(const std::filesystem::path& dir);

nlohmann::json read_manifest(const std::filesystem::path& dir);

}  // namespace satsense
