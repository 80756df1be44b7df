#pragma once

// Binary tensor container: a flat file of little-endian IEEE-754 float32
// values in row-major order, with no header. Shapes and all other metadata
// live in a JSON sidecar written next to it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"

namespace satsense {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
};

void encode_f32_le(float value, std::uint8_t* out) noexcept;
float decode_f32_le(const std::uint8_t* in) noexcept;

void write_f32(const std::filesystem::path& path, std::span<const float> values);
void write_f32(const std::filesystem::path& path, std::span<const double> values);
std::vector<float> read_f32(const std::filesystem::path& path);

/// Writes `name.f32` holding the data; the caller records `shape` in its sidecar.
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path, std::vector<std::size_t> shape);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace satsense
