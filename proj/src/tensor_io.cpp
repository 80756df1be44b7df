#include "satsense/tensor_io.hpp"

#include <bit>
#include <fstream>
#include <functional>
#include <numeric>

#include "satsense/error.hpp"

namespace satsense {

std::size_t Tensor::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void encode_f32_le(float value, std::uint8_t* out) noexcept {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  out[0] = static_cast<std::uint8_t>(bits);
  out[1] = static_cast<std::uint8_t>(bits >> 8);
  out[2] = static_cast<std::uint8_t>(bits >> 16);
  out[3] = static_cast<std::uint8_t>(bits >> 24);
}

float decode_f32_le(const std::uint8_t* in) noexcept {
  const std::uint32_t bits = static_cast<std::uint32_t>(in[0]) |
                             (static_cast<std::uint32_t>(in[1]) << 8) |
                             (static_cast<std::uint32_t>(in[2]) << 16) |
                             (static_cast<std::uint32_t>(in[3]) << 24);
  return std::bit_cast<float>(bits);
}

void write_f32(const std::filesystem::path& path, std::span<const float> values) {
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) encode_f32_le(values[i], &bytes[4 * i]);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

void write_f32(const std::filesystem::path& path, std::span<const double> values) {
  std::vector<float> narrowed(values.begin(), values.end());
  write_f32(path, std::span<const float>(narrowed));
}

std::vector<float> read_f32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) throw CorruptStream("tensor file size not a multiple of 4: " + path.string());
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = decode_f32_le(&bytes[4 * i]);
  return values;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  if (t.element_count() != t.data.size()) throw InvalidArgument("tensor shape does not match data length");
  write_f32(path, std::span<const float>(t.data));
}

Tensor load_tensor(const std::filesystem::path& path, std::vector<std::size_t> shape) {
  Tensor t{std::move(shape), read_f32(path)};
  if (t.element_count() != t.data.size()) {
    throw CorruptStream("tensor " + path.string() + " holds " + std::to_string(t.data.size()) +
                        " values, expected " + std::to_string(t.element_count()));
  }
  return t;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace satsense
