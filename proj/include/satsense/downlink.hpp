#pragma once

// Transport-stream style packetization of embeddings and a Bernoulli packet
// erasure channel.
//
// Packet layout (188 bytes):
//   byte 0      sync byte 0x47
//   byte 1      bits 7..5 reserved (0), bits 4..0 sequence id bits 12..8
//   byte 2      sequence id bits 7..0
//   byte 3      reserved (0)
//   bytes 4..   184-byte payload: embedding as little-endian float32,
//               last payload zero padded

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "satsense/embedding.hpp"

namespace satsense {

inline constexpr std::size_t kPacketSize = 188;
inline constexpr std::size_t kHeaderSize = 4;
inline constexpr std::size_t kPayloadSize = kPacketSize - kHeaderSize;
inline constexpr std::size_t kFloatsPerPayload = kPayloadSize / 4;
inline constexpr std::uint8_t kSyncByte = 0x47;
inline constexpr std::size_t kMaxPackets = std::size_t{1} << 13;

struct TsPacket {
  std::array<std::uint8_t, kPacketSize> bytes{};

  static TsPacket with_sequence(std::uint16_t sequence);

  bool has_sync() const { return bytes[0] == kSyncByte; }
  std::uint16_t sequence() const;
  std::span<std::uint8_t, kPayloadSize> payload() { return std::span<std::uint8_t, kPayloadSize>(bytes.data() + kHeaderSize, kPayloadSize); }
  std::span<const std::uint8_t, kPayloadSize> payload() const {
    return std::span<const std::uint8_t, kPayloadSize>(bytes.data() + kHeaderSize, kPayloadSize);
  }
};

struct PacketStream {
  std::vector<TsPacket> packets;
  std::vector<std::uint8_t> dropped;
  std::size_t payload_len = 0;

  std::size_t dropped_count() const;
};

struct LossChannelConfig {
  double rate = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

std::size_t packet_count_for(std::size_t embedding_dim);

PacketStream packetize(const Embedding& z);

/// Marks each packet dropped with probability `rate` and erases its payload.
PacketStream drop_packets(PacketStream stream, const LossChannelConfig& cfg);

/// Reassembles by sequence id, zero-filling lost payload bytes.
Embedding depacketize(const PacketStream& stream, std::size_t dim);

/// packetize -> drop_packets -> depacketize.
Embedding transmit(const Embedding& z, const LossChannelConfig& cfg);

std::string hex_dump(const PacketStream& stream);

}  // namespace satsense
