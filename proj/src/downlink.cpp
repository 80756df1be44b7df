#include "satsense/downlink.hpp"

#include <algorithm>
#include <cstdio>

#include "satsense/error.hpp"
#include "satsense/rng.hpp"
#include "satsense/tensor_io.hpp"

namespace satsense {

TsPacket TsPacket::with_sequence(std::uint16_t sequence) {
  TsPacket p;
  p.bytes[0] = kSyncByte;
  p.bytes[1] = static_cast<std::uint8_t>((sequence >> 8) & 0x1F);
  p.bytes[2] = static_cast<std::uint8_t>(sequence & 0xFF);
  p.bytes[3] = 0;
  return p;
}

std::uint16_t TsPacket::sequence() const {
  return static_cast<std::uint16_t>(((bytes[1] & 0x1F) << 8) | bytes[2]);
}

std::size_t PacketStream::dropped_count() const {
  return static_cast<std::size_t>(std::count(dropped.begin(), dropped.end(), std::uint8_t{1}));
}

void LossChannelConfig::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("loss rate must lie in [0, 1]");
}

std::size_t packet_count_for(std::size_t embedding_dim) {
  return (embedding_dim * 4 + kPayloadSize - 1) / kPayloadSize;
}

PacketStream packetize(const Embedding& z) {
  if (z.corrupted) throw InvalidArgument("cannot packetize a corrupted embedding");
  const std::size_t count = packet_count_for(z.size());
  if (count > kMaxPackets) throw InvalidArgument("embedding too large for 13-bit sequence ids");

  std::vector<std::uint8_t> serial(count * kPayloadSize, 0);
  for (std::size_t i = 0; i < z.size(); ++i) encode_f32_le(z.values[i], &serial[4 * i]);

  PacketStream stream;
  stream.payload_len = z.size() * 4;
  stream.packets.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    TsPacket packet = TsPacket::with_sequence(static_cast<std::uint16_t>(p));
    std::copy_n(serial.begin() + static_cast<std::ptrdiff_t>(p * kPayloadSize), kPayloadSize,
                packet.payload().begin());
    stream.packets.push_back(packet);
  }
  stream.dropped.assign(count, 0);
  return stream;
}

PacketStream drop_packets(PacketStream stream, const LossChannelConfig& cfg) {
  cfg.validate();
  if (stream.dropped.size() != stream.packets.size()) throw InvalidArgument("drop flags out of sync with packets");
  if (stream.dropped_count() != 0) throw InvalidArgument("stream already has dropped packets");
  Rng rng(cfg.seed);
  for (std::size_t p = 0; p < stream.packets.size(); ++p) {
    if (rng.bernoulli(cfg.rate)) {
      stream.dropped[p] = 1;
      auto payload = stream.packets[p].payload();
      std::fill(payload.begin(), payload.end(), std::uint8_t{0});
    }
  }
  return stream;
}

Embedding depacketize(const PacketStream& stream, std::size_t dim) {
  const std::size_t count = stream.packets.size();
  if (stream.dropped.size() != count) throw InvalidArgument("drop flags out of sync with packets");
  if (stream.payload_len != dim * 4) throw InvalidArgument("embedding dimension does not match stream payload");
  if (stream.payload_len > count * kPayloadSize) throw CorruptStream("payload length exceeds packet capacity");

  std::vector<std::uint8_t> serial(count * kPayloadSize, 0);
  std::vector<std::uint8_t> lost(count, 0);
  std::vector<std::uint8_t> seen(count, 0);
  for (std::size_t p = 0; p < count; ++p) {
    const TsPacket& packet = stream.packets[p];
    if (!packet.has_sync()) throw CorruptStream("bad sync byte in packet " + std::to_string(p));
    const std::size_t seq = packet.sequence();
    if (seq >= count || seen[seq]) throw CorruptStream("inconsistent sequence id " + std::to_string(seq));
    seen[seq] = 1;
    if (stream.dropped[p]) {
      lost[seq] = 1;
      continue;
    }
    std::copy(packet.payload().begin(), packet.payload().end(),
              serial.begin() + static_cast<std::ptrdiff_t>(seq * kPayloadSize));
  }

  Embedding z;
  z.values.resize(dim);
  z.loss_mask.assign(dim, 0);
  for (std::size_t i = 0; i < dim; ++i) {
    // kPayloadSize is a multiple of 4, so every float lives in one packet.
    const std::size_t packet = (4 * i) / kPayloadSize;
    if (lost[packet]) {
      z.values[i] = 0.0f;
      z.loss_mask[i] = 1;
      z.corrupted = true;
    } else {
      z.values[i] = decode_f32_le(&serial[4 * i]);
    }
  }
  if (!z.corrupted) z.loss_mask.clear();
  return z;
}

Embedding transmit(const Embedding& z, const LossChannelConfig& cfg) {
  return depacketize(drop_packets(packetize(z), cfg), z.size());
}

std::string hex_dump(const PacketStream& stream) {
  std::string out;
  char buf[8];
  for (std::size_t p = 0; p < stream.packets.size(); ++p) {
    const TsPacket& packet = stream.packets[p];
    std::snprintf(buf, sizeof buf, "%04u", static_cast<unsigned>(packet.sequence()));
    out += "packet ";
    out += buf;
    out += stream.dropped[p] ? " DROPPED\n" : "\n";
    for (std::size_t b = 0; b < kPacketSize; ++b) {
      std::snprintf(buf, sizeof buf, "%02x", packet.bytes[b]);
      out += buf;
      out += (b % 16 == 15 || b + 1 == kPacketSize) ? '\n' : ' ';
    }
  }
  return out;
}

}  // namespace satsense
