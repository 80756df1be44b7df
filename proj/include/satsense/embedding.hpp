#pragma once

#include <cstdint>
#include <vector>

namespace satsense {

/// Compressed representation of one observation as it crosses the downlink.
/// Values are float32 because that is what goes on the wire. When
/// `corrupted` is set, loss_mask[i] == 1 marks element i as lost and
/// values[i] is then exactly zero.
struct Embedding {
  std::vector<float> values;
  bool corrupted = false;
  std::vector<std::uint8_t> loss_mask;

  std::size_t size() const { return values.size(); }
};

}  // namespace satsense
