#pragma once

// Analytic floating point operation count of one GLSS forward pass:
// twice the multiply-accumulate count of each layer.

#include <cstddef>
#include <cstdint>

#include "satsense/glss.hpp"
#include "satsense/results.hpp"

namespace satsense {

struct FlopsBreakdown {
  std::uint64_t dense1 = 0;
  std::uint64_t gat1 = 0;
  std::uint64_t gat2 = 0;
  std::uint64_t pool = 0;
  std::uint64_t dense2 = 0;

  std::uint64_t total() const { return dense1 + gat1 + gat2 + pool + dense2; }
};

/// MACs counted per layer for K nodes:
///   dense:  K * in * out
///   GAT, per head: K*in*out (projection) + 2*K*out (attention halves)
///                  + K*K (pairwise scores) + K*K*out (aggregation)
///   mean pool: K * dim
FlopsBreakdown glss_flops(const GlssConfig& cfg, std::size_t nodes);

/// Published count for K = 10, listed next to ours for comparison only.
inline constexpr double kReferenceMflopsK10 = 220.61;

/// Rows "glss[K=k]" / flops_m for each K in `nodes`, plus the reference row.
ResultsTable flops_report(const GlssConfig& cfg, std::initializer_list<std::size_t> nodes, std::uint64_t seed);

}  // namespace satsense
