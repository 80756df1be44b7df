#include "satsense/flops.hpp"

#include <string>

#include "satsense/error.hpp"

namespace satsense {

namespace {

std::uint64_t gat_macs(const GatLayerParams& l, std::uint64_t k) {
  const std::uint64_t in = l.in_dim, out = l.out_dim;
  const std::uint64_t per_head = k * in * out + 2 * k * out + k * k + k * k * out;
  return per_head * l.heads;
}

}  // namespace

FlopsBreakdown glss_flops(const GlssConfig& cfg, std::size_t nodes) {
  cfg.validate();
  if (nodes == 0) throw InvalidArgument("flops: need at least one node");
  const std::uint64_t k = nodes;
  GatLayerParams g1;
  g1.in_dim = cfg.hidden;
  g1.out_dim = cfg.gat1_out;
  g1.heads = cfg.heads;
  g1.combine = cfg.combine;
  GatLayerParams g2;
  g2.in_dim = g1.output_dim();
  g2.out_dim = cfg.gat2_out;
  g2.heads = cfg.heads;
  g2.combine = cfg.combine;

  FlopsBreakdown f;
  f.dense1 = 2 * k * cfg.input_dim * cfg.hidden;
  f.gat1 = 2 * gat_macs(g1, k);
  f.gat2 = 2 * gat_macs(g2, k);
  f.pool = 2 * k * g2.output_dim();
  f.dense2 = 2 * static_cast<std::uint64_t>(g2.output_dim()) * cfg.num_bands;
  return f;
}

ResultsTable flops_report(const GlssConfig& cfg, std::initializer_list<std::size_t> nodes, std::uint64_t seed) {
  ResultsTable t;
  for (std::size_t k : nodes) {
    t.append(ResultRow{"glss[K=" + std::to_string(k) + "]", std::nullopt, std::nullopt, "", "mflops",
                       static_cast<double>(glss_flops(cfg, k).total()) / 1e6, seed});
  }
  t.append(ResultRow{"reference[K=10]", std::nullopt, std::nullopt, "", "mflops", kReferenceMflopsK10, seed});
  return t;
}

}  // namespace satsense
