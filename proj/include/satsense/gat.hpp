#pragma once

// Multi-head graph attention layer over a fully connected graph with
// self-loops. Node features are rows of a (nodes x dim) matrix.
//
// For head t:
//   g_i     = W_t h_i
//   e_ij    = a_src . g_i + a_dst . g_j          (a applied to [g_i || g_j])
//   alpha_ij = softmax_j(LeakyReLU(e_ij))       over all j, including i
//   out_i   = Elu(sum_j alpha_ij g_j)
// Heads are concatenated (default) or averaged before the Elu.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "satsense/optim.hpp"

namespace satsense {

enum class HeadCombine { concat, mean };

std::string_view to_string(HeadCombine c);
HeadCombine parse_head_combine(std::string_view name);

inline constexpr double kAttentionSlope = 0.2;

struct GatLayerParams {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t heads = 1;
  double leaky_slope = kAttentionSlope;
  HeadCombine combine = HeadCombine::concat;
  std::vector<Matrix> weight;    // per head, out_dim x in_dim
  std::vector<Vector> attn_src;  // per head, length out_dim
  std::vector<Vector> attn_dst;  // per head, length out_dim

  std::size_t output_dim() const { return combine == HeadCombine::concat ? out_dim * heads : out_dim; }
  void validate() const;
  void append_parameters(const std::string& prefix, std::vector<ParamView>& out);
};

GatLayerParams make_gat_layer(std::size_t in_dim, std::size_t out_dim, std::size_t heads, HeadCombine combine,
                              std::uint64_t seed);

double leaky_relu(double x, double slope);
double elu(double x);

/// Row-stochastic attention matrix (nodes x nodes) of one head.
Matrix attention_coefficients(const Matrix& h, const GatLayerParams& layer, std::size_t head);

Matrix gat_layer_forward(const Matrix& h, const GatLayerParams& layer);

struct GatHeadCache {
  Matrix g;       // nodes x out_dim
  Matrix scores;  // e_ij before LeakyReLU
  Matrix alpha;
  Matrix agg;     // alpha * g (pre-activation, per head)
};

struct GatCache {
  Matrix input;
  std::vector<GatHeadCache> heads;
  Matrix pre;  // pre-activation of the combined output
};

Matrix gat_forward_cached(const Matrix& h, const GatLayerParams& layer, GatCache& cache);

/// Accumulates parameter gradients into `grads` and returns d(loss)/d(input).
Matrix gat_backward(const Matrix& d_out, const GatLayerParams& layer, const GatCache& cache, GatLayerParams& grads);

}  // namespace satsense
