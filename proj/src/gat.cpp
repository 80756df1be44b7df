#include "satsense/gat.hpp"

#include <algorithm>
#include <cmath>

#include "satsense/error.hpp"
#include "satsense/rng.hpp"

namespace satsense {

std::string_view to_string(HeadCombine c) { return c == HeadCombine::concat ? "concat" : "mean"; }

HeadCombine parse_head_combine(std::string_view name) {
  if (name == "concat") return HeadCombine::concat;
  if (name == "mean") return HeadCombine::mean;
  throw InvalidArgument("unknown head combination: " + std::string(name));
}

double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

void GatLayerParams::validate() const {
  if (heads == 0) throw InvalidArgument("GAT layer needs at least one head");
  if (weight.size() != heads || attn_src.size() != heads || attn_dst.size() != heads) {
    throw InvalidArgument("GAT per-head parameter count mismatch");
  }
  for (std::size_t t = 0; t < heads; ++t) {
    if (weight[t].rows() != static_cast<Eigen::Index>(out_dim) || weight[t].cols() != static_cast<Eigen::Index>(in_dim) ||
        attn_src[t].size() != static_cast<Eigen::Index>(out_dim) || attn_dst[t].size() != static_cast<Eigen::Index>(out_dim)) {
      throw InvalidArgument("GAT head parameter dimensions inconsistent");
    }
  }
}

void GatLayerParams::append_parameters(const std::string& prefix, std::vector<ParamView>& out) {
  for (std::size_t t = 0; t < heads; ++t) {
    const std::string head = prefix + "_h" + std::to_string(t);
    out.push_back(view_of(head + "_w", weight[t]));
    out.push_back(view_of(head + "_asrc", attn_src[t]));
    out.push_back(view_of(head + "_adst", attn_dst[t]));
  }
}

GatLayerParams make_gat_layer(std::size_t in_dim, std::size_t out_dim, std::size_t heads, HeadCombine combine,
                              std::uint64_t seed) {
  if (in_dim == 0 || out_dim == 0 || heads == 0) throw InvalidArgument("GAT dimensions must be positive");
  GatLayerParams layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.heads = heads;
  layer.combine = combine;
  for (std::size_t t = 0; t < heads; ++t) {
    Matrix w(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim));
    fan_in_uniform(w, in_dim, derive_seed(seed, t, 1));
    Matrix a(static_cast<Eigen::Index>(2 * out_dim), 1);
    fan_in_uniform(a, 2 * out_dim, derive_seed(seed, t, 2));
    layer.weight.push_back(std::move(w));
    layer.attn_src.push_back(a.topRows(static_cast<Eigen::Index>(out_dim)));
    layer.attn_dst.push_back(a.bottomRows(static_cast<Eigen::Index>(out_dim)));
  }
  return layer;
}

namespace {

void check_input(const Matrix& h, const GatLayerParams& layer) {
  layer.validate();
  if (h.cols() != static_cast<Eigen::Index>(layer.in_dim)) throw InvalidArgument("GAT input dimension mismatch");
  if (h.rows() == 0) throw InvalidArgument("GAT input has no nodes");
}

// Fills g, scores, alpha for one head.
void attend(const Matrix& h, const GatLayerParams& layer, std::size_t t, GatHeadCache& c) {
  c.g.noalias() = h * layer.weight[t].transpose();
  const Vector s = c.g * layer.attn_src[t];
  const Vector d = c.g * layer.attn_dst[t];
  const Eigen::Index n = h.rows();
  c.scores.resize(n, n);
  c.alpha.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_max = -INFINITY;
    for (Eigen::Index j = 0; j < n; ++j) {
      c.scores(i, j) = s(i) + d(j);
      c.alpha(i, j) = leaky_relu(c.scores(i, j), layer.leaky_slope);
      row_max = std::max(row_max, c.alpha(i, j));
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      c.alpha(i, j) = std::exp(c.alpha(i, j) - row_max);
      total += c.alpha(i, j);
    }
    c.alpha.row(i) /= total;
  }
}

Matrix elu_matrix(const Matrix& m) { return m.unaryExpr([](double x) { return elu(x); }); }

}  // namespace

Matrix attention_coefficients(const Matrix& h, const GatLayerParams& layer, std::size_t head) {
  check_input(h, layer);
  if (head >= layer.heads) throw InvalidArgument("head index out of range");
  GatHeadCache c;
  attend(h, layer, head, c);
  return c.alpha;
}

Matrix gat_forward_cached(const Matrix& h, const GatLayerParams& layer, GatCache& cache) {
  check_input(h, layer);
  const Eigen::Index n = h.rows();
  const auto out = static_cast<Eigen::Index>(layer.out_dim);
  cache.input = h;
  cache.heads.resize(layer.heads);
  cache.pre = Matrix::Zero(n, static_cast<Eigen::Index>(layer.output_dim()));
  for (std::size_t t = 0; t < layer.heads; ++t) {
    GatHeadCache& c = cache.heads[t];
    attend(h, layer, t, c);
    c.agg.noalias() = c.alpha * c.g;
    if (layer.combine == HeadCombine::concat) {
      cache.pre.middleCols(static_cast<Eigen::Index>(t) * out, out) = c.agg;
    } else {
      cache.pre += c.agg / static_cast<double>(layer.heads);
    }
  }
  return elu_matrix(cache.pre);
}

Matrix gat_layer_forward(const Matrix& h, const GatLayerParams& layer) {
  GatCache cache;
  return gat_forward_cached(h, layer, cache);
}

Matrix gat_backward(const Matrix& d_out, const GatLayerParams& layer, const GatCache& cache, GatLayerParams& grads) {
  const Matrix& h = cache.input;
  const auto out = static_cast<Eigen::Index>(layer.out_dim);
  if (d_out.rows() != h.rows() || d_out.cols() != cache.pre.cols()) throw InvalidArgument("GAT gradient shape mismatch");

  // Elu'(x) = 1 for x > 0, exp(x) otherwise.
  const Matrix d_pre = (cache.pre.array() > 0.0).select(d_out, d_out.cwiseProduct(cache.pre.unaryExpr([](double x) { return std::exp(std::min(x, 0.0)); })));
  Matrix d_h = Matrix::Zero(h.rows(), h.cols());

  for (std::size_t t = 0; t < layer.heads; ++t) {
    const GatHeadCache& c = cache.heads[t];
    const Matrix d_agg = layer.combine == HeadCombine::concat
                             ? Matrix(d_pre.middleCols(static_cast<Eigen::Index>(t) * out, out))
                             : Matrix(d_pre / static_cast<double>(layer.heads));

    const Matrix d_alpha = d_agg * c.g.transpose();
    Matrix d_g = c.alpha.transpose() * d_agg;

    // Softmax rows, then LeakyReLU.
    const Vector row_dot = (c.alpha.cwiseProduct(d_alpha)).rowwise().sum();
    Matrix d_scores = c.alpha.cwiseProduct(d_alpha.colwise() - row_dot);
    d_scores = (c.scores.array() > 0.0).select(d_scores, layer.leaky_slope * d_scores);

    const Vector d_s = d_scores.rowwise().sum();
    const Vector d_d = d_scores.colwise().sum().transpose();
    d_g += d_s * layer.attn_src[t].transpose() + d_d * layer.attn_dst[t].transpose();
    grads.attn_src[t] += c.g.transpose() * d_s;
    grads.attn_dst[t] += c.g.transpose() * d_d;

    grads.weight[t].noalias() += d_g.transpose() * h;
    d_h.noalias() += d_g * layer.weight[t];
  }
  return d_h;
}

}  // namespace satsense
