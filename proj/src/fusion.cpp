#include "jointlmr/fusion.hpp"

#include "jointlmr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jointlmr {

AttentionParams AttentionParams::zeros(std::size_t rows, std::size_t cols) {
  return {std::vector<double>(rows * cols, 0.0), 0.0};
}

namespace {

void require_param_size(const DenseMatrix& m, const AttentionParams& p) {
  if (p.w.size() != static_cast<std::size_t>(m.size())) {
    throw DimensionError("attention weight vector has length " +
                         std::to_string(p.w.size()) + " but the matrix " +
                         shape_string(m) + " flattens to " +
                         std::to_string(m.size()));
  }
}

double dot_flat(const DenseMatrix& m, const std::vector<double>& w) {
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::Map<const Eigen::VectorXd> mv(m.data(), m.size());
  return wv.dot(mv);
}

void require_components(const DenseMatrix& l, const DenseMatrix& s_i,
                        const DenseMatrix& s_t) {
  require_same_shape(l, s_i, "fuse L vs S_I");
  require_same_shape(l, s_t, "fuse L vs S_T");
}

}  // namespace

double score(const DenseMatrix& m, const AttentionParams& p) {
  require_param_size(m, p);
  return dot_flat(m, p.w) + p.b;
}

Triple attention_weights(double s_l, double s_i, double s_t) {
  if (!std::isfinite(s_l) || !std::isfinite(s_i) || !std::isfinite(s_t)) {
    throw ValidationError("attention_weights: scores must be finite");
  }
  const double top = std::max({s_l, s_i, s_t});
  const Triple e{std::exp(s_l - top), std::exp(s_i - top), std::exp(s_t - top)};
  const double total = e[0] + e[1] + e[2];
  return {e[0] / total, e[1] / total, e[2] / total};
}

namespace testing_hooks {

DenseMatrix combine_with_weights(const DenseMatrix& l, const DenseMatrix& s_i,
                                 const DenseMatrix& s_t, const Triple& weights) {
  require_components(l, s_i, s_t);
  return (weights[0] * l + weights[1] * s_i) + weights[2] * s_t;
}

}  // namespace testing_hooks

FusionResult fuse(const DenseMatrix& l, const DenseMatrix& s_i,
                  const DenseMatrix& s_t, const AttentionParams& p) {
  require_components(l, s_i, s_t);
  require_param_size(l, p);

  FusionResult out;
  out.scores = {score(l, p), score(s_i, p), score(s_t, p)};
  out.weights = attention_weights(out.scores[0], out.scores[1], out.scores[2]);
  out.r = testing_hooks::combine_with_weights(l, s_i, s_t, out.weights);
  return out;
}

FusionGradients fusion_gradients(const DenseMatrix& l, const DenseMatrix& s_i,
                                 const DenseMatrix& s_t, const AttentionParams& p,
                                 const DenseMatrix& upstream) {
  require_components(l, s_i, s_t);
  require_param_size(l, p);
  require_same_shape(upstream, l, "fusion_gradients upstream");

  const std::array<const DenseMatrix*, 3> parts{&l, &s_i, &s_t};
  const Triple scores{score(l, p), score(s_i, p), score(s_t, p)};
  const Triple alpha = attention_weights(scores[0], scores[1], scores[2]);

  // dloss/dalpha_k = <upstream, C_k>
  Triple d{};
  for (std::size_t k = 0; k < 3; ++k) d[k] = upstream.cwiseProduct(*parts[k]).sum();
  const double mean_d = alpha[0] * d[0] + alpha[1] * d[1] + alpha[2] * d[2];

  // softmax Jacobian: dloss/ds_j = alpha_j (d_j - sum_k alpha_k d_k)
  Triple ds{};
  for (std::size_t j = 0; j < 3; ++j) ds[j] = alpha[j] * (d[j] - mean_d);

  FusionGradients g;
  Eigen::VectorXd gw = ds[0] * Eigen::Map<const Eigen::VectorXd>(l.data(), l.size()) +
                       ds[1] * Eigen::Map<const Eigen::VectorXd>(s_i.data(), s_i.size()) +
                       ds[2] * Eigen::Map<const Eigen::VectorXd>(s_t.data(), s_t.size());
  g.grad_w.assign(gw.data(), gw.data() + gw.size());
  g.grad_b = ds[0] + ds[1] + ds[2];
  return g;
}

}  // namespace jointlmr
