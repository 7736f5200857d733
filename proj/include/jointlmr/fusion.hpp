#pragma once

#include "jointlmr/matrix.hpp"

#include <array>
#include <vector>

namespace jointlmr {

/// Scoring layer shared by all three components: s = w . vec(M) + b.
struct AttentionParams {
  std::vector<double> w;
  double b = 0.0;

  /// Untrained default: w = 0, b = 0, which yields uniform weights.
  static AttentionParams zeros(std::size_t rows, std::size_t cols);
};

/// Ordered (L, S_I, S_T).
using Triple = std::array<double, 3>;

struct FusionResult {
  Triple scores{};   // s_L, s_I, s_T
  Triple weights{};  // alpha_L, alpha_I, alpha_T
  DenseMatrix r;     // alpha_L L + alpha_I S_I + alpha_T S_T
};

struct FusionGradients {
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

double score(const DenseMatrix& m, const AttentionParams& p);

/// Max-shifted softmax over the three scores. Rejects non-finite input.
Triple attention_weights(double s_l, double s_i, double s_t);

FusionResult fuse(const DenseMatrix& l, const DenseMatrix& s_i,
                  const DenseMatrix& s_t, const AttentionParams& p);

/// Gradient of a scalar loss w.r.t. (w, b) given upstream = dloss/dR, with
/// L, S_I, S_T held constant. grad_b is zero up to rounding: a shared bias
/// shifts all three scores equally and softmax ignores common shifts.
FusionGradients fusion_gradients(const DenseMatrix& l, const DenseMatrix& s_i,
                                 const DenseMatrix& s_t, const AttentionParams& p,
                                 const DenseMatrix& upstream);

namespace testing_hooks {

/// Aggregates with caller-chosen weights, skipping the scoring layer.
/// Not part of the stable API; exists for linearity tests.
DenseMatrix combine_with_weights(const DenseMatrix& l, const DenseMatrix& s_i,
                                 const DenseMatrix& s_t, const Triple& weights);

}  // namespace testing_hooks

}  // namespace jointlmr
