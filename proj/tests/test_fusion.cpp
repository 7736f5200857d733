#include <gtest/gtest.h>

#include "jointlmr/errors.hpp"
#include "jointlmr/fusion.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numeric>

using namespace jointlmr;
using jointlmr::test::bitwise_equal;
using jointlmr::test::random_matrix;

namespace {

AttentionParams random_params(std::size_t size, std::uint64_t seed, double scale) {
  const DenseMatrix w = random_matrix(1, static_cast<Eigen::Index>(size) + 1, seed, scale);
  AttentionParams p;
  p.w.assign(w.data(), w.data() + size);
  p.b = w(0, static_cast<Eigen::Index>(size));
  return p;
}

// Plain-loop dot product with long double accumulation.
double reference_dot(const std::vector<double>& w, const DenseMatrix& m) {
  long double acc = 0.0L;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      acc += static_cast<long double>(w[static_cast<std::size_t>(r * m.cols() + c)]) * m(r, c);
    }
  }
  return static_cast<double>(acc);
}

double linear_loss(const DenseMatrix& l, const DenseMatrix& s_i, const DenseMatrix& s_t,
                   const AttentionParams& p, const DenseMatrix& upstream) {
  return upstream.cwiseProduct(fuse(l, s_i, s_t, p).r).sum();
}

}  // namespace

TEST(Score, ZeroWeightGivesBias) {
  const DenseMatrix m = random_matrix(3, 4, 1);
  AttentionParams p = AttentionParams::zeros(3, 4);
  p.b = 2.5;
  EXPECT_EQ(score(m, p), 2.5);
}

TEST(Score, OneHotWeightProjectsCoordinate) {
  const DenseMatrix m = random_matrix(3, 4, 2);
  const std::vector<double> flat = flatten(m);
  for (std::size_t k = 0; k < flat.size(); ++k) {
    AttentionParams p = AttentionParams::zeros(3, 4);
    p.w[k] = 1.0;
    EXPECT_EQ(score(m, p), flat[k]);
  }
}

TEST(Score, MatchesReferenceDot) {
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix m = random_matrix(9, 7, 100 + trial, 3.0);
    const AttentionParams p = random_params(63, 200 + trial, 1.0);
    EXPECT_NEAR(score(m, p), reference_dot(p.w, m) + p.b, 1e-12);
  }
}

TEST(Score, LengthMismatch) {
  AttentionParams p = AttentionParams::zeros(3, 3);
  EXPECT_THROW(score(DenseMatrix::Zero(3, 4), p), DimensionError);
}

TEST(AttentionWeights, EqualScoresAreUniform) {
  for (double c : {-50.0, 0.0, 3.7, 700.0}) {
    const Triple a = attention_weights(c, c, c);
    for (double w : a) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
  }
}

TEST(AttentionWeights, AnalyticCase) {
  const Triple a = attention_weights(std::log(2.0), 0.0, 0.0);
  EXPECT_NEAR(a[0], 0.5, 1e-15);
  EXPECT_NEAR(a[1], 0.25, 1e-15);
  EXPECT_NEAR(a[2], 0.25, 1e-15);
}

TEST(AttentionWeights, SimplexAndShiftInvariance) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dist(-30.0, 30.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double a = dist(rng), b = dist(rng), c = dist(rng), shift = 10 * dist(rng);
    const Triple w = attention_weights(a, b, c);
    const Triple ws = attention_weights(a + shift, b + shift, c + shift);
    EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-12);
    for (int k = 0; k < 3; ++k) {
      EXPECT_GT(w[k], 0.0);
      EXPECT_NEAR(w[k], ws[k], 1e-12);
    }
  }
}

TEST(AttentionWeights, RejectsNonFinite) {
  EXPECT_THROW(attention_weights(std::nan(""), 0, 0), ValidationError);
  EXPECT_THROW(attention_weights(0, INFINITY, 0), ValidationError);
}

TEST(Fuse, ZeroInitGivesUniformWeights) {
  const DenseMatrix l = random_matrix(4, 4, 1), si = random_matrix(4, 4, 2), st = random_matrix(4, 4, 3);
  const FusionResult f = fuse(l, si, st, AttentionParams::zeros(4, 4));
  for (double w : f.weights) EXPECT_EQ(w, 1.0 / 3.0);
}

TEST(Fuse, SaturatedScoreReturnsL) {
  const DenseMatrix l = random_matrix(5, 6, 11), si = random_matrix(5, 6, 12), st = random_matrix(5, 6, 13);
  // One-hot weight on an entry where L exceeds both sparse parts by enough
  // to push the score gap past 40.
  AttentionParams p = AttentionParams::zeros(5, 6);
  const std::vector<double> fl = flatten(l), fi = flatten(si), ft = flatten(st);
  std::size_t best = 0;
  for (std::size_t k = 1; k < fl.size(); ++k) {
    if (fl[k] - std::max(fi[k], ft[k]) > fl[best] - std::max(fi[best], ft[best])) best = k;
  }
  const double gap = fl[best] - std::max(fi[best], ft[best]);
  ASSERT_GT(gap, 0.0);
  p.w[best] = 45.0 / gap;

  const FusionResult f = fuse(l, si, st, p);
  ASSERT_GE(f.scores[0] - std::max(f.scores[1], f.scores[2]), 40.0);
  EXPECT_LE((f.r - l).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fuse, EqualComponentsReturnThem) {
  const DenseMatrix m = random_matrix(6, 3, 21);
  for (int trial = 0; trial < 5; ++trial) {
    const FusionResult f = fuse(m, m, m, random_params(18, 300 + trial, 2.0));
    EXPECT_LE((f.r - m).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Fuse, ResultRecomposesFromStoredWeights) {
  const DenseMatrix l = random_matrix(8, 8, 31), si = random_matrix(8, 8, 32), st = random_matrix(8, 8, 33);
  const FusionResult f = fuse(l, si, st, random_params(64, 34, 0.3));
  DenseMatrix again(8, 8);
  for (Eigen::Index k = 0; k < again.size(); ++k) {
    again.data()[k] = (f.weights[0] * l.data()[k] + f.weights[1] * si.data()[k]) +
                      f.weights[2] * st.data()[k];
  }
  EXPECT_TRUE(bitwise_equal(again, f.r));
  EXPECT_NEAR(f.weights[0] + f.weights[1] + f.weights[2], 1.0, 1e-12);
}

TEST(Fuse, ShapeMismatch) {
  const AttentionParams p = AttentionParams::zeros(3, 3);
  EXPECT_THROW(fuse(DenseMatrix::Zero(3, 3), DenseMatrix::Zero(3, 3), DenseMatrix::Zero(3, 2), p),
               DimensionError);
  EXPECT_THROW(fuse(DenseMatrix::Zero(3, 3), DenseMatrix::Zero(3, 3), DenseMatrix::Zero(3, 3),
                    AttentionParams::zeros(2, 2)),
               DimensionError);
}

TEST(Fuse, LinearInComponentsAtFixedWeights) {
  const Triple w{0.2, 0.5, 0.3};
  const DenseMatrix x[3] = {random_matrix(4, 5, 41), random_matrix(4, 5, 42), random_matrix(4, 5, 43)};
  const DenseMatrix y[3] = {random_matrix(4, 5, 44), random_matrix(4, 5, 45), random_matrix(4, 5, 46)};
  const double a = 1.7, b = -0.4;
  const DenseMatrix lhs = testing_hooks::combine_with_weights(
      a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2], w);
  const DenseMatrix rhs = a * testing_hooks::combine_with_weights(x[0], x[1], x[2], w) +
                          b * testing_hooks::combine_with_weights(y[0], y[1], y[2], w);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FusionGradients, ZeroUpstreamGivesZero) {
  const DenseMatrix l = random_matrix(4, 4, 51), si = random_matrix(4, 4, 52), st = random_matrix(4, 4, 53);
  const FusionGradients g = fusion_gradients(l, si, st, random_params(16, 54, 1.0), DenseMatrix::Zero(4, 4));
  for (double v : g.grad_w) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(g.grad_b, 0.0);
}

TEST(FusionGradients, EqualComponentsGiveZeroWeightGradient) {
  const DenseMatrix m = random_matrix(4, 4, 61);
  const FusionGradients g =
      fusion_gradients(m, m, m, random_params(16, 62, 1.0), random_matrix(4, 4, 63));
  for (double v : g.grad_w) EXPECT_NEAR(v, 0.0, 1e-14);
  EXPECT_NEAR(g.grad_b, 0.0, 1e-14);
}

TEST(FusionGradients, MatchCentralDifferences) {
  const double h = 1e-6;
  for (int trial = 0; trial < 12; ++trial) {
    const Eigen::Index n = 2 + trial % 15;  // up to 16x16
    const DenseMatrix l = random_matrix(n, n, 1000 + trial);
    const DenseMatrix si = random_matrix(n, n, 2000 + trial);
    const DenseMatrix st = random_matrix(n, n, 3000 + trial);
    const DenseMatrix up = random_matrix(n, n, 4000 + trial);
    const AttentionParams p = random_params(static_cast<std::size_t>(n * n), 5000 + trial, 0.5);
    const FusionGradients g = fusion_gradients(l, si, st, p, up);

    std::vector<double> fd(p.w.size() + 1), an(g.grad_w);
    an.push_back(g.grad_b);
    for (std::size_t k = 0; k <= p.w.size(); ++k) {
      AttentionParams plus = p, minus = p;
      if (k < p.w.size()) {
        plus.w[k] += h;
        minus.w[k] -= h;
      } else {
        plus.b += h;
        minus.b -= h;
      }
      fd[k] = (linear_loss(l, si, st, plus, up) - linear_loss(l, si, st, minus, up)) / (2 * h);
    }
    double diff = 0.0, nfd = 0.0, nan_ = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k) {
      diff += (fd[k] - an[k]) * (fd[k] - an[k]);
      nfd += fd[k] * fd[k];
      nan_ += an[k] * an[k];
    }
    EXPECT_LE(std::sqrt(diff) / std::max(std::sqrt(nfd), std::sqrt(nan_)), 1e-5) << "n=" << n;
    EXPECT_NEAR(g.grad_b, 0.0, 1e-12);
  }
}

TEST(FusionGradients, UpstreamShapeMismatch) {
  const DenseMatrix m = DenseMatrix::Zero(3, 3);
  EXPECT_THROW(fusion_gradients(m, m, m, AttentionParams::zeros(3, 3), DenseMatrix::Zero(3, 4)),
               DimensionError);
}
