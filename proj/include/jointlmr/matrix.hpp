#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace jointlmr {

/// Row-major dense matrix of doubles. Carries every matrix the solvers touch.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thin SVD a = u * diag(sigma) * vt with k = min(rows, cols).
/// sigma is sorted non-increasing. Only the product and sigma are
/// meaningful under repeated singular values; the factors are not unique.
struct SvdResult {
  DenseMatrix u;             // m x k
  Eigen::VectorXd sigma;     // k
  DenseMatrix vt;            // k x n
};

std::string shape_string(const DenseMatrix& a);

/// Throws DimensionError naming both shapes unless a and b agree.
void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                        const char* context);

bool all_finite(const DenseMatrix& a);

double frobenius_norm(const DenseMatrix& a);

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scale(const DenseMatrix& a, double factor);

/// Row-major vec(a).
std::vector<double> flatten(const DenseMatrix& a);

/// Inverse of flatten for the given shape.
DenseMatrix reshape(std::span<const double> values, std::size_t rows,
                    std::size_t cols);

/// Entry-wise sign(x) * max(|x| - tau, 0). Rejects tau < 0.
DenseMatrix soft_threshold(const DenseMatrix& a, double tau);

/// Throws NumericalError (with a's shape) if the decomposition fails.
SvdResult svd(const DenseMatrix& a);

/// u * max(sigma - tau, 0) * vt. Rejects tau < 0.
DenseMatrix svt(const DenseMatrix& a, double tau);

}  // namespace jointlmr
