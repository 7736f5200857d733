#include "jointlmr/matrix.hpp"

#include "jointlmr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jointlmr {

NumericalError::NumericalError(std::size_t rows, std::size_t cols,
                               const std::string& what,
                               std::optional<int> iteration)
    : Error([&] {
        std::ostringstream msg;
        msg << what << " (matrix " << rows << "x" << cols;
        if (iteration) msg << ", iteration " << *iteration;
        msg << ")";
        return msg.str();
      }()),
      rows_(rows),
      cols_(cols),
      detail_(what),
      iteration_(iteration) {}

NumericalError NumericalError::at_iteration(int iteration) const {
  return NumericalError(rows_, cols_, detail_, iteration);
}

std::string shape_string(const DenseMatrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                        const char* context) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(context) + ": shape mismatch " +
                         shape_string(a) + " vs " + shape_string(b));
  }
}

bool all_finite(const DenseMatrix& a) { return a.allFinite(); }

double frobenius_norm(const DenseMatrix& a) { return a.norm(); }

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add");
  return a + b;
}

DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "sub");
  return a - b;
}

DenseMatrix scale(const DenseMatrix& a, double factor) { return a * factor; }

std::vector<double> flatten(const DenseMatrix& a) {
  // Row-major storage already is vec(a) in row order.
  return {a.data(), a.data() + a.size()};
}

DenseMatrix reshape(std::span<const double> values, std::size_t rows,
                    std::size_t cols) {
  if (values.size() != rows * cols) {
    throw DimensionError("reshape: " + std::to_string(values.size()) +
                         " values cannot fill " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  DenseMatrix out(static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), out.data());
  return out;
}

DenseMatrix soft_threshold(const DenseMatrix& a, double tau) {
  if (!(tau >= 0.0)) {
    throw ValidationError("soft_threshold: tau must be >= 0, got " +
                          std::to_string(tau));
  }
  return a.unaryExpr([tau](double x) {
    const double mag = std::abs(x) - tau;
    if (mag <= 0.0) return 0.0;
    return std::copysign(mag, x);
  });
}

SvdResult svd(const DenseMatrix& a) {
  const auto m = static_cast<std::size_t>(a.rows());
  const auto n = static_cast<std::size_t>(a.cols());
  if (a.size() == 0) {
    return {DenseMatrix(a.rows(), 0), Eigen::VectorXd(0),
            DenseMatrix(0, a.cols())};
  }
  if (!a.allFinite()) {
    throw NumericalError(m, n, "svd: input has non-finite entries");
  }

  const Eigen::MatrixXd col_major = a;
  Eigen::BDCSVD<Eigen::MatrixXd> solver(col_major,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NumericalError(m, n, "svd: bidiagonal divide-and-conquer did not converge");
  }

  SvdResult out{solver.matrixU(), solver.singularValues(),
                solver.matrixV().transpose()};
  if (!out.u.allFinite() || !out.sigma.allFinite() || !out.vt.allFinite()) {
    throw NumericalError(m, n, "svd: non-finite factors");
  }
  return out;
}

DenseMatrix svt(const DenseMatrix& a, double tau) {
  if (!(tau >= 0.0)) {
    throw ValidationError("svt: tau must be >= 0, got " + std::to_string(tau));
  }
  const SvdResult dec = svd(a);

  // sigma is non-increasing, so the surviving values form a prefix.
  Eigen::Index keep = 0;
  while (keep < dec.sigma.size() && dec.sigma[keep] > tau) ++keep;

  DenseMatrix out = DenseMatrix::Zero(a.rows(), a.cols());
  if (keep == 0) return out;

  const Eigen::VectorXd shrunk =
      (dec.sigma.head(keep).array() - tau).matrix();
  out.noalias() = dec.u.leftCols(keep) * shrunk.asDiagonal() *
                  dec.vt.topRows(keep);
  return out;
}

}  // namespace jointlmr
