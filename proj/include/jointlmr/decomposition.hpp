#pragma once

#include "jointlmr/matrix.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace jointlmr {

/// Parameters of the augmented-Lagrangian iteration. Defaults are the
/// published settings (mu = 10, lambda = 1, 3000 iterations); epsilon is an
/// absolute bound on the larger of the two constraint residuals.
struct SolverConfig {
  double lambda = 1.0;
  double mu = 10.0;
  int max_iters = 3000;
  double epsilon = 1e-7;

  /// Throws ValidationError unless lambda, mu, epsilon > 0 and max_iters >= 1.
  void validate() const;
};

struct ResidualPair {
  double r_i = 0.0;  // ||I - L - S_I||_F
  double r_t = 0.0;  // ||T - L - S_T||_F

  double max() const { return r_i > r_t ? r_i : r_t; }
};

/// Iterate of the joint solver: primal blocks and scaled-form multipliers.
struct JointState {
  DenseMatrix l;
  DenseMatrix s_i;
  DenseMatrix s_t;
  DenseMatrix z_i;
  DenseMatrix z_t;

  static JointState zeros(Eigen::Index rows, Eigen::Index cols);
};

struct JointDecomposition {
  DenseMatrix l;
  DenseMatrix s_i;
  DenseMatrix s_t;
  DenseMatrix z_i;
  DenseMatrix z_t;
  int iterations_run = 0;
  bool converged = false;
  std::vector<ResidualPair> residual_history;

  ResidualPair final_residuals() const {
    return residual_history.empty() ? ResidualPair{} : residual_history.back();
  }
};

struct SingleState {
  DenseMatrix l;
  DenseMatrix s;
  DenseMatrix z;

  static SingleState zeros(Eigen::Index rows, Eigen::Index cols);
};

struct SingleDecomposition {
  DenseMatrix l;
  DenseMatrix s;
  DenseMatrix z;
  int iterations_run = 0;
  bool converged = false;
  std::vector<double> residual_history;  // ||X - L - S||_F per iteration
};

/// Called after every iteration with the 1-based iteration index and the
/// post-update state. Used for checkpointing and per-iterate inspection.
using JointObserver = std::function<void(int, const JointState&, const ResidualPair&)>;
using SingleObserver = std::function<void(int, const SingleState&, double)>;

/// (||I - L - S_I||_F, ||T - L - S_T||_F).
ResidualPair residuals(const JointState& state, const DenseMatrix& i,
                       const DenseMatrix& t);

/// One pass of the shared-low-rank update:
///   S_I <- soft(I - L + Z_I/mu, lambda/mu)
///   S_T <- soft(T - L + Z_T/mu, lambda/mu)
///   A   <- ((I - S_I) + (T - S_T) + (Z_I + Z_T)/mu) / 2
///   L   <- svt(A, 1/(2 mu))
///   Z_I <- Z_I + mu (I - L - S_I),  Z_T likewise.
/// Multipliers read in the sparse and low-rank updates are the previous ones.
JointState joint_step(const JointState& state, const DenseMatrix& i,
                      const DenseMatrix& t, const SolverConfig& cfg);

/// Runs joint_step from the all-zero state until max(r_I, r_T) < epsilon
/// or max_iters iterations. The converging iteration is counted.
JointDecomposition joint_decompose(const DenseMatrix& i, const DenseMatrix& t,
                                   const SolverConfig& cfg,
                                   const JointObserver& observer = {});

double residual(const SingleState& state, const DenseMatrix& x);

/// Single-matrix robust PCA step with an explicit SVT threshold.
SingleState lmr_step(const SingleState& state, const DenseMatrix& x,
                     const SolverConfig& cfg, double svt_tau);

/// Standard low-rank + sparse recovery of x. svt_tau defaults to 1/mu when
/// not given; passing 1/(2 mu) reproduces joint_decompose(x, x, cfg).
SingleDecomposition lmr_decompose(const DenseMatrix& x, const SolverConfig& cfg,
                                  double svt_tau,
                                  const SingleObserver& observer = {});
SingleDecomposition lmr_decompose(const DenseMatrix& x, const SolverConfig& cfg);

}  // namespace jointlmr
