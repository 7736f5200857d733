#include "jointlmr/decomposition.hpp"

#include "jointlmr/errors.hpp"

#include <cmath>
#include <string>

namespace jointlmr {

void SolverConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda must be a positive finite number, got " +
                          std::to_string(lambda));
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ValidationError("mu must be a positive finite number, got " +
                          std::to_string(mu));
  }
  if (max_iters < 1) {
    throw ValidationError("max_iters must be >= 1, got " +
                          std::to_string(max_iters));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("epsilon must be a positive finite number, got " +
                          std::to_string(epsilon));
  }
}

JointState JointState::zeros(Eigen::Index rows, Eigen::Index cols) {
  const DenseMatrix z = DenseMatrix::Zero(rows, cols);
  return {z, z, z, z, z};
}

SingleState SingleState::zeros(Eigen::Index rows, Eigen::Index cols) {
  const DenseMatrix z = DenseMatrix::Zero(rows, cols);
  return {z, z, z};
}

namespace {

void require_state_shape(const JointState& s, const DenseMatrix& ref) {
  require_same_shape(s.l, ref, "joint state L");
  require_same_shape(s.s_i, ref, "joint state S_I");
  require_same_shape(s.s_t, ref, "joint state S_T");
  require_same_shape(s.z_i, ref, "joint state Z_I");
  require_same_shape(s.z_t, ref, "joint state Z_T");
}

void require_state_shape(const SingleState& s, const DenseMatrix& ref) {
  require_same_shape(s.l, ref, "lmr state L");
  require_same_shape(s.s, ref, "lmr state S");
  require_same_shape(s.z, ref, "lmr state Z");
}

// The two solvers below are written with matching operation order so that
// lmr with svt_tau = 1/(2 mu) on X reproduces joint on (X, X) bit for bit:
// doubling and halving are exact, so ((a + a) + (z + z)/mu) / 2 == a + z/mu.

JointState joint_step_unchecked(const JointState& s, const DenseMatrix& i,
                                const DenseMatrix& t, const SolverConfig& cfg) {
  const double mu = cfg.mu;
  const double sparse_tau = cfg.lambda / mu;
  const double lowrank_tau = 1.0 / (2.0 * mu);

  JointState next;
  next.s_i = soft_threshold((i - s.l) + s.z_i / mu, sparse_tau);
  next.s_t = soft_threshold((t - s.l) + s.z_t / mu, sparse_tau);

  const DenseMatrix a =
      0.5 * (((i - next.s_i) + (t - next.s_t)) + (s.z_i + s.z_t) / mu);
  next.l = svt(a, lowrank_tau);

  next.z_i = s.z_i + mu * ((i - next.l) - next.s_i);
  next.z_t = s.z_t + mu * ((t - next.l) - next.s_t);
  return next;
}

SingleState lmr_step_unchecked(const SingleState& s, const DenseMatrix& x,
                               const SolverConfig& cfg, double svt_tau) {
  const double mu = cfg.mu;

  SingleState next;
  next.s = soft_threshold((x - s.l) + s.z / mu, cfg.lambda / mu);
  const DenseMatrix a = (x - next.s) + s.z / mu;
  next.l = svt(a, svt_tau);
  next.z = s.z + mu * ((x - next.l) - next.s);
  return next;
}

}  // namespace

ResidualPair residuals(const JointState& state, const DenseMatrix& i,
                       const DenseMatrix& t) {
  require_same_shape(i, t, "residuals");
  require_state_shape(state, i);
  return {((i - state.l) - state.s_i).norm(), ((t - state.l) - state.s_t).norm()};
}

JointState joint_step(const JointState& state, const DenseMatrix& i,
                      const DenseMatrix& t, const SolverConfig& cfg) {
  cfg.validate();
  require_same_shape(i, t, "joint_step inputs");
  require_state_shape(state, i);
  return joint_step_unchecked(state, i, t, cfg);
}

JointDecomposition joint_decompose(const DenseMatrix& i, const DenseMatrix& t,
                                   const SolverConfig& cfg,
                                   const JointObserver& observer) {
  cfg.validate();
  require_same_shape(i, t, "joint_decompose inputs");

  JointState state = JointState::zeros(i.rows(), i.cols());
  JointDecomposition out;
  out.residual_history.reserve(static_cast<std::size_t>(cfg.max_iters));

  for (int k = 1; k <= cfg.max_iters; ++k) {
    try {
      state = joint_step_unchecked(state, i, t, cfg);
    } catch (const NumericalError& e) {
      throw e.at_iteration(k);
    }
    const ResidualPair r = residuals(state, i, t);
    out.residual_history.push_back(r);
    out.iterations_run = k;
    if (observer) observer(k, state, r);
    if (r.max() < cfg.epsilon) {
      out.converged = true;
      break;
    }
  }

  out.l = std::move(state.l);
  out.s_i = std::move(state.s_i);
  out.s_t = std::move(state.s_t);
  out.z_i = std::move(state.z_i);
  out.z_t = std::move(state.z_t);
  return out;
}

double residual(const SingleState& state, const DenseMatrix& x) {
  require_state_shape(state, x);
  return ((x - state.l) - state.s).norm();
}

SingleState lmr_step(const SingleState& state, const DenseMatrix& x,
                     const SolverConfig& cfg, double svt_tau) {
  cfg.validate();
  if (!(svt_tau > 0.0)) {
    throw ValidationError("svt_tau must be > 0, got " + std::to_string(svt_tau));
  }
  require_state_shape(state, x);
  return lmr_step_unchecked(state, x, cfg, svt_tau);
}

SingleDecomposition lmr_decompose(const DenseMatrix& x, const SolverConfig& cfg,
                                  double svt_tau,
                                  const SingleObserver& observer) {
  cfg.validate();
  if (!(svt_tau > 0.0) || !std::isfinite(svt_tau)) {
    throw ValidationError("svt_tau must be a positive finite number, got " +
                          std::to_string(svt_tau));
  }

  SingleState state = SingleState::zeros(x.rows(), x.cols());
  SingleDecomposition out;
  out.residual_history.reserve(static_cast<std::size_t>(cfg.max_iters));

  for (int k = 1; k <= cfg.max_iters; ++k) {
    try {
      state = lmr_step_unchecked(state, x, cfg, svt_tau);
    } catch (const NumericalError& e) {
      throw e.at_iteration(k);
    }
    const double r = ((x - state.l) - state.s).norm();
    out.residual_history.push_back(r);
    out.iterations_run = k;
    if (observer) observer(k, state, r);
    if (r < cfg.epsilon) {
      out.converged = true;
      break;
    }
  }

  out.l = std::move(state.l);
  out.s = std::move(state.s);
  out.z = std::move(state.z);
  return out;
}

SingleDecomposition lmr_decompose(const DenseMatrix& x, const SolverConfig& cfg) {
  return lmr_decompose(x, cfg, 1.0 / cfg.mu);
}

}  // namespace jointlmr
