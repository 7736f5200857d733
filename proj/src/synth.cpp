#include "jointlmr/synth.hpp"

#include "jointlmr/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace jointlmr {

double PortableRng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double PortableRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::uint64_t PortableRng::below(std::uint64_t bound) {
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double PortableRng::sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

void SyntheticSpec::validate() const {
  if (rows == 0 || cols == 0) {
    throw ValidationError("synthetic spec: rows and cols must be >= 1");
  }
  if (rank > std::min(rows, cols)) {
    throw ValidationError("synthetic spec: rank " + std::to_string(rank) +
                          " exceeds min(rows, cols) = " +
                          std::to_string(std::min(rows, cols)));
  }
  if (!(density >= 0.0 && density <= 1.0)) {
    throw ValidationError("synthetic spec: density must lie in [0, 1]");
  }
  if (!(low_rank_scale >= 0.0) || !std::isfinite(low_rank_scale)) {
    throw ValidationError("synthetic spec: low_rank_scale must be finite and >= 0");
  }
  if (!(spike_scale >= 0.0) || !std::isfinite(spike_scale)) {
    throw ValidationError("synthetic spec: spike_scale must be finite and >= 0");
  }
}

std::size_t spike_count(const SyntheticSpec& spec) {
  const double total = static_cast<double>(spec.rows * spec.cols);
  return static_cast<std::size_t>(std::llround(spec.density * total));
}

namespace {

DenseMatrix sample_spikes(PortableRng& rng, const SyntheticSpec& spec) {
  const std::size_t total = spec.rows * spec.cols;
  const std::size_t count = spike_count(spec);

  // Partial Fisher-Yates: the first `count` slots become the support.
  std::vector<std::size_t> slots(total);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(total - k));
    std::swap(slots[k], slots[j]);
  }

  DenseMatrix s = DenseMatrix::Zero(static_cast<Eigen::Index>(spec.rows),
                                    static_cast<Eigen::Index>(spec.cols));
  for (std::size_t k = 0; k < count; ++k) {
    s.data()[slots[k]] = rng.sign() * spec.spike_scale;
  }
  return s;
}

}  // namespace

SyntheticInstance generate(const SyntheticSpec& spec) {
  spec.validate();
  PortableRng rng(spec.seed);

  const auto m = static_cast<Eigen::Index>(spec.rows);
  const auto n = static_cast<Eigen::Index>(spec.cols);
  const auto r = static_cast<Eigen::Index>(spec.rank);
  const double a = spec.low_rank_scale;

  DenseMatrix p(m, r);
  for (Eigen::Index k = 0; k < p.size(); ++k) p.data()[k] = rng.uniform(-a, a);
  DenseMatrix q(n, r);
  for (Eigen::Index k = 0; k < q.size(); ++k) q.data()[k] = rng.uniform(-a, a);

  SyntheticInstance inst;
  inst.l0 = r == 0 ? DenseMatrix::Zero(m, n) : DenseMatrix(p * q.transpose());
  inst.s_i0 = sample_spikes(rng, spec);
  inst.s_t0 = sample_spikes(rng, spec);
  inst.i = inst.l0 + inst.s_i0;
  inst.t = inst.l0 + inst.s_t0;
  return inst;
}

std::size_t numerical_rank(const DenseMatrix& a, double rel_tol) {
  const SvdResult dec = svd(a);
  if (dec.sigma.size() == 0 || dec.sigma[0] <= 0.0) return 0;
  const double cut = rel_tol * dec.sigma[0];
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < dec.sigma.size(); ++k) {
    if (dec.sigma[k] > cut) ++rank;
  }
  return rank;
}

namespace {

double relative_error(const DenseMatrix& est, const DenseMatrix& truth) {
  return (est - truth).norm() / std::max(1.0, truth.norm());
}

struct SupportCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

void count_support(const DenseMatrix& est, const DenseMatrix& truth,
                   SupportCounts& c) {
  for (Eigen::Index k = 0; k < est.size(); ++k) {
    const bool predicted = std::abs(est.data()[k]) > kSupportThreshold;
    const bool actual = std::abs(truth.data()[k]) > kSupportThreshold;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
  }
}

}  // namespace

RecoveryMetrics recovery_metrics(const ComponentView& est,
                                 const ComponentView& truth) {
  require_same_shape(est.l, truth.l, "recovery_metrics L");
  require_same_shape(est.s_i, truth.s_i, "recovery_metrics S_I");
  require_same_shape(est.s_t, truth.s_t, "recovery_metrics S_T");
  require_same_shape(est.l, est.s_i, "recovery_metrics estimate");
  require_same_shape(est.l, est.s_t, "recovery_metrics estimate");

  RecoveryMetrics out;
  out.rel_err_l = relative_error(est.l, truth.l);
  out.rel_err_s_i = relative_error(est.s_i, truth.s_i);
  out.rel_err_s_t = relative_error(est.s_t, truth.s_t);
  out.rank_l = numerical_rank(est.l, kRankRelativeThreshold);

  SupportCounts c;
  count_support(est.s_i, truth.s_i, c);
  count_support(est.s_t, truth.s_t, c);
  out.true_positives = c.tp;
  out.false_positives = c.fp;
  out.false_negatives = c.fn;

  const std::size_t predicted = c.tp + c.fp;
  const std::size_t actual = c.tp + c.fn;
  if (predicted > 0) {
    out.precision = static_cast<double>(c.tp) / static_cast<double>(predicted);
  } else {
    out.precision = actual == 0 ? 1.0 : 0.0;
  }
  out.recall = actual > 0 ? static_cast<double>(c.tp) / static_cast<double>(actual) : 1.0;
  const double pr = out.precision + out.recall;
  out.f1 = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
  return out;
}

RecoveryMetrics recovery_metrics(const JointDecomposition& estimate,
                                 const SyntheticInstance& truth) {
  return recovery_metrics(ComponentView{estimate.l, estimate.s_i, estimate.s_t},
                          ComponentView{truth.l0, truth.s_i0, truth.s_t0});
}

}  // namespace jointlmr
