#pragma once

#include "jointlmr/decomposition.hpp"
#include "jointlmr/matrix.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace jointlmr {

/// Identifies the sampling procedure in exported metadata. Bump on any change
/// that alters the generated values for a given spec.
inline constexpr std::string_view kGeneratorId = "mt19937_64/u53/reject-v1";

struct SyntheticSpec {
  std::size_t rows = 64;
  std::size_t cols = 64;
  std::size_t rank = 4;
  double density = 0.05;
  double low_rank_scale = 1.0;
  double spike_scale = 5.0;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SyntheticInstance {
  DenseMatrix i;      // l0 + s_i0
  DenseMatrix t;      // l0 + s_t0
  DenseMatrix l0;
  DenseMatrix s_i0;
  DenseMatrix s_t0;
};

/// Portable sampling on top of the standard 64-bit Mersenne Twister, whose
/// output sequence is fixed by the standard. The std distributions are not,
/// so the conversions live here.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, bound), bound > 0, by rejection.
  std::uint64_t below(std::uint64_t bound);
  /// +1 or -1 with equal probability.
  double sign();

 private:
  std::mt19937_64 engine_;
};

/// l0 = P Q^T with P (rows x rank), Q (cols x rank) uniform in
/// [-low_rank_scale, low_rank_scale]; each sparse part has
/// round(density * rows * cols) entries of value +-spike_scale at uniformly
/// sampled positions. Draw order: P, Q, S_I support+signs, S_T support+signs.
SyntheticInstance generate(const SyntheticSpec& spec);

/// Number of nonzeros per sparse component for a spec.
std::size_t spike_count(const SyntheticSpec& spec);

/// Components being compared; any decomposition or ground truth fits.
struct ComponentView {
  const DenseMatrix& l;
  const DenseMatrix& s_i;
  const DenseMatrix& s_t;
};

struct RecoveryMetrics {
  double rel_err_l = 0.0;    // ||L - L0||_F / max(1, ||L0||_F)
  double rel_err_s_i = 0.0;
  double rel_err_s_t = 0.0;
  std::size_t rank_l = 0;    // singular values above 1e-6 * sigma_max
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;    // sparse support, pooled over S_I and S_T
  double recall = 0.0;
  double f1 = 0.0;
};

inline constexpr double kSupportThreshold = 1e-6;
inline constexpr double kRankRelativeThreshold = 1e-6;

RecoveryMetrics recovery_metrics(const ComponentView& estimate,
                                 const ComponentView& truth);
RecoveryMetrics recovery_metrics(const JointDecomposition& estimate,
                                 const SyntheticInstance& truth);

/// Count of singular values strictly above rel_tol * sigma_max.
std::size_t numerical_rank(const DenseMatrix& a, double rel_tol);

}  // namespace jointlmr
