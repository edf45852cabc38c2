#pragma once

// Oseledets splittings at periodic orbits and the delta-Lyapunov inner
// product and norm built on them. At a periodic point the splitting is the
// generalised-eigenspace decomposition of the period product, so every
// series here is evaluated exactly up to a certified geometric tail.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lyaplab/cocycle.hpp"
#include "lyaplab/symbolic_dynamics.hpp"

namespace lyaplab {

struct SplittingBlock {
  double exponent = 0.0;
  int dimension = 0;
  bool infinite = false;
  /// bases[j]: d x k orthonormal basis of the block at f^j(p).
  std::vector<Matrix> bases;
  /// steps[j]: k x k coordinates of A(f^j p) from bases[j] to bases[j+1].
  std::vector<Matrix> steps;
};

class OseledetsSplitting {
 public:
  OseledetsSplitting(PeriodicOrbit orbit, std::vector<Matrix> step_matrices, std::vector<SplittingBlock> blocks);

  const PeriodicOrbit& orbit() const noexcept { return orbit_; }
  std::int64_t period() const noexcept { return orbit_.period(); }
  int dimension() const noexcept { return static_cast<int>(steps_.front().rows()); }
  const std::vector<SplittingBlock>& blocks() const noexcept { return blocks_; }
  const SplittingBlock& block(std::size_t i) const { return blocks_.at(i); }
  bool has_infinite_block() const noexcept { return !blocks_.empty() && blocks_.back().infinite; }

  /// A(f^j p), phase taken modulo the period.
  const Matrix& step(std::int64_t phase) const;
  /// [B_1 | ... | B_l] at the phase; invertible.
  const Matrix& frame(std::int64_t phase) const;
  /// Block coordinates of u: frame(phase)^{-1} u.
  Vector coordinates(std::int64_t phase, const Vector& u) const;
  /// Offset of block i inside the coordinate vector.
  Eigen::Index offset(std::size_t i) const { return offsets_.at(i); }

  /// max over blocks and phases of sin(angle(A E_j, E_{j+1})), including the wrap.
  double invariance_residual() const noexcept { return invariance_residual_; }
  /// Smallest sine of a principal angle between two distinct blocks.
  double min_block_angle() const noexcept { return min_angle_; }

  std::int64_t wrap(std::int64_t phase) const noexcept;

 private:
  PeriodicOrbit orbit_;
  std::vector<Matrix> steps_;
  std::vector<SplittingBlock> blocks_;
  std::vector<Matrix> frames_;
  std::vector<Eigen::PartialPivLU<Matrix>> frame_lu_;
  std::vector<Eigen::Index> offsets_;
  double invariance_residual_ = 0.0;
  double min_angle_ = 1.0;
};

/// Throws IllConditionedSplitting when two blocks are closer than 1e-8.
OseledetsSplitting splitting_at_periodic(const MatrixCocycle& a, const PeriodicOrbit& p);

/// A^n_i at f^phase(p) in block coordinates, n in Z. Negative n inverts the
/// restriction and throws NonInvertibleRestriction on the -inf block.
Matrix restricted_power(const OseledetsSplitting& split, std::size_t block, std::int64_t phase, std::int64_t n);

struct LyapNormParams {
  double delta = 0.1;
  double tail_tolerance = 1e-10;
  std::int64_t max_terms = 100000;
};

/// Supremum of the admissible delta: a quarter of the smallest gap between
/// consecutive finite exponents and, with a -inf block, -1/lambda_{l-1}.
double max_valid_delta(const OseledetsSplitting& split);
/// Throws GateViolation when delta is outside (0, max_valid_delta).
void check_gates(const OseledetsSplitting& split, double delta);

class LyapunovNorm {
 public:
  LyapunovNorm(OseledetsSplitting split, LyapNormParams params);

  const OseledetsSplitting& splitting() const noexcept { return split_; }
  const LyapNormParams& params() const noexcept { return params_; }
  double delta() const noexcept { return params_.delta; }

  double inner_product(std::int64_t phase, const Vector& u, const Vector& v) const;
  double norm(std::int64_t phase, const Vector& u) const;
  /// ||c||_{x,i} for block coordinates c of block i.
  double block_norm(std::size_t block, std::int64_t phase, const Vector& c) const;
  /// ||B||_{f^to p <- f^from p}
  double operator_norm(std::int64_t from, std::int64_t to, const Matrix& b) const;

  /// Optimal constant in ||u||_x <= K ||u||.
  double k_delta(std::int64_t phase) const;
  /// max_k K(f^k p) e^{-delta |k|}; satisfies the orbit growth bound.
  double k_delta_tempered(std::int64_t phase) const;
  /// Smallest eigenvalue of the Euclidean Gram matrix (>= 1 iff ||u|| <= ||u||_x).
  double gram_min_eigenvalue(std::int64_t phase) const;

  /// Gram matrix of the inner product in Euclidean coordinates.
  const Matrix& gram(std::int64_t phase) const;
  const Matrix& block_gram(std::size_t block, std::int64_t phase) const;

  /// Sum-form (l1) variant.
  double sum_form(std::int64_t phase, const Vector& u) const;
  double block_sum_form(std::size_t block, std::int64_t phase, const Vector& c) const;

  /// Largest number of terms used by a single series.
  std::int64_t truncation() const noexcept { return truncation_; }
  /// Largest certified tail bound (squared-series units).
  double max_tail() const noexcept { return max_tail_; }
  /// Total number of series terms in the norm at a phase (for the l1/l2 comparison).
  std::int64_t series_length(std::int64_t phase) const;

 private:
  struct Series {
    std::int64_t forward = 0;   // terms n = 0..forward-1
    std::int64_t backward = 0;  // terms n = -1..-(backward-1)
    double tail = 0.0;
  };
  struct BlockData {
    std::vector<Matrix> grams;     // per phase
    std::vector<Series> inner;     // per phase
    std::vector<Series> sum;       // per phase
    std::vector<Matrix> normalized;          // e^{-lambda} steps
    std::vector<Matrix> normalized_inverse;  // their inverses
  };

  void build_block(std::size_t i);
  Matrix normalized_period(std::size_t i, std::int64_t phase, bool forward) const;

  OseledetsSplitting split_;
  LyapNormParams params_;
  std::vector<BlockData> data_;
  std::vector<Matrix> gram_;
  std::vector<Eigen::LLT<Matrix>> gram_llt_;
  std::vector<double> k_opt_;
  std::vector<double> gram_min_;
  std::int64_t truncation_ = 0;
  double max_tail_ = 0.0;
};

struct PropertyCheck {
  std::string name;
  bool passed = true;
  /// min over checks of (bound - value) / scale; negative means violated.
  double worst_margin = std::numeric_limits<double>::infinity();
  int checks = 0;

  void record(double margin, double slack);
};

struct NormPropertyReport {
  Word orbit_word;
  double delta = 0.0;
  std::vector<double> exponents;
  std::vector<PropertyCheck> properties;
  /// max_j K_opt(f^{j+1}p) / (K_opt(f^j p) e^{delta}) - 1 over the orbit;
  /// positive values show that the optimal constant alone is not tempered.
  double optimal_k_growth_excess = 0.0;
  std::int64_t truncation = 0;
  double max_tail = 0.0;
  double sum_to_inner_ratio_max = 0.0;
  double sum_to_inner_ratio_bound = 0.0;
  double invariance_residual = 0.0;

  bool all_passed() const;
  const PropertyCheck& property(const std::string& name) const;
};

/// Checks items i-iv, the tempered K growth bound, the sum-form items,
/// the orbit growth of restricted powers and splitting invariance on block
/// bases and `random_vectors` random vectors per block, n = 1..period.
NormPropertyReport verify_norm_properties(const MatrixCocycle& a, const PeriodicOrbit& p, const LyapNormParams& params,
                                          int random_vectors = 3, std::uint64_t seed = 0);

}  // namespace lyaplab
