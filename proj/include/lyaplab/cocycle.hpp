#pragma once

// Matrix cocycles over the shift: generators, ordered products (plain and
// with log-scale renormalisation) and Hölder-constant estimation.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lyaplab/symbolic_dynamics.hpp"

namespace lyaplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base cocycles are desk scale.
inline constexpr int kMaxDimension = 8;
/// Induced cocycles on exterior powers of a d <= 8 cocycle stay below C(8,4).
inline constexpr int kMaxInducedDimension = 70;

/// A(x) depends only on x_{-radius}..x_{radius}.
struct WindowLocality {
  int radius = 0;
};
/// A(x) depends on x only through d(x, center).
struct MetricLocality {
  SymbolicPoint center;
};
using Locality = std::variant<WindowLocality, MetricLocality>;

double operator_norm(const Matrix& m);

class MatrixCocycle {
 public:
  using Generator = std::function<Matrix(const SymbolicPoint&)>;

  MatrixCocycle(int dimension, Generator generator, Locality locality, double holder_alpha = 1.0,
                std::optional<double> holder_c2 = std::nullopt, std::string label = {});

  int dimension() const noexcept { return dimension_; }
  Matrix evaluate(const SymbolicPoint& x) const;
  Matrix operator()(const SymbolicPoint& x) const { return evaluate(x); }

  const Locality& locality() const noexcept { return locality_; }
  double holder_alpha() const noexcept { return holder_alpha_; }
  std::optional<double> holder_c2() const noexcept { return holder_c2_; }
  const std::string& label() const noexcept { return label_; }

  MatrixCocycle with_holder(double alpha, std::optional<double> c2) const;
  /// x -> c * A(x)
  MatrixCocycle scaled(double c) const;

 private:
  int dimension_;
  Generator generator_;
  Locality locality_;
  double holder_alpha_;
  std::optional<double> holder_c2_;
  std::string label_;
};

MatrixCocycle constant_cocycle(const Matrix& m);

/// Window-r cocycle; `table` is indexed by the base-k code of the word
/// x_{-r}..x_{r} (most significant symbol first) and must have k^(2r+1) entries.
MatrixCocycle locally_constant_cocycle(int alphabet_size, int window, std::vector<Matrix> table);

/// Window cocycle with independent entries uniform on [low, high] from `seed`.
MatrixCocycle random_locally_constant_cocycle(int alphabet_size, int dimension, int window, double low, double high,
                                              std::uint64_t seed);

/// The scalar cocycle on {0,1}^Z vanishing exactly at q (q_i = 1 for i != -1,
/// q_{-1} = 0):  A(x) = (a/theta^3) d(x,q) when d(x,q) <= theta^3, a otherwise.
/// extra_diagonal appends constant diagonal entries.
struct PaperExampleCocycle {
  double theta = 0.5;
  double a = 3.0;
  std::vector<double> extra_diagonal;

  static SymbolicPoint q();
  void validate() const;
  /// Value of the varying entry at x (agreement with q computed lazily).
  double scalar_at(const SymbolicPoint& x) const;
  MatrixCocycle cocycle() const;
  int dimension() const noexcept { return 1 + static_cast<int>(extra_diagonal.size()); }
};

/// diag(entries_1(x), ..., entries_d(x)) from scalar cocycles.
MatrixCocycle block_diagonal(const std::vector<MatrixCocycle>& entries);

struct ProductResult {
  Matrix value;
  /// Some intermediate norm left [1e-300, 1e300].
  bool overflow_risk = false;
};

/// A^n(x) = A(f^{n-1}x) ... A(fx) A(x); identity for n = 0.
ProductResult product(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n);

/// A^n(x) = unit_part * exp(log_scale). unit_part has operator norm in
/// [1/2, 2], or is exactly zero with log_scale = -inf.
struct ScaledProduct {
  Matrix unit_part;
  double log_scale = 0.0;
  std::int64_t steps = 0;

  bool annihilated() const noexcept;
  /// log ||A^n(x)||
  double log_norm() const;
  Matrix reconstruct() const;
};

ScaledProduct product_scaled(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n);

struct HolderEstimate {
  double c2_hat = 0.0;
  SymbolicPoint witness_x;
  SymbolicPoint witness_y;
  double witness_distance = 1.0;
  double witness_difference = 0.0;
  int pairs = 0;
};

/// c2_hat = max over sampled pairs of ||A(x) - A(y)|| / d(x,y)^alpha, alpha
/// taken from the cocycle. Pairs agree on a random central block and differ
/// just outside it; for metric-local cocycles half of the pairs are anchored
/// at the metric centre.
HolderEstimate holder_estimate(const MatrixCocycle& a, const Subshift& space, int sample_pairs, std::uint64_t seed);

}  // namespace lyaplab
