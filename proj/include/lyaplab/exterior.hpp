#pragma once

// Compound matrices (matrices of i x i minors) and the cocycles they induce
// on exterior powers.

#include <cstddef>
#include <vector>

#include "lyaplab/cocycle.hpp"

namespace lyaplab {

/// Strictly increasing multi-indices of size i drawn from 0..d-1, in
/// lexicographic order.
class CompoundIndexing {
 public:
  CompoundIndexing(int d, int i);

  int d() const noexcept { return d_; }
  int i() const noexcept { return i_; }
  std::size_t size() const noexcept { return indices_.size(); }
  const std::vector<int>& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<std::vector<int>>& indices() const noexcept { return indices_; }
  /// Position of a multi-index; throws when it is not strictly increasing.
  std::size_t position(const std::vector<int>& index) const;

 private:
  int d_;
  int i_;
  std::vector<std::vector<int>> indices_;
};

std::size_t binomial(int n, int k);

/// Determinant by Gaussian elimination with partial pivoting.
double determinant(Matrix m);

/// C(d,i) x C(d,i) matrix whose (I, J) entry is the minor with rows I and columns J.
Matrix compound(const Matrix& m, int i);

/// x -> compound(A(x), i); i = 1 returns A unchanged.
MatrixCocycle induced_cocycle(const MatrixCocycle& a, int i);

/// gamma_1 + ... + gamma_i with finite + (-inf) = -inf.
double exponent_sums(const std::vector<double>& sorted_exponents, int i);

}  // namespace lyaplab
