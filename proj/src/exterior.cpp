#include "lyaplab/exterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lyaplab/errors.hpp"

namespace lyaplab {

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int j = 1; j <= k; ++j) r = r * static_cast<std::size_t>(n - k + j) / static_cast<std::size_t>(j);
  return r;
}

CompoundIndexing::CompoundIndexing(int d, int i) : d_(d), i_(i) {
  if (d < 1 || i < 1 || i > d) throw DimensionError("compound index: need 1 <= i <= d");
  std::vector<int> cur(static_cast<std::size_t>(i));
  for (int k = 0; k < i; ++k) cur[static_cast<std::size_t>(k)] = k;
  while (true) {
    indices_.push_back(cur);
    int k = i - 1;
    while (k >= 0 && cur[static_cast<std::size_t>(k)] == d - i + k) --k;
    if (k < 0) break;
    ++cur[static_cast<std::size_t>(k)];
    for (int t = k + 1; t < i; ++t) cur[static_cast<std::size_t>(t)] = cur[static_cast<std::size_t>(t - 1)] + 1;
  }
}

std::size_t CompoundIndexing::position(const std::vector<int>& index) const {
  if (static_cast<int>(index.size()) != i_) throw DimensionError("multi-index has the wrong size");
  for (std::size_t k = 1; k < index.size(); ++k)
    if (index[k] <= index[k - 1]) throw DimensionError("multi-index is not strictly increasing");
  // combinatorial number system, counted in lexicographic order
  std::size_t pos = 0;
  int prev = -1;
  for (int k = 0; k < i_; ++k) {
    const int v = index[static_cast<std::size_t>(k)];
    if (v < 0 || v >= d_) throw DimensionError("multi-index out of range");
    for (int c = prev + 1; c < v; ++c) pos += binomial(d_ - 1 - c, i_ - 1 - k);
    prev = v;
  }
  return pos;
}

double determinant(Matrix m) {
  const auto n = m.rows();
  if (n != m.cols()) throw DimensionError("determinant of a non-square matrix");
  double det = 1.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      m.row(piv).swap(m.row(c));
      det = -det;
    }
    det *= m(c, c);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      if (f != 0.0) m.row(r).tail(n - c - 1) -= f * m.row(c).tail(n - c - 1);
    }
  }
  return det;
}

Matrix compound(const Matrix& m, int i) {
  if (m.rows() != m.cols()) throw DimensionError("compound of a non-square matrix");
  const int d = static_cast<int>(m.rows());
  const CompoundIndexing idx(d, i);
  if (i == 1) return m;
  const auto n = static_cast<Eigen::Index>(idx.size());
  Matrix out(n, n);
  Matrix minor(i, i);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rows = idx[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto& cols = idx[static_cast<std::size_t>(c)];
      for (int a = 0; a < i; ++a)
        for (int b = 0; b < i; ++b)
          minor(a, b) = m(rows[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
      out(r, c) = determinant(minor);
    }
  }
  return out;
}

MatrixCocycle induced_cocycle(const MatrixCocycle& a, int i) {
  const int d = a.dimension();
  if (i < 1 || i > d) throw DimensionError("induced cocycle: need 1 <= i <= d");
  if (i == 1) return a;
  const auto n = static_cast<int>(binomial(d, i));
  const MatrixCocycle base = a;
  return MatrixCocycle(
      n, [base, i](const SymbolicPoint& x) { return compound(base.evaluate(x), i); }, a.locality(),
      a.holder_alpha(), std::nullopt, "exterior^" + std::to_string(i) + "(" + a.label() + ")");
}

double exponent_sums(const std::vector<double>& sorted_exponents, int i) {
  if (i < 1 || i > static_cast<int>(sorted_exponents.size()))
    throw DimensionError("exponent_sums: i out of range");
  double s = 0.0;
  for (int k = 0; k < i; ++k) {
    const double v = sorted_exponents[static_cast<std::size_t>(k)];
    if (std::isinf(v) && v < 0) return -std::numeric_limits<double>::infinity();
    s += v;
  }
  return s;
}

}  // namespace lyaplab
