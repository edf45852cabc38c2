#pragma once

// Brute-force reference computations used by the tests. Deliberately naive
// and independent of the library implementations they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "lyaplab/symbolic_dynamics.hpp"

namespace oracle {

using lyaplab::Word;

/// N(x, y) by scanning coordinates outward up to `cap`; -1 when no mismatch.
inline std::int64_t agreement(const lyaplab::SymbolicPoint& x, const lyaplab::SymbolicPoint& y, std::int64_t cap) {
  for (std::int64_t r = 0; r <= cap; ++r)
    if (x.at(r) != y.at(r) || x.at(-r) != y.at(-r)) return r;
  return -1;
}

/// All words of length n over k symbols.
inline std::vector<Word> all_words(int k, int n) {
  std::vector<Word> out;
  Word w(static_cast<std::size_t>(n), 0);
  while (true) {
    out.push_back(w);
    int i = n - 1;
    while (i >= 0 && w[static_cast<std::size_t>(i)] == k - 1) w[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++w[static_cast<std::size_t>(i)];
  }
  return out;
}

inline Word rotate(const Word& w, std::size_t s) {
  Word r(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) r[i] = w[(i + s) % w.size()];
  return r;
}

inline Word min_rotation(const Word& w) {
  Word best = w;
  for (std::size_t s = 1; s < w.size(); ++s) best = std::min(best, rotate(w, s));
  return best;
}

inline std::size_t least_period(const Word& w) {
  for (std::size_t p = 1; p <= w.size(); ++p)
    if (w.size() % p == 0 && rotate(w, p) == w) return p;
  return w.size();
}

/// Number of cyclic classes of words with least period exactly n.
inline std::size_t orbits_of_period(int k, int n) {
  std::set<Word> classes;
  for (const auto& w : all_words(k, n))
    if (least_period(w) == static_cast<std::size_t>(n)) classes.insert(min_rotation(w));
  return classes.size();
}

/// Determinant by cofactor expansion along the first row.
inline double laplace_det(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  if (n == 0) return 1.0;
  if (n == 1) return m(0, 0);
  double det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = m(r, c);
    det += ((j % 2 == 0) ? 1.0 : -1.0) * m(0, j) * laplace_det(minor);
  }
  return det;
}

/// Moduli of the eigenvalues of a 2x2 matrix from its characteristic polynomial.
inline std::pair<double, double> eigen_moduli_2x2(const Eigen::Matrix2d& m) {
  const double tr = m.trace();
  const double det = m.determinant();
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    double a = std::abs((tr + s) / 2.0);
    double b = std::abs((tr - s) / 2.0);
    if (a < b) std::swap(a, b);
    return {a, b};
  }
  const double r = std::sqrt(det);
  return {r, r};
}

}  // namespace oracle
