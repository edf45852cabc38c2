#include "lyaplab/lyapunov_norm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "lyaplab/errors.hpp"
#include "lyaplab/random.hpp"
#include "lyaplab/spectrum.hpp"

namespace lyaplab {

namespace {

/// sin of the largest principal angle between span(b) and span(target), both orthonormal.
double subspace_residual(const Matrix& target, const Matrix& b) {
  if (b.cols() == 0) return 0.0;
  const Matrix r = b - target * (target.transpose() * b);
  return operator_norm(r);
}

/// The k right singular vectors of m with the smallest singular values.
Matrix null_basis(const Matrix& m, int k) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(k);
}

Matrix unit_scaled(Matrix m) {
  const double s = operator_norm(m);
  if (s > 0.0) m /= s;
  return m;
}

Matrix orthonormal_q(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

Matrix generic_frame(int d) {
  CounterStream rng(0x5eed);
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
  return orthonormal_q(m);
}

/// Simultaneous iteration around the orbit: frames[j] has leading columns
/// spanning the fastest subspaces at phase j. With `backward` the inverse
/// steps are applied along the backward orbit instead.
std::vector<Matrix> flag_frames(const std::vector<Matrix>& steps, std::int64_t periods, bool backward) {
  const auto m = static_cast<std::int64_t>(steps.size());
  const int d = static_cast<int>(steps.front().rows());
  std::vector<Eigen::PartialPivLU<Matrix>> inverse;
  if (backward)
    for (const auto& s : steps) inverse.emplace_back(s);
  std::vector<Matrix> frames(static_cast<std::size_t>(m));
  Matrix q = generic_frame(d);
  std::int64_t phase = 0;
  for (std::int64_t t = 0; t < (periods + 1) * m; ++t) {
    if (backward) {
      phase = (phase + m - 1) % m;
      q = orthonormal_q(inverse[static_cast<std::size_t>(phase)].solve(q));
    } else {
      q = orthonormal_q(steps[static_cast<std::size_t>(phase)] * q);
      phase = (phase + 1) % m;
    }
    if (t >= periods * m) frames[static_cast<std::size_t>(phase)] = q;
  }
  return frames;
}

/// Orthonormal basis of span(f) intersected with span(s), of dimension k.
Matrix intersect(const Matrix& f, const Matrix& s, int k) {
  Matrix stacked(f.rows(), f.cols() + s.cols());
  stacked << f, -s;
  const Matrix v = null_basis(stacked, k);
  return orthonormal_q(f * v.topRows(f.cols()));
}

// Periods of simultaneous iteration needed to shrink the slowest gap below
// round-off, or 0 when that is out of reach.
std::int64_t flag_periods(const std::vector<ExponentGroup>& groups, std::int64_t m) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < groups.size(); ++i) gap = std::min(gap, groups[i].value - groups[i + 1].value);
  const double periods = std::ceil(40.0 / (gap * static_cast<double>(m))) + 2.0;
  if (!(periods * static_cast<double>(m) <= 200000.0)) return 0;
  return static_cast<std::int64_t>(periods);
}

bool steps_invertible(const std::vector<Matrix>& steps) {
  for (const auto& s : steps) {
    Eigen::JacobiSVD<Matrix> svd(s);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0))) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

OseledetsSplitting::OseledetsSplitting(PeriodicOrbit orbit, std::vector<Matrix> step_matrices,
                                       std::vector<SplittingBlock> blocks)
    : orbit_(std::move(orbit)), steps_(std::move(step_matrices)), blocks_(std::move(blocks)) {
  const auto m = static_cast<std::size_t>(orbit_.period());
  if (steps_.size() != m) throw DimensionError("splitting: one step matrix per phase required");
  const auto d = steps_.front().rows();
  Eigen::Index total = 0;
  for (const auto& b : blocks_) {
    if (b.bases.size() != m || b.steps.size() != m) throw DimensionError("splitting: one basis per phase required");
    offsets_.push_back(total);
    total += b.dimension;
  }
  if (total != d) throw DimensionError("splitting: block dimensions do not add up to d");

  for (std::size_t j = 0; j < m; ++j) {
    Matrix t(d, d);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      t.middleCols(offsets_[i], blocks_[i].dimension) = blocks_[i].bases[j];
    frames_.push_back(t);
    frame_lu_.emplace_back(t);

    for (std::size_t a = 0; a < blocks_.size(); ++a)
      for (std::size_t b = a + 1; b < blocks_.size(); ++b) {
        const Matrix& ba = blocks_[a].bases[j];
        const Matrix& bb = blocks_[b].bases[j];
        const Matrix r = bb - ba * (ba.transpose() * bb);
        Eigen::JacobiSVD<Matrix> svd(r);
        min_angle_ = std::min(min_angle_, svd.singularValues()(svd.singularValues().size() - 1));
      }

    const std::size_t next = (j + 1) % m;
    for (const auto& b : blocks_) {
      const Matrix img = steps_[j] * b.bases[j];
      const double scale = std::max(operator_norm(img), b.infinite ? operator_norm(steps_[j]) : 0.0);
      if (scale == 0.0) continue;
      invariance_residual_ = std::max(invariance_residual_, subspace_residual(b.bases[next], img) / scale);
    }
  }
}

std::int64_t OseledetsSplitting::wrap(std::int64_t phase) const noexcept {
  const std::int64_t m = period();
  return ((phase % m) + m) % m;
}

const Matrix& OseledetsSplitting::step(std::int64_t phase) const {
  return steps_[static_cast<std::size_t>(wrap(phase))];
}

const Matrix& OseledetsSplitting::frame(std::int64_t phase) const {
  return frames_[static_cast<std::size_t>(wrap(phase))];
}

Vector OseledetsSplitting::coordinates(std::int64_t phase, const Vector& u) const {
  return frame_lu_[static_cast<std::size_t>(wrap(phase))].solve(u);
}

OseledetsSplitting splitting_at_periodic(const MatrixCocycle& a, const PeriodicOrbit& p) {
  const std::int64_t m = p.period();
  const int d = a.dimension();
  std::vector<Matrix> steps;
  for (std::int64_t j = 0; j < m; ++j) steps.push_back(a.evaluate(p.point(j)));

  // unit-scaled period products at every phase
  std::vector<Matrix> period_products;
  for (std::int64_t j = 0; j < m; ++j) {
    Matrix prod = Matrix::Identity(d, d);
    for (std::int64_t t = 0; t < m; ++t) prod = unit_scaled(steps[static_cast<std::size_t>((j + t) % m)] * prod);
    period_products.push_back(prod);
  }

  const LyapunovSpectrum spectrum = periodic_spectrum(a, p);
  const auto groups = spectrum.groups();

  // eigenvalues of every phase product, by decreasing modulus
  std::vector<std::vector<std::complex<double>>> eig;
  for (const auto& prod : period_products) {
    Eigen::EigenSolver<Matrix> es(prod, false);
    std::vector<std::complex<double>> e(es.eigenvalues().data(), es.eigenvalues().data() + d);
    std::stable_sort(e.begin(), e.end(), [](const auto& l, const auto& r) { return std::abs(l) > std::abs(r); });
    eig.push_back(std::move(e));
  }

  // Invertible steps: each block is the intersection of a fast flag
  // (forward iteration) with a slow flag (backward iteration), which keeps
  // full accuracy when the period product spans many orders of magnitude.
  const bool invertible = groups.size() > 1 && !is_neg_inf(groups.back().value) && steps_invertible(steps);
  const std::int64_t periods = invertible ? flag_periods(groups, m) : 0;
  std::vector<Matrix> fast, slow;
  if (periods > 0) {
    fast = flag_frames(steps, periods, false);
    slow = flag_frames(steps, periods, true);
  }

  std::vector<SplittingBlock> blocks;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    SplittingBlock block;
    block.exponent = g.value;
    block.dimension = g.multiplicity;
    block.infinite = is_neg_inf(g.value);
    const Matrix id = Matrix::Identity(d, d);
    for (std::int64_t j = 0; j < m; ++j) {
      const Matrix& pj = period_products[static_cast<std::size_t>(j)];
      if (periods > 0) {
        const auto ju = static_cast<std::size_t>(j);
        const auto upto = static_cast<Eigen::Index>(offset) + g.multiplicity;
        const auto from_bottom = static_cast<Eigen::Index>(d) - static_cast<Eigen::Index>(offset);
        block.bases.push_back(intersect(fast[ju].leftCols(upto), slow[ju].leftCols(from_bottom), g.multiplicity));
        continue;
      }
      if (block.infinite) {
        Matrix power = id;
        for (int t = 0; t < block.dimension; ++t) power = unit_scaled(pj * power);
        block.bases.push_back(null_basis(power, block.dimension));
        continue;
      }
      // each phase separately: pushing a basis along the orbit amplifies
      // round-off in blocks dominated by a faster one
      Matrix q = id;
      for (std::size_t t = offset; t < offset + static_cast<std::size_t>(g.multiplicity); ++t) {
        const auto& eta = eig[static_cast<std::size_t>(j)][t];
        if (eta.imag() == 0.0)
          q = (pj - eta.real() * id) * q;
        else if (eta.imag() > 0.0)
          q = (pj * pj - 2.0 * eta.real() * pj + std::norm(eta) * id) * q;
        else
          continue;
        const double s = q.norm();
        if (s > 0.0) q /= s;
      }
      block.bases.push_back(null_basis(q, block.dimension));
      Eigen::JacobiSVD<Matrix> svd(steps[static_cast<std::size_t>(j)] * block.bases.back());
      const auto& sv = svd.singularValues();
      if (!(sv(sv.size() - 1) > 0.0)) throw IllConditionedSplitting("cocycle collapses a finite-exponent block");
    }
    for (std::int64_t j = 0; j < m; ++j) {
      const auto next = static_cast<std::size_t>((j + 1) % m);
      block.steps.push_back(block.bases[next].transpose() * steps[static_cast<std::size_t>(j)] *
                            block.bases[static_cast<std::size_t>(j)]);
    }
    offset += static_cast<std::size_t>(g.multiplicity);
    blocks.push_back(std::move(block));
  }

  OseledetsSplitting split(p, std::move(steps), std::move(blocks));
  if (split.min_block_angle() < 1e-8)
    throw IllConditionedSplitting("Oseledets blocks are nearly parallel (sin angle " +
                                  std::to_string(split.min_block_angle()) + ")");
  return split;
}

Matrix restricted_power(const OseledetsSplitting& split, std::size_t block, std::int64_t phase, std::int64_t n) {
  const auto& b = split.block(block);
  Matrix out = Matrix::Identity(b.dimension, b.dimension);
  if (n >= 0) {
    for (std::int64_t t = 0; t < n; ++t) out = b.steps[static_cast<std::size_t>(split.wrap(phase + t))] * out;
    return out;
  }
  if (b.infinite) throw NonInvertibleRestriction("negative powers are undefined on the -inf block");
  for (std::int64_t t = 1; t <= -n; ++t) {
    Eigen::PartialPivLU<Matrix> lu(b.steps[static_cast<std::size_t>(split.wrap(phase - t))]);
    out = lu.solve(out);
  }
  return out;
}

// ---------------------------------------------------------------------------

double max_valid_delta(const OseledetsSplitting& split) {
  double bound = std::numeric_limits<double>::infinity();
  const auto& blocks = split.blocks();
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
    if (blocks[i + 1].infinite) break;
    bound = std::min(bound, (blocks[i].exponent - blocks[i + 1].exponent) / 4.0);
  }
  if (split.has_infinite_block() && blocks.size() >= 2) {
    const double last = blocks[blocks.size() - 2].exponent;
    if (last < 0.0) bound = std::min(bound, -1.0 / last);
  }
  return bound;
}

void check_gates(const OseledetsSplitting& split, double delta) {
  if (!(delta > 0.0)) throw GateViolation("delta must be positive");
  const double bound = max_valid_delta(split);
  if (!(delta < bound))
    throw GateViolation("delta " + std::to_string(delta) + " is outside the admissible range (0, " +
                        std::to_string(bound) + ") for orbit " + format_word(split.orbit().word()));
}

// ---------------------------------------------------------------------------

LyapunovNorm::LyapunovNorm(OseledetsSplitting split, LyapNormParams params)
    : split_(std::move(split)), params_(params) {
  check_gates(split_, params_.delta);
  if (!(params_.tail_tolerance > 0.0)) throw Error("tail tolerance must be positive");
  data_.resize(split_.blocks().size());
  for (std::size_t i = 0; i < data_.size(); ++i) build_block(i);

  const std::int64_t m = split_.period();
  const int d = split_.dimension();
  for (std::int64_t j = 0; j < m; ++j) {
    Matrix h = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto k = split_.block(i).dimension;
      h.block(split_.offset(i), split_.offset(i), k, k) = data_[i].grams[static_cast<std::size_t>(j)];
    }
    // G = T^{-T} H T^{-1}
    const Eigen::PartialPivLU<Matrix> lu(split_.frame(j));
    const Matrix tinv = lu.inverse();
    Matrix g = tinv.transpose() * h * tinv;
    g = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    gram_min_.push_back(es.eigenvalues()(0));
    k_opt_.push_back(std::sqrt(es.eigenvalues()(d - 1)));
    gram_llt_.emplace_back(g);
    if (gram_llt_.back().info() != Eigen::Success) throw Error("Lyapunov Gram matrix is not positive definite");
    gram_.push_back(std::move(g));
  }
}

Matrix LyapunovNorm::normalized_period(std::size_t i, std::int64_t phase, bool forward) const {
  const auto& bd = data_[i];
  const std::int64_t m = split_.period();
  const int k = split_.block(i).dimension;
  Matrix out = Matrix::Identity(k, k);
  for (std::int64_t t = 0; t < m; ++t) {
    if (forward)
      out = bd.normalized[static_cast<std::size_t>(split_.wrap(phase + t))] * out;
    else
      out = bd.normalized_inverse[static_cast<std::size_t>(split_.wrap(phase - 1 - t))] * out;
  }
  return out;
}

void LyapunovNorm::build_block(std::size_t i) {
  const auto& block = split_.block(i);
  auto& bd = data_[i];
  const std::int64_t m = split_.period();
  const int k = block.dimension;
  const double delta = params_.delta;
  const double tol = params_.tail_tolerance;
  bd.grams.assign(static_cast<std::size_t>(m), Matrix::Zero(k, k));
  bd.inner.assign(static_cast<std::size_t>(m), {});
  bd.sum.assign(static_cast<std::size_t>(m), {});

  if (block.infinite) {
    // nilpotent along the period: A^n vanishes on the block for n >= k*m
    for (std::int64_t j = 0; j < m; ++j) {
      Matrix mn = Matrix::Identity(k, k);
      std::int64_t terms = 0;
      for (std::int64_t n = 0; n < k * m; ++n) {
        if ((mn.array() == 0.0).all()) break;
        const double w = std::exp(2.0 * static_cast<double>(n) / delta);
        const Matrix term = w * (mn.transpose() * mn);
        if (!term.allFinite()) throw TailNotCertified("-inf block series overflows; increase delta");
        bd.grams[static_cast<std::size_t>(j)] += term;
        ++terms;
        mn = block.steps[static_cast<std::size_t>(split_.wrap(j + n))] * mn;
      }
      bd.inner[static_cast<std::size_t>(j)] = {terms, 0, 0.0};
      bd.sum[static_cast<std::size_t>(j)] = {terms, 0, 0.0};
      truncation_ = std::max(truncation_, terms);
    }
    return;
  }

  const double scale = std::exp(-block.exponent);
  for (std::int64_t j = 0; j < m; ++j) {
    Matrix r = scale * block.steps[static_cast<std::size_t>(j)];
    Eigen::FullPivLU<Matrix> lu(r);
    if (!lu.isInvertible()) throw NonInvertibleRestriction("finite-exponent block step is singular");
    bd.normalized.push_back(r);
    bd.normalized_inverse.push_back(lu.inverse());
  }

  for (const bool forward : {true, false}) {
    // smallest s with max_phase ||Q^s|| e^{-delta s m} < 1
    std::vector<Matrix> period;
    for (std::int64_t j = 0; j < m; ++j) period.push_back(normalized_period(i, j, forward));
    std::vector<Matrix> powers = period;
    std::int64_t s = 1;
    double q = 0.0;
    while (true) {
      q = 0.0;
      for (const auto& pw : powers) q = std::max(q, lyaplab::operator_norm(pw));
      q *= std::exp(-delta * static_cast<double>(s * m));
      if (q < 1.0) break;
      if ((s + 1) * m > params_.max_terms)
        throw TailNotCertified("no contracting super-period within " + std::to_string(params_.max_terms) + " terms");
      ++s;
      for (std::size_t j = 0; j < powers.size(); ++j) powers[j] = period[j] * powers[j];
    }
    const std::int64_t len = s * m;

    for (std::int64_t j = 0; j < m; ++j) {
      // C = max_{r < len} ||M_r|| e^{-delta r}
      double c = 0.0;
      Matrix mr = Matrix::Identity(k, k);
      for (std::int64_t r = 0; r < len; ++r) {
        c = std::max(c, lyaplab::operator_norm(mr) * std::exp(-delta * static_cast<double>(r)));
        if (forward)
          mr = bd.normalized[static_cast<std::size_t>(split_.wrap(j + r))] * mr;
        else
          mr = bd.normalized_inverse[static_cast<std::size_t>(split_.wrap(j - 1 - r))] * mr;
      }
      auto blocks_needed = [&](double power, double denom_factor, double c_power) {
        // smallest K >= 1 with len * c^c_power * q^(power K) / denom < tol / 2 (two directions)
        if (q == 0.0) return std::int64_t{1};
        const double target = 0.5 * tol * denom_factor / (static_cast<double>(len) * std::pow(c, c_power));
        const double kk = std::ceil(std::log(target) / (power * std::log(q)));
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::min(kk, 1e12)));
      };
      const std::int64_t k_inner = blocks_needed(2.0, 1.0 - q * q, 2.0);
      const std::int64_t k_sum = blocks_needed(1.0, 1.0 - q, 1.0);
      const std::int64_t n_inner = k_inner * len;
      const std::int64_t n_sum = k_sum * len;
      if (std::max(n_inner, n_sum) > params_.max_terms)
        throw TailNotCertified("certified truncation needs " + std::to_string(std::max(n_inner, n_sum)) +
                               " terms, above the cap of " + std::to_string(params_.max_terms));
      const double tail_inner = static_cast<double>(len) * c * c * std::pow(q, 2.0 * static_cast<double>(k_inner)) /
                                (1.0 - q * q);
      auto& si = bd.inner[static_cast<std::size_t>(j)];
      auto& ss = bd.sum[static_cast<std::size_t>(j)];
      if (forward) {
        si.forward = n_inner;
        ss.forward = n_sum;
      } else {
        si.backward = n_inner;
        ss.backward = n_sum;
      }
      si.tail += tail_inner;
      max_tail_ = std::max(max_tail_, si.tail);
      truncation_ = std::max({truncation_, n_inner, n_sum});
    }
  }

  for (std::int64_t j = 0; j < m; ++j) {
    const auto& si = bd.inner[static_cast<std::size_t>(j)];
    Matrix& h = bd.grams[static_cast<std::size_t>(j)];
    Matrix mn = Matrix::Identity(k, k);
    for (std::int64_t n = 0; n < si.forward; ++n) {
      h += std::exp(-2.0 * delta * static_cast<double>(n)) * (mn.transpose() * mn);
      mn = bd.normalized[static_cast<std::size_t>(split_.wrap(j + n))] * mn;
    }
    mn = Matrix::Identity(k, k);
    for (std::int64_t n = 1; n < si.backward; ++n) {
      mn = bd.normalized_inverse[static_cast<std::size_t>(split_.wrap(j - n))] * mn;
      h += std::exp(-2.0 * delta * static_cast<double>(n)) * (mn.transpose() * mn);
    }
    h = 0.5 * (h + h.transpose());
  }
}

const Matrix& LyapunovNorm::block_gram(std::size_t block, std::int64_t phase) const {
  return data_.at(block).grams[static_cast<std::size_t>(split_.wrap(phase))];
}

const Matrix& LyapunovNorm::gram(std::int64_t phase) const { return gram_[static_cast<std::size_t>(split_.wrap(phase))]; }

double LyapunovNorm::block_norm(std::size_t block, std::int64_t phase, const Vector& c) const {
  return std::sqrt(std::max(0.0, c.dot(block_gram(block, phase) * c)));
}

double LyapunovNorm::inner_product(std::int64_t phase, const Vector& u, const Vector& v) const {
  const Vector cu = split_.coordinates(phase, u);
  const Vector cv = split_.coordinates(phase, v);
  double s = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const auto k = split_.block(i).dimension;
    const auto o = split_.offset(i);
    s += cu.segment(o, k).dot(block_gram(i, phase) * cv.segment(o, k));
  }
  return s;
}

double LyapunovNorm::norm(std::int64_t phase, const Vector& u) const {
  return std::sqrt(std::max(0.0, inner_product(phase, u, u)));
}

double LyapunovNorm::operator_norm(std::int64_t from, std::int64_t to, const Matrix& b) const {
  // with G = L L^T, ||u||_x = ||L_x^T u||, so the norm is sigma_max(L_y^T B L_x^{-T})
  const auto& lx = gram_llt_[static_cast<std::size_t>(split_.wrap(from))];
  const auto& ly = gram_llt_[static_cast<std::size_t>(split_.wrap(to))];
  const Matrix x = ly.matrixL().transpose() * b;
  const Matrix y = lx.matrixL().solve(x.transpose()).transpose();
  return lyaplab::operator_norm(y);
}

double LyapunovNorm::k_delta(std::int64_t phase) const { return k_opt_[static_cast<std::size_t>(split_.wrap(phase))]; }

double LyapunovNorm::k_delta_tempered(std::int64_t phase) const {
  const std::int64_t m = split_.period();
  const std::int64_t j = split_.wrap(phase);
  double out = 0.0;
  for (std::int64_t f = 0; f < m; ++f) {
    const std::int64_t diff = std::abs(f - j);
    const std::int64_t dist = std::min(diff, m - diff);
    out = std::max(out, k_opt_[static_cast<std::size_t>(f)] * std::exp(-params_.delta * static_cast<double>(dist)));
  }
  return out;
}

double LyapunovNorm::gram_min_eigenvalue(std::int64_t phase) const {
  return gram_min_[static_cast<std::size_t>(split_.wrap(phase))];
}

double LyapunovNorm::block_sum_form(std::size_t block, std::int64_t phase, const Vector& c) const {
  const auto& b = split_.block(block);
  const auto& bd = data_.at(block);
  const auto& ss = bd.sum[static_cast<std::size_t>(split_.wrap(phase))];
  const double delta = params_.delta;
  double total = 0.0;
  Vector v = c;
  if (b.infinite) {
    for (std::int64_t n = 0; n < ss.forward; ++n) {
      total += v.norm() * std::exp(static_cast<double>(n) / delta);
      v = b.steps[static_cast<std::size_t>(split_.wrap(phase + n))] * v;
    }
    return total;
  }
  for (std::int64_t n = 0; n < ss.forward; ++n) {
    total += v.norm() * std::exp(-delta * static_cast<double>(n));
    v = bd.normalized[static_cast<std::size_t>(split_.wrap(phase + n))] * v;
  }
  v = c;
  for (std::int64_t n = 1; n < ss.backward; ++n) {
    v = bd.normalized_inverse[static_cast<std::size_t>(split_.wrap(phase - n))] * v;
    total += v.norm() * std::exp(-delta * static_cast<double>(n));
  }
  return total;
}

double LyapunovNorm::sum_form(std::int64_t phase, const Vector& u) const {
  const Vector c = split_.coordinates(phase, u);
  double total = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i)
    total += block_sum_form(i, phase, c.segment(split_.offset(i), split_.block(i).dimension));
  return total;
}

std::int64_t LyapunovNorm::series_length(std::int64_t phase) const {
  std::int64_t total = 0;
  for (const auto& bd : data_) {
    const auto& s = bd.sum[static_cast<std::size_t>(split_.wrap(phase))];
    total += s.forward + std::max<std::int64_t>(0, s.backward - 1);
  }
  return total;
}

// ---------------------------------------------------------------------------

void PropertyCheck::record(double margin, double slack) {
  ++checks;
  worst_margin = std::min(worst_margin, margin);
  if (!(margin >= -slack)) passed = false;
}

bool NormPropertyReport::all_passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyCheck& p) { return p.passed; });
}

const PropertyCheck& NormPropertyReport::property(const std::string& name) const {
  for (const auto& p : properties)
    if (p.name == name) return p;
  throw Error("no property named " + name);
}

NormPropertyReport verify_norm_properties(const MatrixCocycle& a, const PeriodicOrbit& p, const LyapNormParams& params,
                                          int random_vectors, std::uint64_t seed) {
  const LyapunovNorm norm(splitting_at_periodic(a, p), params);
  const auto& split = norm.splitting();
  const std::int64_t m = split.period();
  const int d = split.dimension();
  const double delta = params.delta;
  CounterStream rng(seed);

  NormPropertyReport rep;
  rep.orbit_word = p.word();
  rep.delta = delta;
  for (const auto& b : split.blocks())
    for (int t = 0; t < b.dimension; ++t) rep.exponents.push_back(b.exponent);
  rep.truncation = norm.truncation();
  rep.max_tail = norm.max_tail();
  rep.invariance_residual = split.invariance_residual();

  PropertyCheck p_i{"i"}, p_ii{"ii"}, p_iii{"iii"}, p_iv{"iv"}, p_k{"k_growth"}, s_i{"sum_i"}, s_ii{"sum_ii"},
      s_iii{"sum_iii"}, s_eq{"sum_equivalence"}, growth{"restricted_growth_rate"}, inv{"invariance"};
  const double slack = 1e-8 + 2.0 * norm.max_tail();

  auto random_vector = [&](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index t = 0; t < n; ++t) v(t) = rng.uniform(-1.0, 1.0);
    if (v.norm() == 0.0) v(0) = 1.0;
    return v;
  };

  const double lambda1 = split.block(0).exponent;
  for (std::size_t i = 0; i < split.blocks().size(); ++i) {
    const auto& b = split.block(i);
    std::vector<Vector> vectors;
    for (int t = 0; t < b.dimension; ++t) vectors.push_back(Vector::Unit(b.dimension, t));
    for (int t = 0; t < random_vectors; ++t) vectors.push_back(random_vector(b.dimension));

    for (std::int64_t j = 0; j < m; ++j)
      for (const auto& c : vectors) {
        const double un = norm.block_norm(i, j, c);
        const double us = norm.block_sum_form(i, j, c);
        for (std::int64_t n = 1; n <= m; ++n) {
          const Vector w = restricted_power(split, i, j, n) * c;
          const double wn = norm.block_norm(i, j + n, w);
          const double ws = norm.block_sum_form(i, j + n, w);
          const double dn = static_cast<double>(n);
          if (b.infinite) {
            const double f = std::exp(-dn / delta);
            p_ii.record((f * un - wn) / (f * un), slack);
            s_ii.record((f * us - ws) / (f * us), slack);
          } else {
            const double up = std::exp((b.exponent + delta) * dn);
            const double lo = std::exp((b.exponent - delta) * dn);
            p_i.record(std::min(up * un - wn, wn - lo * un) / (up * un), slack);
            s_i.record(std::min(up * us - ws, ws - lo * us) / (up * us), slack);
          }
        }
      }

    if (!b.infinite) {
      // (1/n) log ||A^n_i c|| against lambda_i, allowing log(kappa)/|n| for
      // the eigenvector conditioning of the normalised period map
      Matrix period = Matrix::Identity(b.dimension, b.dimension);
      for (std::int64_t t = 0; t < m; ++t) period = b.steps[static_cast<std::size_t>(t)] * period;
      period *= std::exp(-b.exponent * static_cast<double>(m));
      Eigen::EigenSolver<Matrix> es(period, true);
      double kappa = std::numeric_limits<double>::infinity();
      double dev = 0.0;
      if (es.info() == Eigen::Success) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) > 0.0) kappa = sv(0) / sv(sv.size() - 1);
        for (Eigen::Index t = 0; t < es.eigenvalues().size(); ++t)
          dev = std::max(dev, std::abs(std::log(std::abs(es.eigenvalues()(t)))) / static_cast<double>(m));
      }
      for (const std::int64_t mult : {10, 20, 40})
        for (const int sign : {1, -1}) {
          const std::int64_t n = sign * mult * m;
          for (const auto& c : vectors) {
            // renormalise every step; the raw power under- or overflows
            Vector v = c / c.norm();
            double log_growth = 0.0;
            for (std::int64_t t = 0; t < std::abs(n); ++t) {
              v = restricted_power(split, i, sign > 0 ? t : -t, sign) * v;
              const double r = v.norm();
              log_growth += std::log(r);
              v /= r;
            }
            const double rate = log_growth / static_cast<double>(n);
            const double bound = std::log(kappa) / static_cast<double>(std::abs(n)) + dev + 1e-9;
            growth.record(bound - std::abs(rate - b.exponent), 0.0);
          }
        }
    }
  }

  std::vector<Vector> full_vectors;
  for (int t = 0; t < d; ++t) full_vectors.push_back(Vector::Unit(d, t));
  for (int t = 0; t < random_vectors; ++t) full_vectors.push_back(random_vector(d));
  std::vector<Matrix> random_maps;
  for (int t = 0; t < random_vectors; ++t) {
    Matrix r(d, d);
    for (int x = 0; x < d; ++x) r.col(x) = random_vector(d);
    random_maps.push_back(r);
  }

  for (std::int64_t j = 0; j < m; ++j) {
    Matrix an = Matrix::Identity(d, d);
    for (std::int64_t n = 1; n <= m; ++n) {
      an = split.step(j + n - 1) * an;
      const double dn = static_cast<double>(n);
      if (!is_neg_inf(lambda1)) {
        const double bound = std::exp((lambda1 + delta) * dn);
        p_iii.record((bound - norm.operator_norm(j, j + n, an)) / bound, slack);
        for (const auto& u : full_vectors) {
          const double lhs = norm.sum_form(j + n, an * u);
          const double rhs = bound * norm.sum_form(j, u);
          s_iii.record((rhs - lhs) / rhs, slack);
        }
      }
      const double kj = norm.k_delta_tempered(j);
      const double kn = norm.k_delta_tempered(j + n);
      p_k.record(std::min(kj * std::exp(delta * dn) - kn, kn - kj * std::exp(-delta * dn)) / (kj * std::exp(delta * dn)),
                 1e-8);
    }

    p_iv.record(norm.gram_min_eigenvalue(j) - 1.0, 1e-8);
    std::vector<Matrix> maps = random_maps;
    maps.push_back(split.step(j));
    const double kx = norm.k_delta(j);
    const double ky = norm.k_delta(j + 1);
    for (const auto& bmat : maps) {
      const double e = operator_norm(bmat);
      if (e == 0.0) continue;
      const double l = norm.operator_norm(j, j + 1, bmat);
      p_iv.record(std::min(l - e / kx, ky * e - l) / (ky * e), slack);
    }

    const double len_bound = std::sqrt(static_cast<double>(norm.series_length(j)));
    for (const auto& u : full_vectors) {
      const double r = norm.sum_form(j, u) / norm.norm(j, u);
      rep.sum_to_inner_ratio_max = std::max(rep.sum_to_inner_ratio_max, r);
      s_eq.record(std::min(r - 1.0, (len_bound - r) / len_bound), slack);
    }
    rep.sum_to_inner_ratio_bound = std::max(rep.sum_to_inner_ratio_bound, len_bound);

    const double kopt = norm.k_delta(j);
    const double knext = norm.k_delta(j + 1);
    rep.optimal_k_growth_excess =
        std::max({rep.optimal_k_growth_excess, knext / (kopt * std::exp(delta)) - 1.0, kopt / (knext * std::exp(delta)) - 1.0});
  }
  inv.record(1e-8 - split.invariance_residual(), 0.0);

  rep.properties = {p_i, p_ii, p_iii, p_iv, p_k, s_i, s_ii, s_iii, s_eq, growth, inv};
  return rep;
}

}  // namespace lyaplab
