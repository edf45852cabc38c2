#include "lyaplab/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "lyaplab/errors.hpp"
#include "lyaplab/exterior.hpp"
#include "lyaplab/random.hpp"

namespace lyaplab {

double group_tol(double v) noexcept { return 1e-6 * std::max(1.0, std::abs(v)); }

bool is_neg_inf(double v) noexcept { return std::isinf(v) && v < 0.0; }

LyapunovSpectrum::LyapunovSpectrum(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (std::isnan(v) || (std::isinf(v) && v > 0)) throw Error("spectrum entries must be finite or -inf");
  std::sort(values_.begin(), values_.end(), std::greater<>());
}

std::vector<ExponentGroup> LyapunovSpectrum::groups() const {
  std::vector<ExponentGroup> out;
  for (double v : values_) {
    if (!out.empty()) {
      auto& g = out.back();
      const bool both_inf = is_neg_inf(g.value) && is_neg_inf(v);
      const bool close = !is_neg_inf(g.value) && !is_neg_inf(v) && g.value - v < group_tol(g.value);
      if (both_inf || close) {
        ++g.multiplicity;
        continue;
      }
    }
    out.push_back({v, 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// periodic oracle

namespace {

// Eigenvalues below this fraction of ||P|| are taken from compound products.
constexpr double kDirectEigenFloor = 1e-4;

/// log|eta_i| of the eigenvalues of m, non-increasing; exact zeros give -inf.
std::vector<double> log_eigen_moduli(const Matrix& m) {
  std::vector<double> out;
  if (m.rows() == 1) {
    out.push_back(std::log(std::abs(m(0, 0))));
    return out;
  }
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue iteration did not converge");
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(std::log(std::abs(es.eigenvalues()(i))));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Total log spectral radius of A^n(x) (not divided by n).
double log_spectral_radius(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n) {
  const ScaledProduct sp = product_scaled(a, x, n);
  if (sp.annihilated()) return kNegInf;
  return sp.log_scale + log_eigen_moduli(sp.unit_part).front();
}

}  // namespace

LyapunovSpectrum periodic_spectrum(const MatrixCocycle& a, const PeriodicOrbit& p) {
  const std::int64_t n = p.period();
  const int d = a.dimension();
  const ScaledProduct sp = product_scaled(a, p.representative(), n);
  if (sp.annihilated()) return LyapunovSpectrum(std::vector<double>(static_cast<std::size_t>(d), kNegInf));

  const auto logs = log_eigen_moduli(sp.unit_part);
  const double unit_norm = std::log(operator_norm(sp.unit_part));
  std::vector<double> total(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) total[i] = sp.log_scale + logs[i];

  // small eigenvalues carry an absolute error of order eps*||P||; the
  // compound products resolve them factor by factor
  std::size_t first_small = logs.size();
  if (d <= kMaxDimension)
    for (std::size_t i = 1; i < logs.size(); ++i)
      if (logs[i] - unit_norm < std::log(kDirectEigenFloor)) {
        first_small = i;
        break;
      }
  if (first_small < logs.size()) {
    double prev = 0.0;
    for (std::size_t j = 0; j < first_small; ++j) prev += total[j];
    for (std::size_t i = first_small; i < logs.size(); ++i) {
      if (is_neg_inf(prev)) {
        total[i] = kNegInf;
        continue;
      }
      const double s = log_spectral_radius(induced_cocycle(a, static_cast<int>(i) + 1), p.representative(), n);
      total[i] = is_neg_inf(s) ? kNegInf : s - prev;
      prev = s;
    }
  }
  std::vector<double> values(total.size());
  for (std::size_t i = 0; i < total.size(); ++i)
    values[i] = is_neg_inf(total[i]) ? kNegInf : total[i] / static_cast<double>(n);
  return LyapunovSpectrum(std::move(values));
}

double periodic_top_exponent(const MatrixCocycle& a, const PeriodicOrbit& p) {
  const double s = log_spectral_radius(a, p.representative(), p.period());
  return is_neg_inf(s) ? kNegInf : s / static_cast<double>(p.period());
}

// ---------------------------------------------------------------------------
// staged QR

namespace {

struct Frame {
  Matrix q;                 // d x k orthonormal columns
  std::vector<int> origin;  // original column of each live column
};

Frame identity_frame(int d) {
  Frame f{Matrix::Identity(d, d), {}};
  for (int j = 0; j < d; ++j) f.origin.push_back(j);
  return f;
}

/// Advances the frame `steps` times from x; adds the log growths of the
/// surviving columns to `logs` and marks frozen columns in `dead`.
void advance(const MatrixCocycle& a, SymbolicPoint y, std::int64_t steps, Frame& frame, std::vector<double>& logs,
             std::vector<bool>& dead, double threshold) {
  // Neumaier compensation for the running log sums
  std::vector<double> carry(logs.size(), 0.0);
  for (std::int64_t k = 0; k < steps && frame.q.cols() > 0; ++k) {
    const Matrix img = a.evaluate(y) * frame.q;
    y = y.shifted(1);
    Matrix next(img.rows(), img.cols());
    std::vector<int> origin;
    Eigen::Index kept = 0;
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      Vector v = img.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index c = 0; c < kept; ++c) v -= next.col(c).dot(v) * next.col(c);
      const double r = v.norm();
      const int o = frame.origin[static_cast<std::size_t>(j)];
      if (r == 0.0 || std::log(r) < threshold) {
        dead[static_cast<std::size_t>(o)] = true;
        continue;
      }
      next.col(kept++) = v / r;
      origin.push_back(o);
      const auto idx = static_cast<std::size_t>(o);
      const double term = std::log(r);
      const double sum = logs[idx] + term;
      carry[idx] += std::abs(logs[idx]) >= std::abs(term) ? (logs[idx] - sum) + term : (term - sum) + logs[idx];
      logs[idx] = sum;
    }
    frame.q = next.leftCols(kept);
    frame.origin = std::move(origin);
  }
  for (std::size_t i = 0; i < logs.size(); ++i) logs[i] += carry[i];
}

}  // namespace

std::vector<double> finite_time_spectrum(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n,
                                         const FiniteTimeOptions& options) {
  if (n < 1) throw Error("finite_time_spectrum: n must be >= 1");
  const int d = a.dimension();
  const std::int64_t warmup = options.warmup < 0 ? n : options.warmup;

  Frame frame = identity_frame(d);
  if (warmup > 0) {
    std::vector<double> scratch(static_cast<std::size_t>(d), 0.0);
    std::vector<bool> dead(static_cast<std::size_t>(d), false);
    advance(a, x.shifted(-warmup), warmup, frame, scratch, dead, options.deflation_log_threshold);
    // a frame that lost rank on the way in is no better than the identity
    if (frame.q.cols() < d) frame = identity_frame(d);
    for (int j = 0; j < d; ++j) frame.origin[static_cast<std::size_t>(j)] = j;
  }
  std::vector<double> logs(static_cast<std::size_t>(d), 0.0);
  std::vector<bool> dead(static_cast<std::size_t>(d), false);
  advance(a, x, n, frame, logs, dead, options.deflation_log_threshold);

  std::vector<double> out(static_cast<std::size_t>(d));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = dead[j] ? kNegInf : logs[j] / static_cast<double>(n);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (count <= 0) return;
  const int threads = std::max(1, std::min(workers, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

SymbolicPoint sample_point(std::uint64_t seed, int index, const SymbolLaw& law) {
  return SymbolicPoint::seeded(derive_seed(seed, static_cast<std::uint64_t>(index)), law);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SpectrumEstimate aggregate(const std::vector<std::vector<double>>& rows, std::int64_t n, std::uint64_t seed,
                           double threshold) {
  SpectrumEstimate est;
  est.n_steps = n;
  est.n_samples = static_cast<int>(rows.size());
  est.seed = seed;
  est.deflation_log_threshold = threshold;
  const std::size_t d = rows.front().size();
  std::vector<std::pair<double, double>> cols;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> finite;
    int deflated = 0;
    for (const auto& r : rows) {
      if (is_neg_inf(r[i]))
        ++deflated;
      else
        finite.push_back(r[i]);
    }
    est.deflated.push_back(deflated);
    if (static_cast<double>(deflated) >= 0.9 * static_cast<double>(rows.size())) {
      cols.emplace_back(kNegInf, 0.0);
      continue;
    }
    double mean = 0.0;
    for (double v : finite) mean += v;
    mean /= static_cast<double>(finite.size());
    double ss = 0.0;
    for (double v : finite) ss += (v - mean) * (v - mean);
    const double se =
        finite.size() > 1 ? std::sqrt(ss / static_cast<double>(finite.size() - 1) / static_cast<double>(finite.size()))
                          : 0.0;
    cols.emplace_back(median(finite), se);
  }
  std::stable_sort(cols.begin(), cols.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  for (const auto& [v, se] : cols) {
    est.values.push_back(v);
    est.standard_errors.push_back(se);
  }
  return est;
}

}  // namespace

SpectrumEstimate ergodic_spectrum_estimate(const MatrixCocycle& a, const Subshift& space, const SymbolLaw& law,
                                           std::int64_t n, int samples, std::uint64_t seed, int workers,
                                           const FiniteTimeOptions& options) {
  space.check_law(law);
  if (samples <= 0) throw DegenerateSample("ergodic estimate needs at least one sample");
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(samples));
  parallel_for(samples, workers, [&](int s) {
    rows[static_cast<std::size_t>(s)] = finite_time_spectrum(a, sample_point(seed, s, law), n, options);
  });
  return aggregate(rows, n, seed, options.deflation_log_threshold);
}

double log_norm_growth(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n) {
  if (n < 1) throw Error("log_norm_growth: n must be >= 1");
  return product_scaled(a, x, n).log_norm() / static_cast<double>(n);
}

KingmanResult kingman_upper(const MatrixCocycle& a, const Subshift& space, const SymbolLaw& law, std::int64_t n,
                            double m, int samples, std::uint64_t seed, int workers) {
  space.check_law(law);
  if (!(m > 0.0)) throw Error("kingman_upper: truncation level must be positive");
  if (samples <= 0) throw DegenerateSample("kingman_upper needs at least one sample");
  std::vector<double> phi(static_cast<std::size_t>(samples));
  parallel_for(samples, workers,
               [&](int s) { phi[static_cast<std::size_t>(s)] = log_norm_growth(a, sample_point(seed, s, law), n); });
  KingmanResult out{0.0, 0, samples};
  for (double v : phi) {
    if (is_neg_inf(v)) ++out.annihilated;
    out.value += std::max(v, -m);
  }
  out.value /= samples;
  return out;
}

LyapunovSpectrum full_spectrum_via_exterior(const MatrixCocycle& a, const PeriodicOrbit& p) {
  const int d = a.dimension();
  std::vector<double> gamma;
  double prev = 0.0;
  for (int i = 1; i <= d; ++i) {
    if (is_neg_inf(prev)) {
      gamma.push_back(kNegInf);
      continue;
    }
    const double s = periodic_top_exponent(induced_cocycle(a, i), p);
    gamma.push_back(is_neg_inf(s) ? kNegInf : s - prev);
    prev = s;
  }
  return LyapunovSpectrum(std::move(gamma));
}

SpectrumEstimate full_spectrum_via_exterior(const MatrixCocycle& a, const Subshift& space, const SymbolLaw& law,
                                            std::int64_t n, int samples, std::uint64_t seed, int workers) {
  space.check_law(law);
  if (samples <= 0) throw DegenerateSample("exterior estimate needs at least one sample");
  const int d = a.dimension();
  std::vector<MatrixCocycle> powers;
  for (int i = 1; i <= d; ++i) powers.push_back(induced_cocycle(a, i));
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(samples));
  parallel_for(samples, workers, [&](int s) {
    const SymbolicPoint x = sample_point(seed, s, law);
    std::vector<double> gamma;
    double prev = 0.0;
    for (const auto& power : powers) {
      if (is_neg_inf(prev)) {
        gamma.push_back(kNegInf);
        continue;
      }
      const double si = log_norm_growth(power, x, n);
      gamma.push_back(is_neg_inf(si) ? kNegInf : si - prev);
      prev = si;
    }
    std::sort(gamma.begin(), gamma.end(), std::greater<>());
    rows[static_cast<std::size_t>(s)] = std::move(gamma);
  });
  return aggregate(rows, n, seed, -700.0);
}

}  // namespace lyaplab
