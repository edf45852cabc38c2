#pragma once

// Lyapunov spectra: the eigenvalue oracle at periodic orbits, the staged-QR
// finite-time estimator, Monte Carlo estimates under a shift-invariant law
// and the truncated Kingman averages.

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "lyaplab/cocycle.hpp"
#include "lyaplab/symbolic_dynamics.hpp"

namespace lyaplab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Exponents closer than group_tol(v) = 1e-6 * max(1, |v|) share a group.
double group_tol(double v) noexcept;
bool is_neg_inf(double v) noexcept;

struct ExponentGroup {
  double value;
  int multiplicity;
};

class LyapunovSpectrum {
 public:
  LyapunovSpectrum() = default;
  /// Sorts into non-increasing order.
  explicit LyapunovSpectrum(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  /// lambda_1 > ... > lambda_l with multiplicities; -inf, if present, is last.
  std::vector<ExponentGroup> groups() const;

 private:
  std::vector<double> values_;
};

struct SpectrumEstimate {
  std::vector<double> values;
  /// 0 for -inf entries.
  std::vector<double> standard_errors;
  /// Per index, how many samples froze that exponent at -inf.
  std::vector<int> deflated;
  std::int64_t n_steps = 0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  double deflation_log_threshold = -700.0;
};

/// gamma_i(A, p) = (1/n) log|eta_i| for the eigenvalues of A^n(p) by modulus.
/// Exponents whose eigenvalue is below 1e-4 of the leading one are taken
/// from the top eigenvalue of the compound product instead.
LyapunovSpectrum periodic_spectrum(const MatrixCocycle& a, const PeriodicOrbit& p);

/// Largest exponent only: (1/n) log of the spectral radius of A^n(p).
double periodic_top_exponent(const MatrixCocycle& a, const PeriodicOrbit& p);

struct FiniteTimeOptions {
  /// Steps of frame alignment along the backward orbit before x; negative
  /// means "same as n".
  std::int64_t warmup = -1;
  double deflation_log_threshold = -700.0;
};

/// (1/n) log sigma_i(A^n(x)) by staged Gram-Schmidt; a column whose residual
/// vanishes, or whose single-step log growth is below the threshold, is
/// frozen at -inf. Results are sorted.
std::vector<double> finite_time_spectrum(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n,
                                         const FiniteTimeOptions& options = {});

/// Median over `samples` seeded points of the finite-time spectrum; an index
/// is -inf when at least 90% of samples deflate there.
SpectrumEstimate ergodic_spectrum_estimate(const MatrixCocycle& a, const Subshift& space, const SymbolLaw& law,
                                           std::int64_t n, int samples, std::uint64_t seed, int workers = 1,
                                           const FiniteTimeOptions& options = {});

/// phi_n(x) = (1/n) log ||A^n(x)||.
double log_norm_growth(const MatrixCocycle& a, const SymbolicPoint& x, std::int64_t n);

struct KingmanResult {
  double value;
  int annihilated;
  int samples;
};

/// Mean over seeded samples of max(phi_n(x), -m).
KingmanResult kingman_upper(const MatrixCocycle& a, const Subshift& space, const SymbolLaw& law, std::int64_t n,
                            double m, int samples, std::uint64_t seed, int workers = 1);

/// gamma_i = S_i - S_{i-1} with S_i the top exponent of the i-th compound.
LyapunovSpectrum full_spectrum_via_exterior(const MatrixCocycle& a, const PeriodicOrbit& p);
SpectrumEstimate full_spectrum_via_exterior(const MatrixCocycle& a, const Subshift& space, const SymbolLaw& law,
                                            std::int64_t n, int samples, std::uint64_t seed, int workers = 1);

/// Runs body(i) for i in [0, count) on up to `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

}  // namespace lyaplab
