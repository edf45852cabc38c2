#pragma once

// Experiment pipelines. Each returns a report whose verdicts name the
// acceptance criterion they support (AC1..AC9).

#include <cstdint>
#include <string>
#include <vector>

#include "lyaplab/config.hpp"
#include "lyaplab/report.hpp"
#include "lyaplab/spectrum.hpp"

namespace lyaplab {

ExperimentReport run_main_theorem(const ExperimentConfig& cfg);
ExperimentReport run_example_bound(const ExperimentConfig& cfg);
ExperimentReport run_semicontinuity(const ExperimentConfig& cfg);
ExperimentReport run_norm_properties(const ExperimentConfig& cfg);
ExperimentReport run_corollary_scan(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind and records the wall clock.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Monte Carlo spectrum estimate under the configured law.
ExperimentReport run_estimate(const ExperimentConfig& cfg);
/// Periodic spectra of every orbit up to max_period, cross-checked by the
/// three oracles.
ExperimentReport run_periodic_scan(const ExperimentConfig& cfg);
/// Closing certificates for seeded first recurrences and periodic inputs.
ExperimentReport run_closing_batch(const ExperimentConfig& cfg);

/// Wide CSV for an estimate report: gamma_i, then se_i, then n, samples, seed.
std::string estimate_csv(const ExperimentReport& report);

struct OracleRow {
  Word word;
  std::vector<double> eigen;     // periodic_spectrum
  std::vector<double> exterior;  // full_spectrum_via_exterior
  std::vector<double> finite;    // finite_time_spectrum over `periods` periods
  double max_error = 0.0;        // over finite entries
  bool pattern_match = true;     // -inf in the same places
};

struct OracleComparison {
  std::vector<OracleRow> rows;
  double max_error = 0.0;
  bool patterns_match = true;
};

OracleComparison compare_oracles(const MatrixCocycle& a, const Subshift& space, int max_period, int periods = 200,
                                 int workers = 1);

}  // namespace lyaplab
