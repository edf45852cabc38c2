#pragma once

// Experiment configuration: one TOML file per run. Every default is
// resolved at load time and echoed back in the report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lyaplab/cocycle.hpp"
#include "lyaplab/symbolic_dynamics.hpp"

namespace lyaplab {

enum class ExperimentKind { main_theorem, example_bound, semicontinuity, norm_properties, corollary_scan };

std::string to_string(ExperimentKind kind);
/// Throws ConfigError naming the field.
ExperimentKind parse_kind(const std::string& text, const std::string& where = "experiment.kind");

struct Knobs {
  // Monte Carlo
  std::int64_t n = 20000;
  int samples = 20;
  // orbit scans
  int max_period = 12;
  int family_max = 8;
  // main theorem
  std::vector<int> levels{1, 2, 3, 4, 5, 6};
  std::int64_t max_n = std::int64_t{1} << 20;
  int word_length = 4;
  double tolerance = 0.05;
  double discrepancy_tolerance = 0.02;
  // norms
  std::vector<double> delta_fractions{0.25, 0.5, 0.75};
  std::vector<double> deltas;
  double delta_cap = 0.5;
  double min_gap = 0.2;
  int random_vectors = 3;
  // semicontinuity
  int max_order = 6;
  std::vector<std::int64_t> kingman_n{10, 20, 50};
  /// Truncation level; unset means m = n.
  std::optional<double> kingman_m;
  int kingman_samples = 2000;
  double kingman_min_drop = 1.0;
  // closing batch
  int closing_samples = 1000;
  int closing_level = 3;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::example_bound;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string source = "<config>";

  Subshift space = Subshift::full(2, 0.5);
  MatrixCocycle cocycle = constant_cocycle(Matrix::Identity(1, 1));
  std::string cocycle_type;
  std::optional<PaperExampleCocycle> paper;
  SymbolLaw law = SymbolLaw::bernoulli({0.5, 0.5});
  Knobs knobs;

  std::string out_dir = "reports";
  std::string format = "json";

  /// Resolved configuration, including defaults.
  nlohmann::ordered_json echo;
};

struct ConfigOverrides {
  std::optional<std::string> kind;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

/// Parses TOML text. Errors carry "source:line" and the dotted field name.
ExperimentConfig parse_config(const std::string& text, const std::string& source_name = "<config>",
                              const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// The cocycle B(0) = [[0,1],[0,0]], B(1) = 2 Id over two symbols.
MatrixCocycle nilpotent_pair_cocycle();

}  // namespace lyaplab
