// lyaplab command line: spectrum estimates, periodic scans, closing batches,
// norm checks and the experiment pipelines.
//
// Exit status: 0 when every verdict passes, 1 when a verdict fails, 2 on a
// configuration or runtime error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lyaplab/config.hpp"
#include "lyaplab/errors.hpp"
#include "lyaplab/experiments.hpp"
#include "lyaplab/report.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> workers;
  std::string kind;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "TOML experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

lyaplab::ExperimentConfig load(const Options& o, std::optional<std::string> kind) {
  lyaplab::ConfigOverrides ov;
  ov.kind = std::move(kind);
  ov.seed = o.seed;
  ov.workers = o.workers;
  ov.out_dir = o.out;
  ov.format = o.format;
  if (o.config.empty()) return lyaplab::parse_config("", "<command line>", ov);
  return lyaplab::load_config(o.config, ov);
}

int finish(const lyaplab::ExperimentReport& report, const lyaplab::ExperimentConfig& cfg) {
  std::string path;
  if (report.kind == "estimate" && cfg.format == "csv") {
    const std::string csv = lyaplab::estimate_csv(report);
    path = cfg.out_dir + "/estimate-seed" + std::to_string(report.seed) + ".csv";
    lyaplab::write_text(path, csv);
    std::cout << csv;
  } else {
    path = lyaplab::write_report(report, cfg.out_dir, cfg.format);
  }
  for (const auto& v : report.verdicts)
    std::cout << (v.passed ? "PASS " : "FAIL ") << v.criterion << " " << v.check << ": " << v.detail << "\n";
  std::cout << "report " << path << " hash " << lyaplab::report_hash(report) << "\n";
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov exponents of semi-invertible cocycles over shifts"};
  app.require_subcommand(1);
  Options o;

  auto* estimate = app.add_subcommand("estimate", "Monte Carlo spectrum under the configured measure");
  auto* periodic = app.add_subcommand("periodic", "Periodic spectra of all orbits up to max_period");
  auto* close = app.add_subcommand("close", "Closing certificates for seeded recurrences");
  auto* verify = app.add_subcommand("verify-norms", "Lyapunov norm properties on periodic orbits");
  auto* experiment = app.add_subcommand("experiment", "Run an experiment pipeline");
  for (auto* cmd : {estimate, periodic, close, verify, experiment}) add_common(cmd, o);
  experiment->add_option("kind", o.kind, "main_theorem | example_bound | semicontinuity | norm_properties | corollary_scan")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (estimate->parsed()) {
      const auto cfg = load(o, std::nullopt);
      return finish(lyaplab::run_estimate(cfg), cfg);
    }
    if (periodic->parsed()) {
      const auto cfg = load(o, std::nullopt);
      return finish(lyaplab::run_periodic_scan(cfg), cfg);
    }
    if (close->parsed()) {
      const auto cfg = load(o, std::nullopt);
      return finish(lyaplab::run_closing_batch(cfg), cfg);
    }
    if (verify->parsed()) {
      const auto cfg = load(o, std::string("norm_properties"));
      return finish(lyaplab::run_experiment(cfg), cfg);
    }
    const auto cfg = load(o, o.kind);
    return finish(lyaplab::run_experiment(cfg), cfg);
  } catch (const lyaplab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
