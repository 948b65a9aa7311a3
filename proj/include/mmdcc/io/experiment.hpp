#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmdcc/io/config.hpp"

namespace mmdcc {

struct SeedRow {
  std::uint64_t seed = 0;
  SolverReport report;
};

struct ExperimentOutput {
  std::vector<SeedRow> rows;
  std::string report_path;
  std::string summary_path;
};

// One configured solve (no file output); the building block for everything
// below and for the test suites.
SolverReport run_single(const ExperimentConfig& config, std::uint64_t seed);

// All configured seeds; writes report.csv and summary.csv under out_dir.
ExperimentOutput run_experiment(const ExperimentConfig& config);

struct SweepRow {
  double value = 0.0;
  double mean_cost = 0.0;
  double mean_eta = 0.0;
  double mean_mmd = 0.0;
  int seeds = 0;
};

// Re-runs the experiment for each value of `param` ("d", "rho1", "rho2" or
// "n") and writes sweep_<param>.csv plus per-value report directories.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                const std::string& param,
                                const std::vector<double>& values);

// Column header of report.csv for a given configuration.
std::vector<std::string> report_columns(const ExperimentConfig& config);

}  // namespace mmdcc
