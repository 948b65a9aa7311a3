#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmdcc/embedding.hpp"

namespace mmdcc {

struct parse_error : std::runtime_error {
  parse_error(const std::string& what, const std::string& file, int line)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_number(line) {}
  int line_number;
};

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

struct SampleTable {
  std::vector<std::string> columns;   // coordinate columns, file order
  std::vector<Eigen::VectorXd> rows;  // one entry per data row
  Eigen::VectorXd weights;            // normalized (uniform when absent)
};

// Comma-separated samples with a header row naming the coordinates; '#'
// lines are ignored and an optional "weight" column is normalized to sum 1.
// required_columns may be empty to accept any header.
SampleTable ingest_samples(const std::string& path,
                           const std::vector<std::string>& required_columns = {});

void write_samples(const std::string& path, const std::vector<std::string>& columns,
                   const std::vector<Eigen::VectorXd>& rows,
                   const Eigen::VectorXd* weights = nullptr);

// Diagnostic export of an embedded/desired sample pair as
// (value, weight, which) rows, optionally stable-sorted by value.
void emit_distribution_snapshot(const std::string& path,
                                const WeightedSampleSet& embedded,
                                const WeightedSampleSet& desired,
                                bool sort_by_value = false);

}  // namespace mmdcc
