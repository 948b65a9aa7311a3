#include "mmdcc/io/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mmdcc {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos
                        ? std::string()
                        : cell.substr(first, last - first + 1));
  }
  return cells;
}

double parse_cell(const std::string& cell, const std::string& path, int line) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw parse_error("non-numeric cell '" + cell + "'", path, line);
  return v;
}

}  // namespace

SampleTable ingest_samples(const std::string& path,
                           const std::vector<std::string>& required_columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file: " + path);

  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw parse_error("missing header row", path, line_no);

  int weight_col = -1;
  std::vector<int> value_cols;
  std::vector<std::string> value_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "weight") {
      weight_col = static_cast<int>(c);
    } else {
      value_cols.push_back(static_cast<int>(c));
      value_names.push_back(header[c]);
    }
  }
  for (const auto& required : required_columns)
    if (std::find(value_names.begin(), value_names.end(), required) ==
        value_names.end())
      throw parse_error("missing required column '" + required + "'", path, line_no);

  SampleTable table;
  table.columns = value_names;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw parse_error("expected " + std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()),
                        path, line_no);
    Eigen::VectorXd row(static_cast<Eigen::Index>(value_cols.size()));
    for (std::size_t k = 0; k < value_cols.size(); ++k)
      row(static_cast<Eigen::Index>(k)) =
          parse_cell(cells[static_cast<std::size_t>(value_cols[k])], path, line_no);
    table.rows.push_back(std::move(row));
    if (weight_col >= 0)
      weights.push_back(
          parse_cell(cells[static_cast<std::size_t>(weight_col)], path, line_no));
  }
  if (table.rows.empty()) throw parse_error("no data rows", path, line_no);

  const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
  if (weight_col < 0) {
    table.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  } else {
    table.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), n);
    const double sum = table.weights.sum();
    if (sum == 0.0 || !std::isfinite(sum))
      throw parse_error("weight column sums to zero", path, line_no);
    table.weights /= sum;
  }
  return table;
}

void write_samples(const std::string& path, const std::vector<std::string>& columns,
                   const std::vector<Eigen::VectorXd>& rows,
                   const Eigen::VectorXd* weights) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sample file: " + path);
  out << "# schema:";
  for (const auto& c : columns) out << ' ' << c;
  if (weights) out << " weight";
  out << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c ? "," : "") << columns[c];
  if (weights) out << ",weight";
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index k = 0; k < rows[r].size(); ++k)
      out << (k ? "," : "") << format_double(rows[r](k));
    if (weights) out << ',' << format_double((*weights)(static_cast<Eigen::Index>(r)));
    out << '\n';
  }
}

void emit_distribution_snapshot(const std::string& path,
                                const WeightedSampleSet& embedded,
                                const WeightedSampleSet& desired,
                                bool sort_by_value) {
  struct Row {
    double value, weight;
    const char* which;
  };
  std::vector<Row> rows;
  for (Eigen::Index i = 0; i < embedded.size(); ++i)
    rows.push_back({embedded.values(i), embedded.weights(i), "embedded"});
  for (Eigen::Index i = 0; i < desired.size(); ++i)
    rows.push_back({desired.values(i), desired.weights(i), "desired"});
  if (sort_by_value)
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.value < b.value; });

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write snapshot file: " + path);
  out << "# schema: value,weight,which\n";
  out << "value,weight,which\n";
  for (const auto& r : rows)
    out << format_double(r.value) << ',' << format_double(r.weight) << ','
        << r.which << '\n';
}

}  // namespace mmdcc
