#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace saddlefit {

/// Observations (t_k, x_k) with strictly increasing times; values are stored
/// row-major, one row of length `dim` per observation.
struct TimeSeries {
  std::size_t dim = 1;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  std::span<const double> row(std::size_t k) const { return {values.data() + k * dim, dim}; }
  std::span<double> row(std::size_t k) { return {values.data() + k * dim, dim}; }

  void push_back(double t, std::span<const double> x);
  /// Throws std::invalid_argument when times are not strictly increasing or
  /// the value count does not match.
  void validate() const;
};

/// Malformed CSV input; `line()` is 1-based (0 when not tied to a line).
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Header `t,x1[,x2,...]` then one row per observation.
void write_timeseries_csv(std::ostream& os, const TimeSeries& ts,
                          const std::vector<std::string>& names = {});
TimeSeries read_timeseries_csv(std::istream& is);
TimeSeries read_timeseries_csv_file(const std::string& path);
void write_timeseries_csv_file(const std::string& path, const TimeSeries& ts,
                               const std::vector<std::string>& names = {});

/// Plain comma-separated table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv_table(std::istream& is);
void write_csv_table(std::ostream& os, const CsvTable& table);

/// Shortest text that parses back to the same double.
std::string csv_number(double v);

}  // namespace saddlefit
