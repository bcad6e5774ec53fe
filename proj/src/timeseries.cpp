#include "saddlefit/timeseries.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace saddlefit {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void TimeSeries::push_back(double t, std::span<const double> x) {
  if (x.size() != dim) throw std::invalid_argument("TimeSeries::push_back: row length mismatch");
  times.push_back(t);
  values.insert(values.end(), x.begin(), x.end());
}

void TimeSeries::validate() const {
  if (dim == 0) throw std::invalid_argument("TimeSeries: dimension must be >= 1");
  if (values.size() != times.size() * dim) {
    throw std::invalid_argument("TimeSeries: value count does not match times x dim");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("TimeSeries: times must be strictly increasing (row " +
                                  std::to_string(k + 1) + ")");
    }
  }
}

void write_timeseries_csv(std::ostream& os, const TimeSeries& ts,
                          const std::vector<std::string>& names) {
  os << "t";
  for (std::size_t i = 0; i < ts.dim; ++i) {
    os << ',' << (i < names.size() ? names[i] : "x" + std::to_string(i + 1));
  }
  os << '\n';
  for (std::size_t k = 0; k < ts.size(); ++k) {
    os << csv_number(ts.times[k]);
    for (double v : ts.row(k)) os << ',' << csv_number(v);
    os << '\n';
  }
}

TimeSeries read_timeseries_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++lineno;
    if (blank(line)) continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw CsvError("empty input: expected header 't,x1[,x2,...]'", 0);
  if (header.size() < 2 || header[0] != "t") {
    throw CsvError("header must be 't,x1[,x2,...]'", lineno);
  }

  TimeSeries ts;
  ts.dim = header.size() - 1;
  std::vector<double> row(ts.dim);
  while (std::getline(is, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw CsvError("expected " + std::to_string(header.size()) + " fields, got " +
                         std::to_string(cells.size()),
                     lineno);
    }
    double t;
    if (!parse_double(cells[0], t) || !std::isfinite(t)) {
      throw CsvError("bad time value '" + cells[0] + "'", lineno);
    }
    for (std::size_t i = 0; i < ts.dim; ++i) {
      if (!parse_double(cells[i + 1], row[i]) || !std::isfinite(row[i])) {
        throw CsvError("bad value '" + cells[i + 1] + "' in column " + header[i + 1], lineno);
      }
    }
    if (!ts.times.empty() && !(t > ts.times.back())) {
      throw CsvError("times must be strictly increasing", lineno);
    }
    ts.push_back(t, row);
  }
  return ts;
}

TimeSeries read_timeseries_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'", 0);
  return read_timeseries_csv(in);
}

void write_timeseries_csv_file(const std::string& path, const TimeSeries& ts,
                               const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_timeseries_csv(out, ts, names);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("CsvTable: no column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = rows.at(row).at(col);
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v;
  if (!parse_double(s, v)) throw CsvError("not a number: '" + s + "'", row + 2);
  return v;
}

CsvTable read_csv_table(std::istream& is) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw CsvError("expected " + std::to_string(table.header.size()) + " fields", lineno);
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw CsvError("empty input", 0);
  return table;
}

void write_csv_table(std::ostream& os, const CsvTable& table) {
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

}  // namespace saddlefit
