#include "vinekde/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vinekde {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

} // namespace

NumericCsv read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("file '" + path + "' is empty");
  NumericCsv csv;
  for (auto& h : split_line(strip_cr(line))) csv.header.push_back(h);
  const std::size_t cols = csv.header.size();
  if (cols == 0) throw std::invalid_argument("file '" + path + "' has no columns");

  std::vector<double> buf;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != cols)
      throw std::invalid_argument("file '" + path + "' row " +
                                  std::to_string(line_no) + ": expected " +
                                  std::to_string(cols) + " cells, got " +
                                  std::to_string(cells.size()));
    for (std::size_t c = 0; c < cols; ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing junk");
        buf.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("file '" + path + "' row " +
                                    std::to_string(line_no) + " column " +
                                    std::to_string(c + 1) +
                                    ": cannot parse '" + cells[c] + "' as a number");
      }
    }
    ++rows;
  }

  csv.values.rows = rows;
  csv.values.cols = cols;
  csv.values.data = std::move(buf);
  return csv;
}

std::string format_full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_numeric_csv(const std::string& path,
                       const std::vector<std::string>& header,
                       const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  for (std::size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << "\n";
  for (std::size_t r = 0; r < values.rows; ++r) {
    for (std::size_t c = 0; c < values.cols; ++c)
      out << (c ? "," : "") << format_full_precision(values.at(r, c));
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

} // namespace vinekde
