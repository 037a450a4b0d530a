#pragma once

#include <string>
#include <vector>

#include "vinekde/matrix.hpp"

namespace vinekde {

struct NumericCsv {
  std::vector<std::string> header;
  Matrix values;
};

//! Comma-separated, header row required, '.' decimal. Throws
//! std::invalid_argument with row/column context on malformed cells.
NumericCsv read_numeric_csv(const std::string& path);

void write_numeric_csv(const std::string& path,
                       const std::vector<std::string>& header,
                       const Matrix& values);

std::string format_full_precision(double v);

} // namespace vinekde
