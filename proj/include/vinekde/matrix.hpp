#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vinekde {

//! Dense row-major matrix of doubles; rows are observations, columns variables.
struct Matrix {
  std::size_t rows{0};
  std::size_t cols{0};
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }

  std::vector<double> column(std::size_t c) const {
    if (c >= cols) throw std::out_of_range("Matrix::column index out of range");
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = data[r * cols + c];
    return out;
  }
};

} // namespace vinekde
