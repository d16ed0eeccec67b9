#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mer {

// Dense row-major matrix of doubles. Rows are samples, columns are features.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }
  double* row_ptr(std::size_t i) { return data.data() + i * cols; }

  std::vector<double> row(std::size_t i) const {
    return std::vector<double>(row_ptr(i), row_ptr(i) + cols);
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = (*this)(i, j);
    return out;
  }

  // Row subset, preserving the order given in `idx`.
  Matrix take_rows(const std::vector<std::size_t>& idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= rows) throw std::out_of_range("Matrix::take_rows: index out of range");
      for (std::size_t j = 0; j < cols; ++j) out(i, j) = (*this)(idx[i], j);
    }
    return out;
  }

  // Column subset, preserving the order given in `idx`.
  Matrix take_cols(const std::vector<std::size_t>& idx) const {
    Matrix out(rows, idx.size());
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= cols) throw std::out_of_range("Matrix::take_cols: index out of range");
        out(i, j) = (*this)(i, idx[j]);
      }
    }
    return out;
  }
};

inline std::vector<double> take(const std::vector<double>& v,
                                const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v.at(i));
  return out;
}

}  // namespace mer
