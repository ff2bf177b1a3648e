#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tempocomp/errors.hpp"

namespace tempocomp {

// Dense row-major real matrix. Plain storage; the engine and the oracle do
// their own loops over rows.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(size_t r, size_t c, std::vector<double> d);

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(size_t r) const { return {data.data() + r * cols, cols}; }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

void ensure_finite(std::span<const double> v, const char* what);

double max_abs(std::span<const double> v);

double max_abs_diff(std::span<const double> a, std::span<const double> b);

// Sample Pearson correlation. Throws DimensionError on length mismatch or
// empty input, NumericError when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace tempocomp
