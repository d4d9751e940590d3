#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace kcl {

using Vector = std::vector<double>;

// Dense row-major matrix. Small enough at desk scale that plain loops beat
// any library dependency.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  std::span<double> row(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

// y = x^T W + b. W is (in x out); x has length W.rows, result length W.cols.
inline Vector affine(std::span<const double> x, const Matrix& w, const Vector& b) {
  Vector y(b);
  for (int i = 0; i < w.rows; ++i) {
    const double xi = x[static_cast<size_t>(i)];
    if (xi == 0.0) continue;
    const double* wrow = w.data.data() + static_cast<size_t>(i) * w.cols;
    for (int j = 0; j < w.cols; ++j) y[static_cast<size_t>(j)] += xi * wrow[j];
  }
  return y;
}

}  // namespace kcl
