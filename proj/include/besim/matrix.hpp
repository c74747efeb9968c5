#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "besim/errors.hpp"

namespace besim {

using Vec = std::vector<double>;

// Dense row-major matrix. Storage is double throughout; reductions stay in
// double so gradient checks hold to 1e-5.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  double* row_ptr(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row_ptr(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

  size_t size() const { return data.size(); }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

bool all_finite(const Matrix& m);
bool all_finite(const Vec& v);

Matrix matmul(const Matrix& a, const Matrix& b);

// out = W * v
void matvec(const Matrix& w, const Vec& v, Vec& out);

// out += W^T * dy
void matvec_t_add(const Matrix& w, const Vec& dy, Vec& out);

// dw += dy * v^T
void outer_add(Matrix& dw, const Vec& dy, const Vec& v);

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace besim
