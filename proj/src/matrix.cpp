#include "besim/matrix.hpp"

namespace besim {

bool all_finite(const Matrix& m) {
  for (double x : m.data)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      const double* brow = b.row_ptr(k);
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

void matvec(const Matrix& w, const Vec& v, Vec& out) {
  require(static_cast<int>(v.size()) == w.cols, "matvec: dimension mismatch");
  out.resize(w.rows);
  for (int r = 0; r < w.rows; ++r) {
    const double* row = w.row_ptr(r);
    double s = 0.0;
    for (int c = 0; c < w.cols; ++c) s += row[c] * v[c];
    out[r] = s;
  }
}

void matvec_t_add(const Matrix& w, const Vec& dy, Vec& out) {
  require(static_cast<int>(dy.size()) == w.rows, "matvec_t_add: dimension mismatch");
  out.resize(w.cols, 0.0);
  for (int r = 0; r < w.rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double* row = w.row_ptr(r);
    for (int c = 0; c < w.cols; ++c) out[c] += g * row[c];
  }
}

void outer_add(Matrix& dw, const Vec& dy, const Vec& v) {
  require(static_cast<int>(dy.size()) == dw.rows && static_cast<int>(v.size()) == dw.cols,
          "outer_add: dimension mismatch");
  for (int r = 0; r < dw.rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    double* row = dw.row_ptr(r);
    for (int c = 0; c < dw.cols; ++c) row[c] += g * v[c];
  }
}

}  // namespace besim
