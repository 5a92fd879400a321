#include "treegan/kernels.hpp"

namespace treegan::kernels {

void matvec_serial(const double* w, const double* x, double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = w + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec(const double* w, const double* x, double* y, int rows, int cols) {
  if (static_cast<long long>(rows) * cols < kParallelThreshold) {
    matvec_serial(w, x, y, rows, cols);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = w + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec_t_accum_serial(const double* w, const double* g, double* x_grad, int rows, int cols) {
  for (int c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) acc += w[static_cast<size_t>(r) * cols + c] * g[r];
    x_grad[c] += acc;
  }
}

void matvec_t_accum(const double* w, const double* g, double* x_grad, int rows, int cols) {
  if (static_cast<long long>(rows) * cols < kParallelThreshold) {
    matvec_t_accum_serial(w, g, x_grad, rows, cols);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) acc += w[static_cast<size_t>(r) * cols + c] * g[r];
    x_grad[c] += acc;
  }
}

void outer_accum_serial(const double* g, const double* x, double* w_grad, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* row = w_grad + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += g[r] * x[c];
  }
}

void outer_accum(const double* g, const double* x, double* w_grad, int rows, int cols) {
  if (static_cast<long long>(rows) * cols < kParallelThreshold) {
    outer_accum_serial(g, x, w_grad, rows, cols);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    double* row = w_grad + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += g[r] * x[c];
  }
}

}  // namespace treegan::kernels
