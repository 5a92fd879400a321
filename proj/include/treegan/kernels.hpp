#pragma once

#include <cstddef>

namespace treegan::kernels {

// y = W x  (W row-major rows x cols). Serial versions are the reference
// implementations; the OpenMP versions must agree bit-for-bit (each output
// element is computed by exactly one thread in the same expression order).

void matvec_serial(const double* w, const double* x, double* y, int rows, int cols);
void matvec(const double* w, const double* x, double* y, int rows, int cols);

// x_grad += W^T g
void matvec_t_accum_serial(const double* w, const double* g, double* x_grad, int rows, int cols);
void matvec_t_accum(const double* w, const double* g, double* x_grad, int rows, int cols);

// W_grad += g x^T
void outer_accum_serial(const double* g, const double* x, double* w_grad, int rows, int cols);
void outer_accum(const double* g, const double* x, double* w_grad, int rows, int cols);

// Rough element-count threshold below which the parallel entry points stay
// serial (per-call fork overhead dominates for desk-scale models).
inline constexpr int kParallelThreshold = 64 * 1024;

}  // namespace treegan::kernels
