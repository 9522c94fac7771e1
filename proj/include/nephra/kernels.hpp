#pragma once

#include <cstddef>
#include <string>

namespace nephra::kernels {

// Dense inner-loop kernels for the proximal-gradient solver. Each kernel has a
// scalar reference and an AVX2 variant selected at runtime. The scalar
// reductions accumulate in the same 4-lane interleaved order as the AVX2 code,
// so both backends produce bit-identical results and solver output does not
// depend on which one is dispatched.

enum class Backend { Auto, Scalar, Avx2 };

// Force a backend (tests, NEPHRA_KERNEL env). Avx2 on a machine without AVX2
// falls back to Scalar.
void set_backend(Backend b);
Backend active_backend();
std::string backend_name();

// w[i] = soft_threshold(w[i] - step * grad[i], thresh), elementwise.
void prox_step(double* w, const double* grad, double step, double thresh, size_t n);

// sum_i |w[i]|
double l1_norm(const double* w, size_t n);

// max_i |w[i]|; 0 for empty input.
double max_abs(const double* w, size_t n);

namespace detail {
void prox_step_scalar(double* w, const double* grad, double step, double thresh, size_t n);
double l1_norm_scalar(const double* w, size_t n);
double max_abs_scalar(const double* w, size_t n);
#if defined(__x86_64__)
void prox_step_avx2(double* w, const double* grad, double step, double thresh, size_t n);
double l1_norm_avx2(const double* w, size_t n);
double max_abs_avx2(const double* w, size_t n);
#endif
}  // namespace detail

}  // namespace nephra::kernels
