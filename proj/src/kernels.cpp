#include "nephra/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace nephra::kernels {

namespace detail {

void prox_step_scalar(double* w, const double* grad, double step, double thresh, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const double x = w[i] - step * grad[i];
        const double mag = std::fabs(x) - thresh;
        w[i] = mag > 0.0 ? std::copysign(mag, x) : 0.0;
    }
}

// Reductions use 4 interleaved accumulators, lane-matched to the AVX2 variant.
double l1_norm_scalar(const double* w, size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int j = 0; j < 4; ++j) acc[j] += std::fabs(w[i + j]);
    for (int j = 0; i < n; ++i, ++j) acc[j] += std::fabs(w[i]);
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double max_abs_scalar(const double* w, size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int j = 0; j < 4; ++j) acc[j] = std::max(acc[j], std::fabs(w[i + j]));
    for (int j = 0; i < n; ++i, ++j) acc[j] = std::max(acc[j], std::fabs(w[i]));
    return std::max(std::max(acc[0], acc[1]), std::max(acc[2], acc[3]));
}

}  // namespace detail

namespace {

bool avx2_available() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend g_requested = Backend::Auto;

Backend resolve() {
    Backend b = g_requested;
    if (b == Backend::Auto) {
        if (const char* env = std::getenv("NEPHRA_KERNEL")) {
            if (std::strcmp(env, "scalar") == 0) b = Backend::Scalar;
            else if (std::strcmp(env, "avx2") == 0) b = Backend::Avx2;
        }
    }
    if (b == Backend::Auto) b = avx2_available() ? Backend::Avx2 : Backend::Scalar;
    if (b == Backend::Avx2 && !avx2_available()) b = Backend::Scalar;
    return b;
}

}  // namespace

void set_backend(Backend b) { g_requested = b; }

Backend active_backend() { return resolve(); }

std::string backend_name() { return resolve() == Backend::Avx2 ? "avx2" : "scalar"; }

void prox_step(double* w, const double* grad, double step, double thresh, size_t n) {
#if defined(__x86_64__)
    if (resolve() == Backend::Avx2) {
        detail::prox_step_avx2(w, grad, step, thresh, n);
        return;
    }
#endif
    detail::prox_step_scalar(w, grad, step, thresh, n);
}

double l1_norm(const double* w, size_t n) {
#if defined(__x86_64__)
    if (resolve() == Backend::Avx2) return detail::l1_norm_avx2(w, n);
#endif
    return detail::l1_norm_scalar(w, n);
}

double max_abs(const double* w, size_t n) {
#if defined(__x86_64__)
    if (resolve() == Backend::Avx2) return detail::max_abs_avx2(w, n);
#endif
    return detail::max_abs_scalar(w, n);
}

}  // namespace nephra::kernels
