// AVX2 variants. This TU is compiled with -mavx2 (no -mfma, so mul/sub pairs
// stay separate instructions and results match the scalar reference bit for
// bit). Tails are handled by the scalar code on the same lane schedule.

#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>

#include "nephra/kernels.hpp"

namespace nephra::kernels::detail {

namespace {
const __m256d kAbsMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
const __m256d kSignMask = _mm256_castsi256_pd(_mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ULL)));
}  // namespace

void prox_step_avx2(double* w, const double* grad, double step, double thresh, size_t n) {
    const __m256d vstep = _mm256_set1_pd(step);
    const __m256d vthresh = _mm256_set1_pd(thresh);
    const __m256d vzero = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_sub_pd(_mm256_loadu_pd(w + i),
                                        _mm256_mul_pd(vstep, _mm256_loadu_pd(grad + i)));
        const __m256d mag = _mm256_sub_pd(_mm256_and_pd(x, kAbsMask), vthresh);
        const __m256d shrunk = _mm256_or_pd(_mm256_max_pd(mag, vzero), _mm256_and_pd(x, kSignMask));
        // copysign(max(|x|-t, 0), x), with -0 collapsed to +0 when mag <= 0
        const __m256d keep = _mm256_cmp_pd(mag, vzero, _CMP_GT_OQ);
        _mm256_storeu_pd(w + i, _mm256_and_pd(shrunk, keep));
    }
    for (; i < n; ++i) {
        const double x = w[i] - step * grad[i];
        const double mag = std::fabs(x) - thresh;
        w[i] = mag > 0.0 ? std::copysign(mag, x) : 0.0;
    }
}

double l1_norm_avx2(const double* w, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_loadu_pd(w + i), kAbsMask));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (int j = 0; i < n; ++i, ++j) lanes[j] += std::fabs(w[i]);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double max_abs_avx2(const double* w, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_and_pd(_mm256_loadu_pd(w + i), kAbsMask));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (int j = 0; i < n; ++i, ++j) lanes[j] = std::max(lanes[j], std::fabs(w[i]));
    return std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
}

}  // namespace nephra::kernels::detail

#endif  // __x86_64__
