// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <cmath>

#include <immintrin.h>

#include "sscope/kernels/kernels.hpp"

namespace sscope::kernels::detail {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i];
    return acc;
}

double sum_abs_pow_diff_avx2(double x, const double* y, std::size_t n, double alpha) {
    const __m256d vx = _mm256_set1_pd(x);
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    if (alpha == 1.0) {
        for (; i + 4 <= n; i += 4) {
            __m256d d = _mm256_sub_pd(vx, _mm256_loadu_pd(y + i));
            acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
        }
        double total = hsum(acc);
        for (; i < n; ++i) total += std::fabs(x - y[i]);
        return total;
    }
    if (alpha == 2.0) {
        for (; i + 4 <= n; i += 4) {
            __m256d d = _mm256_sub_pd(vx, _mm256_loadu_pd(y + i));
            acc = _mm256_fmadd_pd(d, d, acc);
        }
        double total = hsum(acc);
        for (; i < n; ++i) {
            const double d = x - y[i];
            total += d * d;
        }
        return total;
    }
    // No vector pow: differences are vectorized, the power is applied per lane.
    alignas(32) double lanes[4];
    double total = 0.0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(vx, _mm256_loadu_pd(y + i)));
        _mm256_store_pd(lanes, d);
        total += (std::pow(lanes[0], alpha) + std::pow(lanes[1], alpha)) +
                 (std::pow(lanes[2], alpha) + std::pow(lanes[3], alpha));
    }
    for (; i < n; ++i) total += std::pow(std::fabs(x - y[i]), alpha);
    return total;
}

constexpr KernelTable kAvx2{Isa::avx2, dot_avx2, sum_avx2, sum_abs_pow_diff_avx2};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace sscope::kernels::detail
