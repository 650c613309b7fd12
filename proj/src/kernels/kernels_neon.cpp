#include <cmath>

#include <arm_neon.h>

#include "sscope/kernels/kernels.hpp"

namespace sscope::kernels::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_neon(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
        acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i];
    return acc;
}

double sum_abs_pow_diff_neon(double x, const double* y, std::size_t n, double alpha) {
    const float64x2_t vx = vdupq_n_f64(x);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    double total = 0.0;
    if (alpha == 1.0) {
        for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabdq_f64(vx, vld1q_f64(y + i)));
        total = vaddvq_f64(acc);
        for (; i < n; ++i) total += std::fabs(x - y[i]);
        return total;
    }
    if (alpha == 2.0) {
        for (; i + 2 <= n; i += 2) {
            float64x2_t d = vsubq_f64(vx, vld1q_f64(y + i));
            acc = vfmaq_f64(acc, d, d);
        }
        total = vaddvq_f64(acc);
        for (; i < n; ++i) {
            const double d = x - y[i];
            total += d * d;
        }
        return total;
    }
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vabdq_f64(vx, vld1q_f64(y + i));
        total += std::pow(vgetq_lane_f64(d, 0), alpha) + std::pow(vgetq_lane_f64(d, 1), alpha);
    }
    for (; i < n; ++i) total += std::pow(std::fabs(x - y[i]), alpha);
    return total;
}

constexpr KernelTable kNeon{Isa::neon, dot_neon, sum_neon, sum_abs_pow_diff_neon};

}  // namespace

const KernelTable* neon_table() noexcept { return &kNeon; }

}  // namespace sscope::kernels::detail
