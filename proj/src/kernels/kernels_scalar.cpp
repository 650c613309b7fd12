#include <cmath>

#include "sscope/kernels/kernels.hpp"

namespace sscope::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double sum_abs_pow_diff_scalar(double x, const double* y, std::size_t n, double alpha) {
    double acc = 0.0;
    if (alpha == 1.0) {
        for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x - y[i]);
    } else if (alpha == 2.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x - y[i];
            acc += d * d;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::fabs(x - y[i]), alpha);
    }
    return acc;
}

constexpr KernelTable kScalar{Isa::scalar, dot_scalar, sum_scalar, sum_abs_pow_diff_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace sscope::kernels
