#pragma once

// Data-parallel inner loops used by the numeric filters. Each kernel has a
// scalar reference implementation and vector variants; the variant is
// picked once at runtime from CPU features (override with the environment
// variable SSCOPE_ISA=scalar|avx2|neon). Variants agree with the scalar
// reference up to floating-point summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace sscope::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    Isa isa;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[i]
    double (*sum)(const double* a, std::size_t n);
    // sum_i |x - y[i]|^alpha
    double (*sum_abs_pow_diff)(double x, const double* y, std::size_t n, double alpha);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* table_for(Isa isa) noexcept;
// The table selected for this process.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline double sum(std::span<const double> a) noexcept { return active().sum(a.data(), a.size()); }

inline double sum_abs_pow_diff(double x, std::span<const double> y, double alpha) noexcept {
    return active().sum_abs_pow_diff(x, y.data(), y.size(), alpha);
}

// sum_{i<k} |x[i] - x[k]|^alpha
double pairwise_within(std::span<const double> x, double alpha) noexcept;
// sum_{i,j} |x[i] - y[j]|^alpha
double pairwise_between(std::span<const double> x, std::span<const double> y, double alpha) noexcept;

namespace detail {
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;
}  // namespace detail

}  // namespace sscope::kernels
