#include <cstdlib>
#include <string_view>

#include "sscope/kernels/kernels.hpp"

namespace sscope::kernels {

#if !defined(SSCOPE_HAVE_AVX2)
const KernelTable* detail::avx2_table() noexcept { return nullptr; }
#endif
#if !defined(SSCOPE_HAVE_NEON)
const KernelTable* detail::neon_table() noexcept { return nullptr; }
#endif

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "scalar";
}

const KernelTable* table_for(Isa isa) noexcept {
    switch (isa) {
    case Isa::scalar:
        return &scalar_table();
    case Isa::avx2:
#if defined(SSCOPE_HAVE_AVX2)
        __builtin_cpu_init();
        if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return detail::avx2_table();
#endif
        return nullptr;
    case Isa::neon:
        return detail::neon_table();  // baseline on aarch64
    }
    return nullptr;
}

namespace {

const KernelTable& select() noexcept {
    if (const char* forced = std::getenv("SSCOPE_ISA")) {
        const std::string_view name{forced};
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
            if (name == to_string(isa))
                if (const KernelTable* t = table_for(isa)) return *t;
    }
    if (const KernelTable* t = table_for(Isa::avx2)) return *t;
    if (const KernelTable* t = table_for(Isa::neon)) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

double pairwise_within(std::span<const double> x, double alpha) noexcept {
    const KernelTable& k = active();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        total += k.sum_abs_pow_diff(x[i], x.data() + i + 1, x.size() - i - 1, alpha);
    return total;
}

double pairwise_between(std::span<const double> x, std::span<const double> y, double alpha) noexcept {
    const KernelTable& k = active();
    double total = 0.0;
    for (double xi : x) total += k.sum_abs_pow_diff(xi, y.data(), y.size(), alpha);
    return total;
}

}  // namespace sscope::kernels
