#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sscope/kernels/kernels.hpp"

using namespace sscope;

namespace {

bool close(double a, double b, double rel = 1e-12) {
    return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

std::vector<const kernels::KernelTable*> variants() {
    std::vector<const kernels::KernelTable*> out;
    for (auto isa : {kernels::Isa::avx2, kernels::Isa::neon})
        if (auto* t = kernels::table_for(isa)) out.push_back(t);
    return out;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("simd variants agree with the scalar reference") {
    const auto& ref = kernels::scalar_table();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const auto tables = variants();
    MESSAGE("active isa: " << kernels::to_string(kernels::active().isa) << ", variants tested: " << tables.size());
    for (const auto* t : tables) {
        for (std::size_t n = 0; n < 140; ++n) {
            std::vector<double> a(n), b(n);
            for (auto& v : a) v = u(rng);
            for (auto& v : b) v = u(rng);
            CHECK(close(t->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n)));
            CHECK(close(t->sum(a.data(), n), ref.sum(a.data(), n)));
            const double x = u(rng);
            for (double alpha : {0.5, 1.0, 1.5, 2.0})
                CHECK(close(t->sum_abs_pow_diff(x, a.data(), n, alpha), ref.sum_abs_pow_diff(x, a.data(), n, alpha)));
        }
    }
}

TEST_CASE("scalar kernels match direct loops") {
    const auto& ref = kernels::scalar_table();
    const std::vector<double> a{1, -2, 3.5, 4};
    const std::vector<double> b{2, 0.5, -1, 1};
    CHECK(ref.dot(a.data(), b.data(), 4) == doctest::Approx(2 - 1 - 3.5 + 4));
    CHECK(ref.sum(a.data(), 4) == doctest::Approx(6.5));
    CHECK(ref.sum_abs_pow_diff(1.0, a.data(), 4, 1.0) == doctest::Approx(0 + 3 + 2.5 + 3));
    CHECK(ref.sum_abs_pow_diff(1.0, a.data(), 4, 2.0) == doctest::Approx(0 + 9 + 6.25 + 9));
}

TEST_CASE("pairwise sums match brute force") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(2 + rng() % 50), y(2 + rng() % 50);
        for (auto& v : x) v = g(rng);
        for (auto& v : y) v = g(rng);
        for (double alpha : {0.5, 1.0, 1.7}) {
            double within = 0, between = 0;
            for (std::size_t i = 0; i < x.size(); ++i)
                for (std::size_t k = i + 1; k < x.size(); ++k) within += std::pow(std::fabs(x[i] - x[k]), alpha);
            for (double a : x)
                for (double b : y) between += std::pow(std::fabs(a - b), alpha);
            CHECK(close(kernels::pairwise_within(x, alpha), within, 1e-11));
            CHECK(close(kernels::pairwise_between(x, y, alpha), between, 1e-11));
        }
    }
}

}
