#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

// Energy-statistic divergence between two samples X (size m) and Y (size n):
//   E = 2/(mn) sum|Xi-Yj|^a - C(m,2)^-1 sum_{i<k}|Xi-Xk|^a - C(n,2)^-1 sum_{j<k}|Yj-Yk|^a
//   Q = mn/(m+n) * E
struct Divergence {
    double e_hat = 0.0;
    double q_hat = 0.0;
};

// Requires |X|, |Y| >= 2 and alpha in (0, 2].
Divergence sample_divergence(std::span<const double> x, std::span<const double> y, double alpha = 1.0);

struct SplitCandidate {
    std::size_t index = 0;  // first element of the right part
    double q_hat = 0.0;
};

// The split tau in [min_size, n - min_size] maximizing Q(x[0,tau), x[tau,n)),
// earliest index on ties; nullopt when n < 2 * min_size. O(n^2) time, O(n)
// memory: the within/between sums are updated incrementally as tau moves.
std::optional<SplitCandidate> best_split(std::span<const double> x, double alpha, std::size_t min_size);

// Counter-based generator: the k-th draw depends only on (seed, stream, k).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next() noexcept;
    // Uniform in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

template <typename T>
void shuffle(std::span<T> values, CounterRng& rng) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

struct SegmentationParams {
    double alpha = 1.0;
    std::size_t min_size = 30;
    std::size_t n_permutations = 199;
    double p_threshold = 0.05;
    std::uint64_t seed = 0;

    static SegmentationParams from_json(const json& params);
};

struct AcceptedSplit {
    std::size_t index = 0;
    double q_hat = 0.0;
    double p_value = 0.0;
};

struct SegmentationResult {
    std::vector<std::size_t> change_points;                   // increasing
    std::vector<std::pair<std::size_t, std::size_t>> segments; // half-open, partition [0, n)
    std::vector<AcceptedSplit> splits;                        // in acceptance order
};

// Divisive bisection: repeatedly take the best split over all current
// segments, accept it when its permutation p-value
//   (1 + #{b : Q_b >= Q_obs}) / (n_permutations + 1)
// is at most p_threshold (Q_b is the best-split statistic of the b-th
// seeded shuffle of that segment), and stop at the first rejection.
// Series shorter than 2 * min_size come back as a single segment.
SegmentationResult e_divisive(std::span<const double> series, const SegmentationParams& params = {});

// Runs e_divisive over the voiced samples of a continuous stream and returns
// one EventSpan per segment, from the first to the last sample time of the
// segment. Spans that begin at an accepted split carry {"q_hat","p_value"}
// in their meta field.
DataStream e_divisive_segments(const DataStream& series,
                               const SegmentationParams& params,
                               SegmentationResult* result = nullptr);

}  // namespace sscope
