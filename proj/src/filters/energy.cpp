#include "sscope/filters/energy.hpp"

#include <algorithm>
#include <cmath>

#include "sscope/core/error.hpp"
#include "sscope/kernels/kernels.hpp"

namespace sscope {
namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw Error(Errc::invalid_argument, "alpha must lie in (0, 2]");
}

double pairs(double n) { return n * (n - 1.0) / 2.0; }

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Divergence sample_divergence(std::span<const double> x, std::span<const double> y, double alpha) {
    check_alpha(alpha);
    if (x.size() < 2 || y.size() < 2) throw Error(Errc::invalid_argument, "sample_divergence needs |X|, |Y| >= 2");
    const double m = static_cast<double>(x.size());
    const double n = static_cast<double>(y.size());
    const double between = kernels::pairwise_between(x, y, alpha);
    const double within_x = kernels::pairwise_within(x, alpha);
    const double within_y = kernels::pairwise_within(y, alpha);
    Divergence d;
    d.e_hat = 2.0 * between / (m * n) - within_x / pairs(m) - within_y / pairs(n);
    d.q_hat = m * n / (m + n) * d.e_hat;
    return d;
}

std::optional<SplitCandidate> best_split(std::span<const double> x, double alpha, std::size_t min_size) {
    check_alpha(alpha);
    min_size = std::max<std::size_t>(min_size, 2);
    const std::size_t len = x.size();
    if (len < 2 * min_size) return std::nullopt;

    const auto& k = kernels::active();
    // before[t] = sum_{i<t} d(t,i), after[t] = sum_{j>t} d(t,j)
    std::vector<double> before(len), after(len);
    for (std::size_t t = 0; t < len; ++t) {
        before[t] = k.sum_abs_pow_diff(x[t], x.data(), t, alpha);
        after[t] = k.sum_abs_pow_diff(x[t], x.data() + t + 1, len - t - 1, alpha);
    }
    double within_right = 0.0;
    for (std::size_t t = 0; t < len; ++t) within_right += after[t];
    double within_left = 0.0;
    double between = 0.0;

    std::optional<SplitCandidate> best;
    for (std::size_t tau = 0; tau + min_size <= len; ++tau) {
        if (tau >= min_size) {
            const double m = static_cast<double>(tau);
            const double n = static_cast<double>(len - tau);
            const double e = 2.0 * between / (m * n) - within_left / pairs(m) - within_right / pairs(n);
            const double q = m * n / (m + n) * e;
            if (!best || q > best->q_hat) best = SplitCandidate{tau, q};
        }
        // Move element tau from the right part to the left part.
        within_left += before[tau];
        within_right -= after[tau];
        between += after[tau] - before[tau];
    }
    return best;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix(seed ^ mix(stream + kGolden))) {}

std::uint64_t CounterRng::next() noexcept { return mix(key_ + (++counter_) * kGolden); }

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
    // Lemire's multiply-and-reject.
    unsigned __int128 product = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            product = static_cast<unsigned __int128>(next()) * bound;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

SegmentationParams SegmentationParams::from_json(const json& p) {
    SegmentationParams out;
    out.alpha = p.value("alpha", out.alpha);
    out.min_size = p.value("min_size", out.min_size);
    out.n_permutations = p.value("n_permutations", out.n_permutations);
    out.p_threshold = p.value("p_threshold", out.p_threshold);
    out.seed = p.value("seed", out.seed);
    return out;
}

SegmentationResult e_divisive(std::span<const double> series, const SegmentationParams& params) {
    check_alpha(params.alpha);
    if (params.min_size < 2) throw Error(Errc::invalid_argument, "min_size must be at least 2");
    const std::size_t n = series.size();

    struct Segment {
        std::size_t begin, end;
        std::optional<SplitCandidate> candidate;
        bool evaluated = false;
    };
    std::vector<Segment> segments{{0, n, std::nullopt, false}};
    SegmentationResult result;
    std::vector<double> scratch;

    for (std::uint64_t iteration = 0;; ++iteration) {
        std::size_t chosen = segments.size();
        for (std::size_t s = 0; s < segments.size(); ++s) {
            Segment& seg = segments[s];
            if (!seg.evaluated) {
                seg.candidate = best_split(series.subspan(seg.begin, seg.end - seg.begin), params.alpha, params.min_size);
                seg.evaluated = true;
            }
            if (!seg.candidate) continue;
            // Segments are kept in index order, so strict > keeps the earliest index on ties.
            if (chosen == segments.size() || seg.candidate->q_hat > segments[chosen].candidate->q_hat) chosen = s;
        }
        if (chosen == segments.size()) break;

        const Segment seg = segments[chosen];
        const double observed = seg.candidate->q_hat;
        std::size_t at_least = 0;
        for (std::size_t b = 0; b < params.n_permutations; ++b) {
            scratch.assign(series.begin() + static_cast<std::ptrdiff_t>(seg.begin),
                           series.begin() + static_cast<std::ptrdiff_t>(seg.end));
            CounterRng rng(params.seed, (iteration << 32) | b);
            shuffle(std::span<double>(scratch), rng);
            const auto permuted = best_split(scratch, params.alpha, params.min_size);
            if (permuted && permuted->q_hat >= observed) ++at_least;
        }
        const double p_value = static_cast<double>(1 + at_least) / static_cast<double>(params.n_permutations + 1);
        if (p_value > params.p_threshold) break;

        const std::size_t cut = seg.begin + seg.candidate->index;
        result.splits.push_back({cut, observed, p_value});
        segments[chosen] = Segment{seg.begin, cut, std::nullopt, false};
        segments.insert(segments.begin() + static_cast<std::ptrdiff_t>(chosen) + 1, Segment{cut, seg.end, std::nullopt, false});
    }

    for (const auto& s : segments) {
        result.segments.emplace_back(s.begin, s.end);
        if (s.begin > 0) result.change_points.push_back(s.begin);
    }
    return result;
}

DataStream e_divisive_segments(const DataStream& series, const SegmentationParams& params, SegmentationResult* out) {
    std::vector<double> values;
    std::vector<Millis> times;
    for (const Record& r : series.payload) {
        const auto* s = std::get_if<Sample>(&r);
        if (!s) throw Error(Errc::invalid_argument, "e_divisive needs a stream of samples");
        if (s->voiced == false) continue;
        values.push_back(s->value);
        times.push_back(s->t_ms);
    }
    SegmentationResult result = e_divisive(values, params);

    DataStream stream;
    stream.recording_id = series.recording_id;
    stream.name = "segments";
    stream.variant = StreamVariant::event;
    for (std::size_t k = 0; k < result.segments.size(); ++k) {
        const auto [begin, end] = result.segments[k];
        if (begin == end) continue;
        EventSpan span{times[begin], times[end - 1], "segment-" + std::to_string(k), 1.0, {}};
        for (const auto& split : result.splits)
            if (split.index == begin)
                span.meta = json{{"q_hat", split.q_hat}, {"p_value", split.p_value}}.dump();
        stream.payload.emplace_back(std::move(span));
    }
    if (out) *out = std::move(result);
    return stream;
}

}  // namespace sscope
