#include "sscope/filters/speech_rate.hpp"

#include <algorithm>
#include <vector>

#include "sscope/core/error.hpp"
#include "sscope/core/stream_ops.hpp"

namespace sscope {

DataStream speech_rate(std::span<const TextSegment> segments, Millis duration_ms, Millis window_ms, Millis hop_ms) {
    if (window_ms <= 0 || hop_ms <= 0) throw Error(Errc::invalid_argument, "speech_rate: window and hop must be positive");
    if (duration_ms < 0) throw Error(Errc::invalid_argument, "speech_rate: negative duration");

    DataStream out;
    out.name = "speech_rate";
    out.variant = StreamVariant::continuous;
    out.unit = "words/s";

    // Midpoints doubled to stay in integers.
    std::vector<std::pair<Millis, int>> mids;
    mids.reserve(segments.size());
    for (const auto& s : segments) mids.emplace_back(s.t0_ms + s.t1_ms, s.word_count);
    std::sort(mids.begin(), mids.end());

    const double window_s = static_cast<double>(window_ms) / 1000.0;
    const std::size_t windows = window_count(duration_ms, hop_ms);
    for (std::size_t k = 0; k < windows; ++k) {
        const Millis start = static_cast<Millis>(k) * hop_ms;
        const Millis end = start + window_ms;
        const bool closed = end >= duration_ms;
        auto it = std::lower_bound(mids.begin(), mids.end(), std::pair<Millis, int>{2 * start, 0},
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
        long long words = 0;
        for (; it != mids.end(); ++it) {
            const Millis twice_mid = it->first;
            if (closed ? twice_mid > 2 * duration_ms : twice_mid >= 2 * end) break;
            words += it->second;
        }
        out.payload.emplace_back(Sample{start, static_cast<double>(words) / window_s, std::nullopt});
    }
    return out;
}

}  // namespace sscope
