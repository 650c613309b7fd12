#include "sscope/core/stream_ops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sscope/core/error.hpp"

namespace sscope {
namespace {

std::string at_index(std::size_t i, const std::string& what) {
    std::ostringstream out;
    out << "record " << i << ": " << what;
    return out.str();
}

std::optional<std::string> check_record(const Record& record) {
    return std::visit(
        [](const auto& r) -> std::optional<std::string> {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, Sample>) {
                if (!std::isfinite(r.value)) return "non-finite value";
            } else if constexpr (std::is_same_v<T, EventSpan>) {
                if (r.label.empty()) return "empty label";
                if (!(r.probability >= 0.0 && r.probability <= 1.0)) return "invalid probability";
            } else if constexpr (std::is_same_v<T, TextSegment>) {
                if (r.word_count != count_words(r.text)) return "word_count mismatch";
            } else if constexpr (std::is_same_v<T, ThumbRef>) {
                if (r.ref.empty()) return "empty thumbnail reference";
            } else if constexpr (std::is_same_v<T, PoseFrame>) {
                for (const auto& [name, p] : r.joints)
                    for (double c : p)
                        if (!std::isfinite(c)) return "non-finite joint coordinate: " + name;
            }
            return std::nullopt;
        },
        record);
}

}  // namespace

std::optional<std::string> check_stream(const DataStream& stream, Millis duration_ms) {
    Millis previous = 0;
    for (std::size_t i = 0; i < stream.payload.size(); ++i) {
        const Record& r = stream.payload[i];
        const Millis t0 = record_start(r);
        const Millis t1 = record_end(r);
        if (t0 > t1) return at_index(i, "t0 > t1");
        if (t0 < 0 || t1 > duration_ms) return at_index(i, "timestamp out of bounds");
        if (i > 0 && t0 < previous) return at_index(i, "payload not sorted by start time");
        previous = t0;
        if (auto problem = check_record(r)) return at_index(i, *problem);
    }
    return std::nullopt;
}

DataStream slice_stream(const DataStream& stream, Millis t0_ms, Millis t1_ms) {
    if (t0_ms > t1_ms) throw Error(Errc::invalid_argument, "empty/inverted range");
    DataStream out = stream;
    out.payload.clear();
    for (const Record& r : stream.payload) {
        if (record_start(r) > t1_ms) break;
        if (record_end(r) >= t0_ms) out.payload.push_back(r);
    }
    return out;
}

Aggregator aggregator_from_string(std::string_view text) {
    if (text == "mean") return Aggregator::mean;
    if (text == "max") return Aggregator::max;
    if (text == "count") return Aggregator::count;
    throw Error(Errc::invalid_argument, "unknown aggregator: " + std::string(text));
}

std::size_t window_count(Millis duration_ms, Millis hop_ms) noexcept {
    if (hop_ms <= 0) return 0;
    if (duration_ms <= hop_ms) return 1;
    return static_cast<std::size_t>((duration_ms + hop_ms - 1) / hop_ms);
}

bool window_contains(Millis start, Millis width_ms, Millis duration_ms, Millis t) noexcept {
    if (t < start) return false;
    const Millis end = start + width_ms;
    if (end >= duration_ms) return t <= duration_ms;
    return t < end;
}

DataStream window_aggregate(const DataStream& stream,
                            Millis duration_ms,
                            Millis width_ms,
                            Millis hop_ms,
                            Aggregator aggregator) {
    if (width_ms <= 0 || hop_ms <= 0)
        throw Error(Errc::invalid_argument, "window width and hop must be positive");
    DataStream out = stream;
    out.payload.clear();
    out.variant = StreamVariant::continuous;
    if (aggregator == Aggregator::count) out.unit = "count";
    if (stream.payload.empty()) return out;

    std::vector<const Sample*> samples;
    samples.reserve(stream.payload.size());
    for (const Record& r : stream.payload) {
        const auto* s = std::get_if<Sample>(&r);
        if (!s) throw Error(Errc::invalid_argument, "window_aggregate needs a stream of samples");
        samples.push_back(s);
    }

    const std::size_t windows = window_count(duration_ms, hop_ms);
    out.payload.reserve(windows);
    auto first = samples.begin();
    for (std::size_t k = 0; k < windows; ++k) {
        const Millis start = static_cast<Millis>(k) * hop_ms;
        first = std::lower_bound(first, samples.end(), start,
                                 [](const Sample* s, Millis t) { return s->t_ms < t; });
        double sum = 0.0;
        double best = 0.0;
        std::size_t used = 0;
        std::size_t total = 0;
        for (auto it = first; it != samples.end(); ++it) {
            const Sample& s = **it;
            if (!window_contains(start, width_ms, duration_ms, s.t_ms)) break;
            ++total;
            if (s.voiced == false) continue;
            best = used == 0 ? s.value : std::max(best, s.value);
            sum += s.value;
            ++used;
        }
        Sample agg{start, 0.0, std::nullopt};
        switch (aggregator) {
        case Aggregator::count:
            agg.value = static_cast<double>(total);
            break;
        case Aggregator::mean:
            if (used) agg.value = sum / static_cast<double>(used);
            else agg.voiced = false;
            break;
        case Aggregator::max:
            if (used) agg.value = best;
            else agg.voiced = false;
            break;
        }
        out.payload.emplace_back(agg);
    }
    return out;
}

}  // namespace sscope
