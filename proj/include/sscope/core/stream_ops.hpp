#pragma once

#include <optional>
#include <string>

#include "sscope/core/types.hpp"

namespace sscope {

// Returns a description of the first violated stream invariant, if any:
// payload ordered by start time, timestamps within [0, duration_ms],
// t0 <= t1, finite values, probabilities in [0, 1], nonempty labels.
std::optional<std::string> check_stream(const DataStream& stream, Millis duration_ms);

// All records overlapping [t0_ms, t1_ms]; a record overlaps when
// start <= t1_ms and end >= t0_ms.
DataStream slice_stream(const DataStream& stream, Millis t0_ms, Millis t1_ms);

enum class Aggregator { mean, max, count };

Aggregator aggregator_from_string(std::string_view text);

// Rolling-window aggregation of a continuous stream. One output sample per
// window start k*hop_ms < duration_ms (at least one window when the input is
// nonempty); window k covers [k*hop, k*hop + width) clipped at duration, and
// the window reaching the end of the recording also includes t == duration.
// Unvoiced samples are ignored by mean/max but counted by count. Windows
// with nothing to aggregate emit voiced=false.
DataStream window_aggregate(const DataStream& stream,
                            Millis duration_ms,
                            Millis width_ms,
                            Millis hop_ms,
                            Aggregator aggregator);

// Number of windows window_aggregate emits for a nonempty input.
std::size_t window_count(Millis duration_ms, Millis hop_ms) noexcept;

// Whether t lies in the window starting at `start` (see window_aggregate).
bool window_contains(Millis start, Millis width_ms, Millis duration_ms, Millis t) noexcept;

}  // namespace sscope
