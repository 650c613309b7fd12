#pragma once

#include <span>

#include "sscope/core/types.hpp"

namespace sscope {

// Words per second over rolling windows. A segment's words are attributed
// to every window containing its midpoint (t0 + t1) / 2; windows follow the
// window_aggregate rule (start k*hop < duration, the last window closed at
// duration). Rate = words / (window_ms / 1000). Timestamps are window starts.
DataStream speech_rate(std::span<const TextSegment> segments,
                       Millis duration_ms,
                       Millis window_ms = 5000,
                       Millis hop_ms = 1000);

}  // namespace sscope
