#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

enum class TranscriptFormat { srt, vtt, jsonl };

std::string_view to_string(TranscriptFormat format) noexcept;
TranscriptFormat transcript_format_from_string(std::string_view text);
// From a file extension (.srt, .vtt, .jsonl/.json); throws when unknown.
TranscriptFormat transcript_format_for_path(std::string_view path);

// Segments come back sorted by start time (stable), with word counts filled
// in. Overlapping segments are kept. Malformed timing lines raise
// Error(unreadable) naming the 1-based line number.
std::vector<TextSegment> parse_transcript(std::string_view text, TranscriptFormat format);

std::string serialize_transcript(std::span<const TextSegment> segments, TranscriptFormat format);

// "HH:MM:SS,mmm" (srt) or "HH:MM:SS.mmm" (vtt).
std::string format_timestamp(Millis t_ms, TranscriptFormat format);

}  // namespace sscope
