#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace sscope {

using json = nlohmann::json;

// Milliseconds relative to the start of a recording.
using Millis = std::int64_t;

enum class RecordingKind { audio_wav, frame_sequence, transcript };

std::string_view to_string(RecordingKind kind) noexcept;
RecordingKind recording_kind_from_string(std::string_view text);

struct Recording {
    std::string id;
    RecordingKind kind = RecordingKind::audio_wav;
    Millis duration_ms = 0;
    Millis offset_ms = 0;  // alignment offset on the session clock; always 0 for now
    std::string content_digest;
    json metadata = json::object();  // fps / sample_rate_hz / format / file names
    std::string blob;                // stored location, relative to the data directory
};

enum class StreamVariant { continuous, event, text, thumbnail };

std::string_view to_string(StreamVariant variant) noexcept;
StreamVariant stream_variant_from_string(std::string_view text);

struct Sample {
    Millis t_ms = 0;
    double value = 0.0;
    std::optional<bool> voiced;

    bool operator==(const Sample&) const = default;
};

struct EventSpan {
    Millis t0_ms = 0;
    Millis t1_ms = 0;
    std::string label;
    double probability = 1.0;
    std::string meta;  // opaque JSON text (telemetry payloads); empty when unused

    bool operator==(const EventSpan&) const = default;
};

struct TextSegment {
    Millis t0_ms = 0;
    Millis t1_ms = 0;
    std::string text;
    int word_count = 0;

    bool operator==(const TextSegment&) const = default;
};

struct ThumbRef {
    Millis t_ms = 0;
    std::string ref;

    bool operator==(const ThumbRef&) const = default;
};

using Point3 = std::array<double, 3>;

// One skeleton frame of a pose stream ("continuous vectors").
struct PoseFrame {
    Millis t_ms = 0;
    std::map<std::string, Point3> joints;
    bool complete = true;

    bool operator==(const PoseFrame&) const = default;
};

using Record = std::variant<Sample, EventSpan, TextSegment, ThumbRef, PoseFrame>;

Millis record_start(const Record& record) noexcept;
Millis record_end(const Record& record) noexcept;

struct DataStream {
    std::string id;
    std::string recording_id;
    std::string filter_id;
    std::string name;
    StreamVariant variant = StreamVariant::continuous;
    std::optional<std::string> unit;
    std::vector<Record> payload;
};

enum class AnnotationKind { point, interval };

std::string_view to_string(AnnotationKind kind) noexcept;
AnnotationKind annotation_kind_from_string(std::string_view text);

struct Annotation {
    std::string id;
    std::string project_id;
    std::string stream_id;
    AnnotationKind kind = AnnotationKind::point;
    Millis t0_ms = 0;
    Millis t1_ms = 0;
    std::string text;
    std::string author;
    std::string created_at;  // ISO-8601 UTC
    std::uint64_t sequence = 0;  // creation order, breaks ties in listings

    bool operator==(const Annotation&) const = default;
};

// Content-addressed identity of one filter execution.
struct CacheKey {
    std::string recording_digest;
    std::string model_id;
    std::string model_version;
    std::string params_digest;

    bool operator==(const CacheKey&) const = default;

    // Digest of the canonical encoding of all four fields.
    std::string hex() const;
    json to_json() const;
};

// Whitespace tokenization.
int count_words(std::string_view text) noexcept;

json to_json(const Recording& recording);
Recording recording_from_json(const json& j);
json to_json(const Annotation& annotation);
Annotation annotation_from_json(const json& j);

}  // namespace sscope
