#include "sscope/core/types.hpp"

#include <cctype>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"

namespace sscope {

std::string_view to_string(RecordingKind kind) noexcept {
    switch (kind) {
    case RecordingKind::audio_wav: return "audio-wav";
    case RecordingKind::frame_sequence: return "frame-sequence";
    case RecordingKind::transcript: return "transcript";
    }
    return "audio-wav";
}

RecordingKind recording_kind_from_string(std::string_view text) {
    if (text == "audio-wav") return RecordingKind::audio_wav;
    if (text == "frame-sequence") return RecordingKind::frame_sequence;
    if (text == "transcript") return RecordingKind::transcript;
    throw Error(Errc::invalid_argument, "unknown recording kind: " + std::string(text));
}

std::string_view to_string(StreamVariant variant) noexcept {
    switch (variant) {
    case StreamVariant::continuous: return "continuous";
    case StreamVariant::event: return "event";
    case StreamVariant::text: return "text";
    case StreamVariant::thumbnail: return "thumbnail";
    }
    return "continuous";
}

StreamVariant stream_variant_from_string(std::string_view text) {
    if (text == "continuous") return StreamVariant::continuous;
    if (text == "event") return StreamVariant::event;
    if (text == "text") return StreamVariant::text;
    if (text == "thumbnail") return StreamVariant::thumbnail;
    throw Error(Errc::invalid_argument, "unknown stream variant: " + std::string(text));
}

std::string_view to_string(AnnotationKind kind) noexcept {
    return kind == AnnotationKind::point ? "point" : "interval";
}

AnnotationKind annotation_kind_from_string(std::string_view text) {
    if (text == "point") return AnnotationKind::point;
    if (text == "interval") return AnnotationKind::interval;
    throw Error(Errc::invalid_argument, "unknown annotation kind: " + std::string(text));
}

Millis record_start(const Record& record) noexcept {
    return std::visit(
        [](const auto& r) -> Millis {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, EventSpan> || std::is_same_v<T, TextSegment>)
                return r.t0_ms;
            else
                return r.t_ms;
        },
        record);
}

Millis record_end(const Record& record) noexcept {
    return std::visit(
        [](const auto& r) -> Millis {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, EventSpan> || std::is_same_v<T, TextSegment>)
                return r.t1_ms;
            else
                return r.t_ms;
        },
        record);
}

std::string CacheKey::hex() const { return canonical_hash(to_json()); }

json CacheKey::to_json() const {
    return json{{"recording_digest", recording_digest},
                {"model_id", model_id},
                {"model_version", model_version},
                {"params_digest", params_digest}};
}

int count_words(std::string_view text) noexcept {
    int words = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

json to_json(const Recording& r) {
    return json{{"id", r.id},
                {"kind", to_string(r.kind)},
                {"duration_ms", r.duration_ms},
                {"offset_ms", r.offset_ms},
                {"content_digest", r.content_digest},
                {"metadata", r.metadata},
                {"blob", r.blob}};
}

Recording recording_from_json(const json& j) {
    Recording r;
    r.id = j.at("id").get<std::string>();
    r.kind = recording_kind_from_string(j.at("kind").get<std::string>());
    r.duration_ms = j.at("duration_ms").get<Millis>();
    r.offset_ms = j.value("offset_ms", Millis{0});
    r.content_digest = j.at("content_digest").get<std::string>();
    r.metadata = j.value("metadata", json::object());
    r.blob = j.value("blob", std::string{});
    return r;
}

json to_json(const Annotation& a) {
    return json{{"id", a.id},
                {"project_id", a.project_id},
                {"stream_id", a.stream_id},
                {"kind", to_string(a.kind)},
                {"t0_ms", a.t0_ms},
                {"t1_ms", a.t1_ms},
                {"text", a.text},
                {"author", a.author},
                {"created_at", a.created_at},
                {"sequence", a.sequence}};
}

Annotation annotation_from_json(const json& j) {
    Annotation a;
    a.id = j.at("id").get<std::string>();
    a.project_id = j.at("project_id").get<std::string>();
    a.stream_id = j.at("stream_id").get<std::string>();
    a.kind = annotation_kind_from_string(j.at("kind").get<std::string>());
    a.t0_ms = j.at("t0_ms").get<Millis>();
    a.t1_ms = j.at("t1_ms").get<Millis>();
    a.text = j.value("text", std::string{});
    a.author = j.value("author", std::string{});
    a.created_at = j.value("created_at", std::string{});
    a.sequence = j.value("sequence", std::uint64_t{0});
    return a;
}

}  // namespace sscope
