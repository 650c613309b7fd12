#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

// Index entry for one persisted stream. `path` is relative to the data
// directory; filter outputs point into the result cache.
struct StreamInfo {
    std::string id;
    std::string project_id;
    std::string recording_id;
    std::string filter_id;
    std::string name;
    StreamVariant variant = StreamVariant::continuous;
    std::optional<std::string> unit;
    std::string path;
    std::size_t record_count = 0;
    std::string cache_key;
    json info = json::object();
};

json to_json(const StreamInfo& info);
StreamInfo stream_info_from_json(const json& j);

struct Project {
    std::string id;
    std::string created_at;
    std::vector<Recording> recordings;
    std::vector<StreamInfo> streams;
    std::vector<Annotation> annotations;
    std::uint64_t next_sequence = 1;

    // All recordings share one clock; the session spans the longest one.
    Millis session_duration() const noexcept;
    const Recording* recording(std::string_view id) const noexcept;
    const Recording* first_of(RecordingKind kind) const noexcept;
    const StreamInfo* stream(std::string_view id) const noexcept;
};

json to_json(const Project& project);
Project project_from_json(const json& j);

// Stable short identifier derived from the given parts.
std::string derived_id(std::string_view prefix, std::initializer_list<std::string_view> parts);
std::string utc_now_iso8601();

// Project manifests under <data>/projects/<id>/project.json, written through
// on every mutation. Mutations are serialized by one lock; readers get
// snapshots.
class ProjectStore {
public:
    explicit ProjectStore(std::filesystem::path data_dir);

    const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

    Project create_project(std::optional<std::string> id = std::nullopt);
    bool has_project(std::string_view id) const;
    Project project(std::string_view id) const;
    std::vector<std::string> project_ids() const;

    // Idempotent on recording id.
    Recording add_recording(std::string_view project_id, const Recording& recording);
    // Idempotent on stream id; an existing entry is refreshed in place.
    StreamInfo put_stream(const StreamInfo& info);

    StreamInfo stream_info(std::string_view stream_id) const;
    DataStream load_stream(std::string_view stream_id) const;

    // Assigns id, created_at and sequence; validation is the caller's job.
    Annotation add_annotation(const Annotation& annotation);
    Annotation replace_annotation(const Annotation& annotation);
    void delete_annotation(std::string_view annotation_id);
    Annotation annotation(std::string_view annotation_id) const;

    // Appends to the project's telemetry log in receipt order and returns the
    // receipt sequence number. The telemetry stream is served sorted by time.
    std::uint64_t append_telemetry(std::string_view project_id, const EventSpan& event);

    std::filesystem::path absolute(const std::string& relative) const { return data_dir_ / relative; }
    std::filesystem::path project_dir(std::string_view project_id) const;

private:
    Project& mutable_project(std::string_view id);
    void save(const Project& project) const;

    std::filesystem::path data_dir_;
    mutable std::mutex mu_;
    std::map<std::string, Project, std::less<>> projects_;
    std::map<std::string, std::string, std::less<>> stream_owner_;
    std::map<std::string, std::string, std::less<>> annotation_owner_;
};

inline constexpr const char* kTelemetryFilter = "telemetry";
inline constexpr const char* kTranscriptFilter = "transcript";

}  // namespace sscope
