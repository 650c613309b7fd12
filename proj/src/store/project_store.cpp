#include "sscope/store/project_store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"

namespace fs = std::filesystem;

namespace sscope {

json to_json(const StreamInfo& s) {
    json j{{"id", s.id},
           {"project_id", s.project_id},
           {"recording_id", s.recording_id},
           {"filter_id", s.filter_id},
           {"name", s.name},
           {"variant", to_string(s.variant)},
           {"unit", s.unit ? json(*s.unit) : json(nullptr)},
           {"path", s.path},
           {"record_count", s.record_count},
           {"cache_key", s.cache_key},
           {"info", s.info}};
    return j;
}

StreamInfo stream_info_from_json(const json& j) {
    StreamInfo s;
    s.id = j.at("id").get<std::string>();
    s.project_id = j.at("project_id").get<std::string>();
    s.recording_id = j.value("recording_id", std::string{});
    s.filter_id = j.value("filter_id", std::string{});
    s.name = j.value("name", std::string{});
    s.variant = stream_variant_from_string(j.at("variant").get<std::string>());
    if (j.contains("unit") && j["unit"].is_string()) s.unit = j["unit"].get<std::string>();
    s.path = j.at("path").get<std::string>();
    s.record_count = j.value("record_count", std::size_t{0});
    s.cache_key = j.value("cache_key", std::string{});
    s.info = j.value("info", json::object());
    return s;
}

Millis Project::session_duration() const noexcept {
    Millis d = 0;
    for (const auto& r : recordings) d = std::max(d, r.offset_ms + r.duration_ms);
    return d;
}

const Recording* Project::recording(std::string_view id) const noexcept {
    for (const auto& r : recordings)
        if (r.id == id) return &r;
    return nullptr;
}

const Recording* Project::first_of(RecordingKind kind) const noexcept {
    for (const auto& r : recordings)
        if (r.kind == kind) return &r;
    return nullptr;
}

const StreamInfo* Project::stream(std::string_view id) const noexcept {
    for (const auto& s : streams)
        if (s.id == id) return &s;
    return nullptr;
}

json to_json(const Project& p) {
    json recordings = json::array();
    for (const auto& r : p.recordings) recordings.push_back(to_json(r));
    json streams = json::array();
    for (const auto& s : p.streams) streams.push_back(to_json(s));
    json annotations = json::array();
    for (const auto& a : p.annotations) annotations.push_back(to_json(a));
    return json{{"id", p.id},
                {"created_at", p.created_at},
                {"recordings", recordings},
                {"streams", streams},
                {"annotations", annotations},
                {"next_sequence", p.next_sequence}};
}

Project project_from_json(const json& j) {
    Project p;
    p.id = j.at("id").get<std::string>();
    p.created_at = j.value("created_at", std::string{});
    for (const auto& r : j.value("recordings", json::array())) p.recordings.push_back(recording_from_json(r));
    for (const auto& s : j.value("streams", json::array())) p.streams.push_back(stream_info_from_json(s));
    for (const auto& a : j.value("annotations", json::array())) p.annotations.push_back(annotation_from_json(a));
    p.next_sequence = j.value("next_sequence", std::uint64_t{1});
    return p;
}

std::string derived_id(std::string_view prefix, std::initializer_list<std::string_view> parts) {
    std::string joined;
    for (auto part : parts) {
        joined += part;
        joined += '\x1f';
    }
    return std::string(prefix) + sha256_hex(joined).substr(0, 16);
}

std::string utc_now_iso8601() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

namespace {

bool valid_project_id(std::string_view id) {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
}

std::string random_suffix() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    return sha256_hex(std::to_string(rng()) + utc_now_iso8601()).substr(0, 12);
}

fs::path telemetry_log(const fs::path& project_dir) { return project_dir / "telemetry.jsonl"; }

}  // namespace

ProjectStore::ProjectStore(fs::path data_dir) : data_dir_(std::move(data_dir)) {
    std::error_code ec;
    fs::create_directories(data_dir_ / "projects", ec);
    if (ec) throw Error(Errc::io, "data directory not writable: " + data_dir_.string(), ec.message());
    for (const auto& entry : fs::directory_iterator(data_dir_ / "projects")) {
        const auto manifest = entry.path() / "project.json";
        if (!fs::is_regular_file(manifest)) continue;
        Project p = project_from_json(json::parse(read_file(manifest)));
        for (const auto& s : p.streams) stream_owner_[s.id] = p.id;
        for (const auto& a : p.annotations) annotation_owner_[a.id] = p.id;
        projects_.emplace(p.id, std::move(p));
    }
}

fs::path ProjectStore::project_dir(std::string_view project_id) const {
    return data_dir_ / "projects" / std::string(project_id);
}

void ProjectStore::save(const Project& project) const {
    write_file_atomic(project_dir(project.id) / "project.json", to_json(project).dump(2));
}

Project& ProjectStore::mutable_project(std::string_view id) {
    auto it = projects_.find(id);
    if (it == projects_.end()) throw Error(Errc::not_found, "unknown project: " + std::string(id));
    return it->second;
}

Project ProjectStore::create_project(std::optional<std::string> id) {
    std::lock_guard lock(mu_);
    std::string pid = id ? *id : "p-" + random_suffix();
    if (!valid_project_id(pid)) throw Error(Errc::invalid_argument, "invalid project id: " + pid);
    if (projects_.contains(pid)) throw Error(Errc::conflict, "project already exists: " + pid);
    Project p;
    p.id = pid;
    p.created_at = utc_now_iso8601();
    save(p);
    return projects_.emplace(pid, std::move(p)).first->second;
}

bool ProjectStore::has_project(std::string_view id) const {
    std::lock_guard lock(mu_);
    return projects_.contains(id);
}

Project ProjectStore::project(std::string_view id) const {
    std::lock_guard lock(mu_);
    auto it = projects_.find(id);
    if (it == projects_.end()) throw Error(Errc::not_found, "unknown project: " + std::string(id));
    return it->second;
}

std::vector<std::string> ProjectStore::project_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : projects_) ids.push_back(id);
    return ids;
}

Recording ProjectStore::add_recording(std::string_view project_id, const Recording& recording) {
    std::lock_guard lock(mu_);
    Project& p = mutable_project(project_id);
    for (const auto& r : p.recordings)
        if (r.id == recording.id) return r;
    p.recordings.push_back(recording);
    save(p);
    return recording;
}

StreamInfo ProjectStore::put_stream(const StreamInfo& info) {
    std::lock_guard lock(mu_);
    Project& p = mutable_project(info.project_id);
    auto it = std::find_if(p.streams.begin(), p.streams.end(), [&](const StreamInfo& s) { return s.id == info.id; });
    if (it == p.streams.end())
        p.streams.push_back(info);
    else
        *it = info;
    stream_owner_[info.id] = p.id;
    save(p);
    return info;
}

StreamInfo ProjectStore::stream_info(std::string_view stream_id) const {
    std::lock_guard lock(mu_);
    auto owner = stream_owner_.find(stream_id);
    if (owner == stream_owner_.end()) throw Error(Errc::not_found, "unknown stream: " + std::string(stream_id));
    const Project& p = projects_.find(owner->second)->second;
    return *p.stream(stream_id);
}

DataStream ProjectStore::load_stream(std::string_view stream_id) const {
    const StreamInfo info = stream_info(stream_id);
    DataStream s;
    s.id = info.id;
    s.recording_id = info.recording_id;
    s.filter_id = info.filter_id;
    s.name = info.name;
    s.variant = info.variant;
    s.unit = info.unit;
    {
        // The telemetry log grows concurrently; read it under the lock.
        std::unique_lock lock(mu_, std::defer_lock);
        if (info.filter_id == kTelemetryFilter) lock.lock();
        const auto path = data_dir_ / info.path;
        if (fs::exists(path)) s.payload = read_stream_file(path);
    }
    if (info.filter_id == kTelemetryFilter)
        std::stable_sort(s.payload.begin(), s.payload.end(),
                         [](const Record& a, const Record& b) { return record_start(a) < record_start(b); });
    return s;
}

Annotation ProjectStore::add_annotation(const Annotation& annotation) {
    std::lock_guard lock(mu_);
    Project& p = mutable_project(annotation.project_id);
    Annotation a = annotation;
    a.id = "a-" + random_suffix();
    a.created_at = utc_now_iso8601();
    a.sequence = p.next_sequence++;
    p.annotations.push_back(a);
    annotation_owner_[a.id] = p.id;
    save(p);
    return a;
}

Annotation ProjectStore::replace_annotation(const Annotation& annotation) {
    std::lock_guard lock(mu_);
    Project& p = mutable_project(annotation.project_id);
    for (auto& a : p.annotations) {
        if (a.id != annotation.id) continue;
        a.stream_id = annotation.stream_id;
        a.kind = annotation.kind;
        a.t0_ms = annotation.t0_ms;
        a.t1_ms = annotation.t1_ms;
        a.text = annotation.text;
        a.author = annotation.author;
        save(p);
        return a;
    }
    throw Error(Errc::not_found, "unknown annotation: " + annotation.id);
}

void ProjectStore::delete_annotation(std::string_view annotation_id) {
    std::lock_guard lock(mu_);
    auto owner = annotation_owner_.find(annotation_id);
    if (owner == annotation_owner_.end())
        throw Error(Errc::not_found, "unknown annotation: " + std::string(annotation_id));
    Project& p = mutable_project(owner->second);
    std::erase_if(p.annotations, [&](const Annotation& a) { return a.id == annotation_id; });
    annotation_owner_.erase(owner);
    save(p);
}

Annotation ProjectStore::annotation(std::string_view annotation_id) const {
    std::lock_guard lock(mu_);
    auto owner = annotation_owner_.find(annotation_id);
    if (owner == annotation_owner_.end())
        throw Error(Errc::not_found, "unknown annotation: " + std::string(annotation_id));
    for (const auto& a : projects_.find(owner->second)->second.annotations)
        if (a.id == annotation_id) return a;
    throw Error(Errc::not_found, "unknown annotation: " + std::string(annotation_id));
}

std::uint64_t ProjectStore::append_telemetry(std::string_view project_id, const EventSpan& event) {
    std::lock_guard lock(mu_);
    Project& p = mutable_project(project_id);
    const std::string sid = derived_id("s-", {p.id, kTelemetryFilter});
    auto it = std::find_if(p.streams.begin(), p.streams.end(), [&](const StreamInfo& s) { return s.id == sid; });
    if (it == p.streams.end()) {
        StreamInfo info;
        info.id = sid;
        info.project_id = p.id;
        info.filter_id = kTelemetryFilter;
        info.name = "telemetry";
        info.variant = StreamVariant::event;
        info.path = fs::relative(telemetry_log(project_dir(p.id)), data_dir_).string();
        p.streams.push_back(info);
        stream_owner_[sid] = p.id;
        it = std::prev(p.streams.end());
    }
    {
        std::ofstream out(telemetry_log(project_dir(p.id)), std::ios::app | std::ios::binary);
        out << canonical_encode(record_to_json(event)) << '\n';
        out.flush();
        if (!out) throw Error(Errc::io, "cannot append telemetry");
    }
    const std::uint64_t sequence = ++it->record_count;
    save(p);
    return sequence;
}

}  // namespace sscope
