#include "sscope/ingest/ingest.hpp"

#include <algorithm>
#include <mutex>
#include <random>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/core/stream_ops.hpp"
#include "sscope/ingest/frames.hpp"
#include "sscope/ingest/pose.hpp"
#include "sscope/ingest/transcript.hpp"
#include "sscope/ingest/wav.hpp"

namespace fs = std::filesystem;

namespace sscope {

namespace {

std::mutex ingest_mu;

[[noreturn]] void mismatch(RecordingKind declared, std::string_view what) {
    throw Error(Errc::invalid_argument, "kind/content mismatch",
                "declared " + std::string(to_string(declared)) + " but the upload looks like " + std::string(what));
}

bool is_riff_wave(std::string_view b) {
    return b.size() >= 12 && b.substr(0, 4) == "RIFF" && b.substr(8, 4) == "WAVE";
}

bool looks_like_text(std::string_view b) {
    return std::none_of(b.begin(), b.end(), [](char c) { return c == '\0'; });
}

bool safe_name(const std::string& name) {
    return !name.empty() && name.front() != '/' && name.find("..") == std::string::npos &&
           name.find('\\') == std::string::npos;
}

std::string extension_of(const std::string& name) {
    std::string ext = fs::path(name).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

TranscriptFormat sniff_transcript(const std::string& name, std::string_view text) {
    const std::string ext = extension_of(name);
    if (ext == ".srt" || ext == ".vtt" || ext == ".jsonl" || ext == ".json") return transcript_format_for_path(name);
    std::string_view t = text;
    if (t.substr(0, 3) == "\xEF\xBB\xBF") t.remove_prefix(3);
    if (t.substr(0, 6) == "WEBVTT") return TranscriptFormat::vtt;
    if (!t.empty() && t.front() == '{') return TranscriptFormat::jsonl;
    return TranscriptFormat::srt;
}

// Writes the files into a fresh directory and renames it to blobs/<digest>
// unless that blob already exists.
void store_blob(const fs::path& data_dir, const std::string& digest, const UploadFiles& files) {
    const fs::path target = data_dir / "blobs" / digest;
    if (fs::exists(target)) return;
    thread_local std::mt19937_64 rng{std::random_device{}()};
    const fs::path staging = data_dir / "blobs" / (".staging-" + digest.substr(0, 16) + "-" + std::to_string(rng()));
    fs::create_directories(staging);
    for (const auto& [name, bytes] : files) {
        fs::create_directories((staging / name).parent_path());
        write_file_atomic(staging / name, bytes);
    }
    std::error_code ec;
    fs::rename(staging, target, ec);
    if (ec) {
        fs::remove_all(staging);
        if (!fs::exists(target)) throw Error(Errc::io, "cannot store recording", ec.message());
    }
}

const std::pair<const std::string, std::string>& single_file(const UploadFiles& files, RecordingKind kind) {
    if (files.size() != 1)
        throw Error(Errc::invalid_argument, "expected exactly one file for " + std::string(to_string(kind)));
    return *files.begin();
}

Recording audio_recording(const UploadFiles& files) {
    const auto& [name, bytes] = single_file(files, RecordingKind::audio_wav);
    if (!is_riff_wave(bytes)) {
        if (bytes.size() >= 4 && bytes.substr(0, 4) != "RIFF" && looks_like_text(bytes))
            mismatch(RecordingKind::audio_wav, "text");
        throw Error(Errc::unreadable, "unreadable media", "not a RIFF/WAVE container");
    }
    const WavInfo info = probe_wav(bytes);
    Recording r;
    r.kind = RecordingKind::audio_wav;
    r.content_digest = sha256_hex(bytes);
    r.duration_ms = info.duration_ms();
    r.metadata = {{"file", "audio.wav"},
                  {"original_name", name},
                  {"sample_rate_hz", info.sample_rate_hz},
                  {"channels", info.channels},
                  {"encoding", info.encoding == PcmEncoding::int16 ? "pcm_s16le" : "pcm_f32le"},
                  {"frames", info.frames}};
    return r;
}

Recording transcript_recording(const UploadFiles& files, std::vector<TextSegment>& segments) {
    const auto& [name, bytes] = single_file(files, RecordingKind::transcript);
    if (is_riff_wave(bytes)) mismatch(RecordingKind::transcript, "audio");
    if (!looks_like_text(bytes)) mismatch(RecordingKind::transcript, "binary data");
    const TranscriptFormat format = sniff_transcript(name, bytes);
    segments = parse_transcript(bytes, format);
    Recording r;
    r.kind = RecordingKind::transcript;
    r.content_digest = sha256_hex(bytes);
    for (const auto& s : segments) r.duration_ms = std::max(r.duration_ms, s.t1_ms);
    r.metadata = {{"file", "transcript." + std::string(to_string(format))},
                  {"original_name", name},
                  {"format", to_string(format)},
                  {"segment_count", segments.size()}};
    return r;
}

Recording frame_recording(const UploadFiles& files) {
    auto manifest_it = files.find(kFrameManifest);
    if (manifest_it == files.end()) {
        if (files.size() == 1 && is_riff_wave(files.begin()->second)) mismatch(RecordingKind::frame_sequence, "audio");
        if (files.size() == 1 && looks_like_text(files.begin()->second))
            mismatch(RecordingKind::frame_sequence, "a single text file");
        throw Error(Errc::unreadable, "unreadable media", "frame sequence without manifest.json");
    }
    json manifest;
    try {
        manifest = json::parse(manifest_it->second);
    } catch (const json::exception& e) {
        throw Error(Errc::unreadable, "unreadable media", std::string("manifest.json: ") + e.what());
    }
    const FrameSequence seq = parse_frame_manifest(manifest, {});
    json digests = json::object();
    auto add = [&](const std::string& file) {
        if (!safe_name(file)) throw Error(Errc::unreadable, "unreadable media", "bad file name: " + file);
        auto it = files.find(file);
        if (it == files.end()) throw Error(Errc::unreadable, "unreadable media", "missing file " + file);
        digests[file] = sha256_hex(it->second);
    };
    for (const auto& f : seq.frames) add(f.file);
    if (seq.pose_file) {
        add(*seq.pose_file);
        parse_pose_stream(files.at(*seq.pose_file));
    }
    for (const auto& [name, _] : files)
        if (name != kFrameManifest && !digests.contains(name))
            throw Error(Errc::invalid_argument, "file not listed in manifest: " + name);

    Recording r;
    r.kind = RecordingKind::frame_sequence;
    r.content_digest = canonical_hash(json{{"manifest", manifest}, {"files", digests}});
    r.duration_ms = seq.duration_ms();
    r.metadata = {{"fps", seq.fps}, {"frame_count", seq.frames.size()}, {"pose", seq.pose_file.has_value()}};
    return r;
}

}  // namespace

Recording ingest_files(ProjectStore& store, std::string_view project_id, const UploadFiles& files,
                       RecordingKind declared_kind) {
    if (files.empty()) throw Error(Errc::invalid_argument, "empty upload");
    for (const auto& [name, _] : files)
        if (!safe_name(name)) throw Error(Errc::invalid_argument, "bad file name: " + name);
    if (!store.has_project(project_id)) throw Error(Errc::not_found, "unknown project: " + std::string(project_id));

    std::vector<TextSegment> segments;
    Recording r;
    UploadFiles stored;
    switch (declared_kind) {
    case RecordingKind::audio_wav:
        r = audio_recording(files);
        stored = {{r.metadata["file"].get<std::string>(), files.begin()->second}};
        break;
    case RecordingKind::transcript:
        r = transcript_recording(files, segments);
        stored = {{r.metadata["file"].get<std::string>(), files.begin()->second}};
        break;
    case RecordingKind::frame_sequence:
        r = frame_recording(files);
        stored = files;
        break;
    }
    r.id = "rec-" + r.content_digest.substr(0, 16);
    r.blob = "blobs/" + r.content_digest;

    std::lock_guard lock(ingest_mu);
    const fs::path data_dir = store.data_dir();
    store_blob(data_dir, r.content_digest, stored);
    const Recording added = store.add_recording(project_id, r);

    if (declared_kind == RecordingKind::transcript) {
        const std::string rel = r.blob + "/segments.jsonl";
        std::vector<Record> records(segments.begin(), segments.end());
        DataStream probe;
        probe.variant = StreamVariant::text;
        probe.payload = records;
        if (auto problem = check_stream(probe, r.duration_ms))
            throw Error(Errc::unreadable, "unreadable media", *problem);
        if (!fs::exists(data_dir / rel)) write_stream_file(data_dir / rel, records);
        StreamInfo info;
        info.id = derived_id("s-", {project_id, r.content_digest, kTranscriptFilter});
        info.project_id = std::string(project_id);
        info.recording_id = r.id;
        info.filter_id = kTranscriptFilter;
        info.name = "transcript";
        info.variant = StreamVariant::text;
        info.path = rel;
        info.record_count = records.size();
        store.put_stream(info);
    }
    return added;
}

Recording ingest_recording(ProjectStore& store, std::string_view project_id, const fs::path& path,
                           RecordingKind declared_kind) {
    if (!fs::exists(path)) throw Error(Errc::not_found, "no such file: " + path.string());
    UploadFiles files;
    if (fs::is_directory(path)) {
        if (declared_kind != RecordingKind::frame_sequence) mismatch(declared_kind, "a frame directory");
        const fs::path manifest_path = path / kFrameManifest;
        if (!fs::is_regular_file(manifest_path))
            throw Error(Errc::unreadable, "unreadable media", "missing " + manifest_path.string());
        files[kFrameManifest] = read_file(manifest_path);
        json manifest;
        try {
            manifest = json::parse(files[kFrameManifest]);
        } catch (const json::exception& e) {
            throw Error(Errc::unreadable, "unreadable media", std::string("manifest.json: ") + e.what());
        }
        const FrameSequence seq = parse_frame_manifest(manifest, path);
        auto load = [&](const std::string& name) {
            if (!fs::is_regular_file(path / name)) throw Error(Errc::unreadable, "unreadable media", "missing " + name);
            files[name] = read_file(path / name);
        };
        for (const auto& f : seq.frames) load(f.file);
        if (seq.pose_file) load(*seq.pose_file);
    } else {
        files[path.filename().string()] = read_file(path);
    }
    return ingest_files(store, project_id, files, declared_kind);
}

RecordingKind guess_recording_kind(const fs::path& path) {
    if (fs::is_directory(path)) return RecordingKind::frame_sequence;
    const std::string ext = extension_of(path.filename().string());
    if (ext == ".wav") return RecordingKind::audio_wav;
    if (ext == ".srt" || ext == ".vtt" || ext == ".jsonl" || ext == ".json") return RecordingKind::transcript;
    throw Error(Errc::invalid_argument, "cannot infer recording kind of " + path.string(), "pass --kind");
}

}  // namespace sscope
