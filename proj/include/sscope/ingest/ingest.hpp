#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "sscope/store/project_store.hpp"

namespace sscope {

// Files making up one upload, keyed by file name. A frame sequence carries
// manifest.json, every listed frame and the optional pose file; the other
// kinds carry exactly one file.
using UploadFiles = std::map<std::string, std::string>;

// Stores the media content-addressed under <data>/blobs/<digest>/ (one copy
// per digest) and adds the Recording to the project. Ingesting the same
// bytes again returns the existing Recording. Transcripts also get a text
// stream (filter "transcript").
// Errors: "unreadable media", "unsupported encoding", "kind/content mismatch".
Recording ingest_files(ProjectStore& store,
                       std::string_view project_id,
                       const UploadFiles& files,
                       RecordingKind declared_kind);

// Reads a file, or a frame directory with its manifest, then ingest_files.
Recording ingest_recording(ProjectStore& store,
                           std::string_view project_id,
                           const std::filesystem::path& path,
                           RecordingKind declared_kind);

// The recording kind implied by a path: directories are frame sequences,
// .wav is audio, .srt/.vtt/.jsonl are transcripts.
RecordingKind guess_recording_kind(const std::filesystem::path& path);

}  // namespace sscope
