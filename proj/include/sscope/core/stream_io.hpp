#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

// Stream files hold one JSON object per line, one record per object:
//   sample     {"t_ms":int,"value":real[,"voiced":bool]}
//   event      {"t0_ms":int,"t1_ms":int,"label":str,"p":real[,"meta":str]}
//   text       {"t0_ms":int,"t1_ms":int,"text":str,"words":int}
//   thumbnail  {"t_ms":int,"ref":str}
//   pose       {"t_ms":int,"joints":{name:[x,y,z]},"complete":bool}
// Lines are the compact canonical dump, so identical payloads give
// byte-identical files.
json record_to_json(const Record& record);
Record record_from_json(const json& j);

std::string encode_records(const std::vector<Record>& records);
std::vector<Record> decode_records(std::string_view text);

std::vector<Record> read_stream_file(const std::filesystem::path& path);
void write_stream_file(const std::filesystem::path& path, const std::vector<Record>& records);

// Whole-file helpers shared by the storage code.
std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace sscope
