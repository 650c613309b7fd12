#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

// Joint names of the 17-point skeleton used by the default angle set.
const std::vector<std::string>& default_joint_names();

struct PoseStream {
    DataStream stream;                 // PoseFrame records, variant continuous
    std::set<std::string> joint_names; // declared joint-name set
    std::size_t incomplete_frames = 0; // frames missing any declared joint
};

// Newline-delimited records {"t_ms": int, "joints": {name: [x, y, z]}}.
// An optional first line {"type": "schema", "joints": [names]} declares the
// joint set; otherwise the set is the union over all frames. Frames missing
// a declared joint are kept with complete=false and counted.
// Malformed lines raise Error(unreadable) naming the line.
PoseStream parse_pose_stream(std::string_view text);
PoseStream load_pose_stream(const std::filesystem::path& path);

}  // namespace sscope
