#include "sscope/ingest/pose.hpp"

#include <cmath>

#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"

namespace sscope {

const std::vector<std::string>& default_joint_names() {
    static const std::vector<std::string> names{
        "hip",        "hip_r",   "knee_r",  "ankle_r",    "hip_l",   "knee_l",
        "ankle_l",    "spine",   "neck",    "nose",       "head",    "shoulder_l",
        "elbow_l",    "wrist_l", "shoulder_r", "elbow_r", "wrist_r"};
    return names;
}

PoseStream parse_pose_stream(std::string_view text) {
    PoseStream out;
    out.stream.name = "skeleton";
    out.stream.variant = StreamVariant::continuous;
    bool declared = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        auto fail = [&](const std::string& why) -> Error {
            return Error(Errc::unreadable, "malformed pose record at line " + std::to_string(line_no), why);
        };
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw fail(e.what());
        }
        if (j.value("type", std::string{}) == "schema") {
            for (const auto& n : j.at("joints")) out.joint_names.insert(n.get<std::string>());
            declared = true;
            continue;
        }
        PoseFrame frame;
        try {
            frame.t_ms = j.at("t_ms").get<Millis>();
            for (const auto& [name, p] : j.at("joints").items()) {
                if (!p.is_array() || p.size() != 3) throw fail("joint " + name + " is not a 3D point");
                Point3 point{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
                for (double c : point)
                    if (!std::isfinite(c)) throw fail("non-finite coordinate for " + name);
                frame.joints.emplace(name, point);
            }
        } catch (const json::exception& e) {
            throw fail(e.what());
        }
        if (!out.stream.payload.empty() && frame.t_ms <= record_start(out.stream.payload.back()))
            throw fail("t_ms not strictly increasing");
        if (!declared)
            for (const auto& [name, _] : frame.joints) out.joint_names.insert(name);
        out.stream.payload.emplace_back(std::move(frame));
    }
    for (auto& r : out.stream.payload) {
        auto& frame = std::get<PoseFrame>(r);
        for (const auto& name : out.joint_names)
            if (!frame.joints.contains(name)) frame.complete = false;
        if (!frame.complete) ++out.incomplete_frames;
    }
    return out;
}

PoseStream load_pose_stream(const std::filesystem::path& path) { return parse_pose_stream(read_file(path)); }

}  // namespace sscope
