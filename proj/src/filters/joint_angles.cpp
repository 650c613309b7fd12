#include "sscope/filters/joint_angles.hpp"

#include <cmath>
#include <numbers>

#include "sscope/core/error.hpp"

namespace sscope {

const std::vector<JointTriple>& default_joint_triples() {
    static const std::vector<JointTriple> triples{
        {"shoulder_l", "elbow_l", "wrist_l"}, {"shoulder_r", "elbow_r", "wrist_r"},
        {"neck", "shoulder_l", "elbow_l"},    {"neck", "shoulder_r", "elbow_r"},
        {"hip_l", "knee_l", "ankle_l"},       {"hip_r", "knee_r", "ankle_r"},
        {"spine", "neck", "head"},
    };
    return triples;
}

std::vector<JointTriple> joint_triples_from_json(const json& j) {
    std::vector<JointTriple> out;
    for (const auto& t : j) {
        if (!t.is_array() || t.size() != 3) throw Error(Errc::invalid_argument, "joint triple must be [a, vertex, c]");
        out.push_back({t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<std::string>()});
    }
    return out;
}

json to_json(const std::vector<JointTriple>& triples) {
    json out = json::array();
    for (const auto& t : triples) out.push_back(json::array({t.joint_a, t.vertex, t.joint_c}));
    return out;
}

std::optional<double> angle_degrees(const Point3& a, const Point3& vertex, const Point3& c) {
    const Point3 u{a[0] - vertex[0], a[1] - vertex[1], a[2] - vertex[2]};
    const Point3 w{c[0] - vertex[0], c[1] - vertex[1], c[2] - vertex[2]};
    const double uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    const double ww = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    if (uu == 0.0 || ww == 0.0) return std::nullopt;
    const Point3 cross{u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]};
    const double sine = std::sqrt(cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]);
    const double cosine = u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
    return std::atan2(sine, cosine) * (180.0 / std::numbers::pi);
}

JointAngleResult joint_angles(const DataStream& pose, const std::vector<JointTriple>& triples) {
    JointAngleResult result;
    for (const auto& t : triples) {
        DataStream s;
        s.recording_id = pose.recording_id;
        s.name = "angle:" + t.name();
        s.variant = StreamVariant::continuous;
        s.unit = "deg";
        result.streams.push_back(std::move(s));
    }
    for (const Record& r : pose.payload) {
        const auto* frame = std::get_if<PoseFrame>(&r);
        if (!frame) throw Error(Errc::invalid_argument, "joint_angles needs a skeleton stream");
        if (!frame->complete) {
            ++result.incomplete_frames;
            continue;
        }
        bool incomplete = false;
        for (std::size_t i = 0; i < triples.size(); ++i) {
            const auto& t = triples[i];
            auto a = frame->joints.find(t.joint_a);
            auto v = frame->joints.find(t.vertex);
            auto c = frame->joints.find(t.joint_c);
            if (a == frame->joints.end() || v == frame->joints.end() || c == frame->joints.end()) {
                incomplete = true;
                continue;
            }
            if (auto deg = angle_degrees(a->second, v->second, c->second))
                result.streams[i].payload.emplace_back(Sample{frame->t_ms, *deg, std::nullopt});
            else
                ++result.degenerate_samples;
        }
        if (incomplete) ++result.incomplete_frames;
    }
    return result;
}

}  // namespace sscope
