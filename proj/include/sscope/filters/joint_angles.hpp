#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

// The angle measured at `vertex` between the limbs towards joint_a and joint_c.
struct JointTriple {
    std::string joint_a;
    std::string vertex;
    std::string joint_c;

    std::string name() const { return vertex; }
};

// Elbows, shoulders, knees and neck.
const std::vector<JointTriple>& default_joint_triples();
std::vector<JointTriple> joint_triples_from_json(const json& j);
json to_json(const std::vector<JointTriple>& triples);

// Angle in degrees in [0, 180]; nullopt when either limb has zero length.
// Computed as atan2(|u x w|, u . w), which equals the arccos of the
// normalized dot product but stays accurate near 0 and 180 degrees.
std::optional<double> angle_degrees(const Point3& a, const Point3& vertex, const Point3& c);

struct JointAngleResult {
    std::vector<DataStream> streams;  // one per triple, named "angle:<vertex>", unit "deg"
    std::size_t incomplete_frames = 0;
    std::size_t degenerate_samples = 0;
};

// Frames marked incomplete are skipped and counted; a frame lacking a joint
// of some triple is skipped for that triple and also counted once.
JointAngleResult joint_angles(const DataStream& pose, const std::vector<JointTriple>& triples);

}  // namespace sscope
