#pragma once

// Serial manipulator description.  Joint j (1-based) rotates about a fixed
// unit axis in its parent frame and then translates by a fixed offset in the
// rotated frame, so world positions compose as
//   p_j = p_{j-1} + R_j * offset_j,   R_j = R_{j-1} * Rot(axis_j, q_j).
// A sphere of radius `radius` is attached at each joint frame; sphere 0 of
// radius `base_radius` sits at the origin.  Link j is the tapered capsule
// spanned by spheres j-1 and j.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace reachguard {

struct JointSpec {
    Eigen::Vector3d axis;    // unit rotation axis in the parent frame
    Eigen::Vector3d offset;  // frame offset in the rotated joint frame
    double radius = 0.05;    // sphere radius at this joint's frame
    double q_lo = -3.14, q_hi = 3.14;
    double qd_lo = -2.0, qd_hi = 2.0;
};

struct RobotModel {
    std::vector<JointSpec> joints;
    double base_radius = 0.05;

    int n_q() const { return static_cast<int>(joints.size()); }

    // Conservative reach: sum of offset lengths plus the largest sphere.
    double reach() const;
};

// Throws std::invalid_argument on empty chains, non-unit axes, non-positive
// radii, or inverted limit pairs.
void validate(const RobotModel& model);

// JSON round-trip.  Schema: {"joints":[{"axis":[x,y,z],"offset":[x,y,z],
// "radius":r,"q_lim":[lo,hi],"qd_lim":[lo,hi]}], "base_radius":r?}.
RobotModel load_robot(const std::string& path);
void save_robot(const RobotModel& model, const std::string& path);
RobotModel robot_from_json_text(const std::string& text);
std::string robot_to_json_text(const RobotModel& model);

// Small fixed models used by tests and the default benchmark.
RobotModel desk_robot_2dof();  // planar two-link, unit axes z
RobotModel desk_robot_3dof();  // base yaw + two pitch joints

}  // namespace reachguard
