#pragma once

// Forward kinematics, pointwise and as set-valued enclosures.  Pointwise
// frames use Rodrigues' rotation about each joint axis; the enclosure
// version substitutes cos/sin Taylor enclosures for the trigonometric terms
// and propagates them entrywise through the same products, so for every
// realization (t, k) of the angle enclosures the true frame lies inside the
// returned sets.

#include "reachguard/polyzonotope.hpp"
#include "reachguard/robot.hpp"

#include <array>
#include <vector>

namespace reachguard {

struct FramePose {
    Eigen::Matrix3d R;
    Eigen::Vector3d p;
};

// World frames for joints 1..n_q.
std::vector<FramePose> fk(const RobotModel& model, const Vec& q);

// Sphere chain positions: origin followed by the n_q joint frame origins.
std::vector<Eigen::Vector3d> sphere_centers(const RobotModel& model, const Vec& q);

// 3x3 matrix of dim-1 enclosures.
struct Mat3Pz {
    std::array<PolyZonotope, 9> m;

    PolyZonotope& at(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
    const PolyZonotope& at(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }

    static Mat3Pz identity();
    static Mat3Pz constant(const Eigen::Matrix3d& value);
};

struct FramePz {
    Mat3Pz R;
    PolyZonotope p;  // dim 3
};

struct FkPzOptions {
    int trig_order = 2;
    int reduce_cap = 200;  // monomial budget per enclosure entry after each joint
};

// Set-valued frames for joints 1..n_q given per-joint angle enclosures.
std::vector<FramePz> fk_pz(const RobotModel& model, const std::vector<PolyZonotope>& angles,
                           const FkPzOptions& opts = {});

}  // namespace reachguard
