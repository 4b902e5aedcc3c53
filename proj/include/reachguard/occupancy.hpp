#pragma once

// Sphere-based swept volume.  For each joint sphere and each time interval,
// the frame-origin enclosure splits into a parameter-dependent center
// polynomial plus a parameter-independent residual; boxing the residual and
// taking its diagonal gives one ball per joint whose center is an exact
// polynomial in the trajectory parameters.  Fixing the parameters yields
// ball chains; each link's tapered capsule (convex hull of its two end
// balls) is covered by n_s spheres.

#include "reachguard/kinematics.hpp"
#include "reachguard/polyzonotope.hpp"
#include "reachguard/robot.hpp"

#include <vector>

namespace reachguard {

struct Ball {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 0.0;
};

// Joint-sphere occupancy over one time piece: for every parameter value k,
// every admissible joint position lies within `radius` of the center
// polynomial evaluated at k.
struct SjoEntry {
    PolyZonotope center_pz;  // dim 3; trajectory-parameter indeterminates only
    double radius = 0.0;     // joint sphere radius + residual bound
    double residual = 0.0;   // the residual part alone (diagnostics)
};

// One entry per sphere 0..n_q.  Entry 0 is the constant base sphere.
std::vector<SjoEntry> sjo(const RobotModel& model, const std::vector<FramePz>& frames);

// Fix the trajectory parameters (k in [-1,1]^{n_q}); the center polynomial
// collapses to a point.
Ball slice_entry(const SjoEntry& entry, const Vec& k);

// Center value and 3 x n_q jacobian with respect to k.
std::pair<Eigen::Vector3d, Mat> slice_entry_grad(const SjoEntry& entry, const Vec& k);

// n_s spheres covering the tapered capsule co(B(a) u B(b)): sub-segment m
// gets a sphere at its midpoint with radius len/(2 n_s) plus the larger of
// the linearly interpolated end radii.
std::vector<Ball> sfo_slice(const Ball& a, const Ball& b, int n_s);

// Exact membership in the tapered capsule via 1-D convex minimization of
// ||x - c(s)|| - r(s) over s in [0,1].
bool tapered_capsule_contains(const Ball& a, const Ball& b, const Eigen::Vector3d& x);

// Minimum over s of ||x - c(s)|| - r(s) (negative inside).
double tapered_capsule_clearance(const Ball& a, const Ball& b, const Eigen::Vector3d& x);

}  // namespace reachguard
