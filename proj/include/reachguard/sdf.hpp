#pragma once

// Exact signed distances between points/spheres and zonotopes.
//
// 3D: outside distance is the box-constrained least-squares projection onto
// the generator parameterization; inside penetration is the minimum slack
// over a support-tight halfspace representation (rows from generator
// cross-products).  2D: distances reduce to the buffered obstacle's boundary
// polygon, evaluated per edge; the same vertex enumeration feeds the network
// compiler so the two evaluation paths agree to rounding.

#include "reachguard/occupancy.hpp"
#include "reachguard/polyzonotope.hpp"

#include <utility>
#include <vector>

namespace reachguard {

struct HalfspaceRep {
    Mat A;  // unit outward normals, one per row
    Vec b;  // support values: Z = {x : A x <= b}
};

// Halfspace representation of a full-rank 3D zonotope.  Normals are the
// deduplicated unit cross-products of generator pairs (both signs), b the
// support values, so the polytope equals the zonotope exactly.
HalfspaceRep halfspace_rep(const Zonotope& z);

// max_i (A_i p - b_i): negative inside, positive outside (a lower bound on
// the outside distance, exact penetration depth when negative).
double halfspace_margin(const HalfspaceRep& rep, const Eigen::Vector3d& p);

// Box-constrained least squares: minimize ||c + G beta - p|| over
// beta in [-1,1]^m to KKT residual <= kkt_tol.  Returns the optimal beta.
Vec project_onto_zonotope(const Zonotope& z, const Eigen::Vector3d& p, double kkt_tol = 1e-10);

// Signed distance from a point to a 3D zonotope: Euclidean distance outside,
// minus the penetration depth inside, zero on the boundary.
double signed_distance_point(const Zonotope& z, const HalfspaceRep& rep, const Eigen::Vector3d& p);

// Value plus derivative with respect to the query point (defined a.e.; at
// kinks a valid subgradient is returned).
struct SignedDistanceResult {
    double value = 0.0;
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
};
SignedDistanceResult signed_distance_point_grad(const Zonotope& z, const HalfspaceRep& rep,
                                                const Eigen::Vector3d& p);

// signed_distance_point(center) - radius: positive iff the sphere clears the
// zonotope.
double sphere_clearance(const Zonotope& z, const HalfspaceRep& rep, const Ball& sphere);

// Counterclockwise boundary vertices of a full-rank 2D zonotope (2m vertices
// for m pairwise non-parallel generators; parallel generators merge first).
std::vector<Eigen::Vector2d> vertices_2d(const Zonotope& z);

// Distance from p to segment [v1, v2] plus the clamped projection parameter.
struct SegmentDistance {
    double distance = 0.0;
    double t = 0.0;
};
SegmentDistance point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& v1,
                                       const Eigen::Vector2d& v2);

// Boundary segments of an obstacle buffered by the ego generators:
// <c_obs, [G_ego, G_obs]>.
std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> buffered_segments_2d(
    const Zonotope& obstacle, const Mat& ego_generators);

// Edge halfspace rows (A, b) of the buffered obstacle, outward normals.
std::pair<Mat, Vec> buffered_halfspace_2d(const Zonotope& obstacle, const Mat& ego_generators);

// Signed distance between the ego zonotope <c_ego, G_ego> and the union of
// obstacles: minimum over all buffered boundary segments of the distance
// from c_ego, negated when c_ego lies inside any buffered obstacle.
double signed_distance_2d(const Zonotope& ego, const std::vector<Zonotope>& obstacles);

}  // namespace reachguard
