#pragma once

// Static obstacle sets: zonotope bodies with cached halfspace descriptions,
// plus JSON round-trips used by the planner and the benchmark harness.

#include "reachguard/sdf.hpp"

#include <string>
#include <vector>

namespace reachguard {

struct Obstacle {
    Zonotope body;
    HalfspaceRep hs;  // cached exact halfspace description of body
};

Obstacle make_obstacle(const Zonotope& body);

// Axis-aligned cube of the given edge length (three axis generators of
// half-width edge/2).
Zonotope axis_aligned_cube(const Eigen::Vector3d& center, double edge);

// Axis-aligned bounding box of a zonotope: center +- box halfwidths.
std::pair<Eigen::Vector3d, Eigen::Vector3d> zonotope_aabb(const Zonotope& z);

// Schema: {"obstacles": [{"center": [...], "generators": [[...], ...]}]}
// where generators lists column vectors.
std::string obstacles_to_json_text(const std::vector<Obstacle>& obstacles);
std::vector<Obstacle> obstacles_from_json_text(const std::string& text);
void save_obstacles(const std::vector<Obstacle>& obstacles, const std::string& path);
std::vector<Obstacle> load_obstacles(const std::string& path);

}  // namespace reachguard
