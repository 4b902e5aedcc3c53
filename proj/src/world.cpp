#include "reachguard/world.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace reachguard {

Obstacle make_obstacle(const Zonotope& body) {
    return Obstacle{body, halfspace_rep(body)};
}

Zonotope axis_aligned_cube(const Eigen::Vector3d& center, double edge) {
    if (!(edge > 0.0)) throw std::invalid_argument("axis_aligned_cube: edge > 0");
    Zonotope z;
    z.center = center;
    z.generators = (edge / 2.0) * Mat::Identity(3, 3);
    return z;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> zonotope_aabb(const Zonotope& z) {
    const Vec half = z.box_halfwidths();
    return {Eigen::Vector3d(z.center) - Eigen::Vector3d(half), Eigen::Vector3d(z.center) + Eigen::Vector3d(half)};
}

std::string obstacles_to_json_text(const std::vector<Obstacle>& obstacles) {
    nlohmann::json j;
    j["format"] = "obstacles-v1";
    j["obstacles"] = nlohmann::json::array();
    for (const auto& obstacle : obstacles) {
        nlohmann::json item;
        item["center"] = std::vector<double>(obstacle.body.center.data(),
                                             obstacle.body.center.data() + obstacle.body.center.size());
        item["generators"] = nlohmann::json::array();
        for (int g = 0; g < obstacle.body.generators.cols(); ++g) {
            const Vec col = obstacle.body.generators.col(g);
            item["generators"].push_back(std::vector<double>(col.data(), col.data() + col.size()));
        }
        j["obstacles"].push_back(std::move(item));
    }
    return j.dump(2);
}

std::vector<Obstacle> obstacles_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != std::string("obstacles-v1"))
        throw std::runtime_error("obstacles_from_json_text: unknown format tag");
    std::vector<Obstacle> obstacles;
    for (const auto& item : j.at("obstacles")) {
        const auto center = item.at("center").get<std::vector<double>>();
        Zonotope z;
        z.center.resize(static_cast<int>(center.size()));
        for (std::size_t i = 0; i < center.size(); ++i) z.center[static_cast<int>(i)] = center[i];
        const auto& gens = item.at("generators");
        z.generators.resize(static_cast<int>(center.size()), static_cast<int>(gens.size()));
        for (std::size_t g = 0; g < gens.size(); ++g) {
            const auto col = gens[g].get<std::vector<double>>();
            if (col.size() != center.size())
                throw std::runtime_error("obstacles_from_json_text: ragged generator");
            for (std::size_t i = 0; i < col.size(); ++i)
                z.generators(static_cast<int>(i), static_cast<int>(g)) = col[i];
        }
        obstacles.push_back(make_obstacle(z));
    }
    return obstacles;
}

void save_obstacles(const std::vector<Obstacle>& obstacles, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_obstacles: cannot open " + path);
    out << obstacles_to_json_text(obstacles) << "\n";
}

std::vector<Obstacle> load_obstacles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_obstacles: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return obstacles_from_json_text(text.str());
}

}  // namespace reachguard
