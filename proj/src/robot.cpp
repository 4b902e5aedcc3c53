#include "reachguard/robot.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace reachguard {

using nlohmann::json;

double RobotModel::reach() const {
    double len = 0.0, r = base_radius;
    for (const auto& j : joints) {
        len += j.offset.norm();
        r = std::max(r, j.radius);
    }
    return len + r;
}

void validate(const RobotModel& model) {
    if (model.joints.empty()) throw std::invalid_argument("RobotModel: chain has no joints");
    if (!(model.base_radius > 0.0)) throw std::invalid_argument("RobotModel: base_radius must be positive");
    for (std::size_t j = 0; j < model.joints.size(); ++j) {
        const auto& jt = model.joints[j];
        const std::string where = "RobotModel: joint " + std::to_string(j + 1);
        if (std::abs(jt.axis.norm() - 1.0) > 1e-9)
            throw std::invalid_argument(where + ": axis must be a unit vector");
        if (!(jt.radius > 0.0)) throw std::invalid_argument(where + ": radius must be positive");
        if (!(jt.q_lo < jt.q_hi)) throw std::invalid_argument(where + ": position limits inverted");
        if (!(jt.qd_lo < jt.qd_hi)) throw std::invalid_argument(where + ": velocity limits inverted");
    }
}

namespace {

Eigen::Vector3d vec3_from(const json& arr, const std::string& what) {
    if (!arr.is_array() || arr.size() != 3)
        throw std::invalid_argument("robot json: " + what + " must be a 3-array");
    return Eigen::Vector3d(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>());
}

}  // namespace

RobotModel robot_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("robot json: parse failure: ") + e.what());
    }
    if (!doc.contains("joints") || !doc["joints"].is_array() || doc["joints"].empty())
        throw std::invalid_argument("robot json: missing non-empty \"joints\" array");

    RobotModel model;
    for (const auto& item : doc["joints"]) {
        JointSpec jt;
        jt.axis = vec3_from(item.at("axis"), "axis");
        jt.offset = vec3_from(item.at("offset"), "offset");
        jt.radius = item.at("radius").get<double>();
        const auto& ql = item.at("q_lim");
        const auto& qdl = item.at("qd_lim");
        if (!ql.is_array() || ql.size() != 2 || !qdl.is_array() || qdl.size() != 2)
            throw std::invalid_argument("robot json: q_lim and qd_lim must be 2-arrays");
        jt.q_lo = ql[0].get<double>();
        jt.q_hi = ql[1].get<double>();
        jt.qd_lo = qdl[0].get<double>();
        jt.qd_hi = qdl[1].get<double>();
        model.joints.push_back(jt);
    }
    model.base_radius =
        doc.contains("base_radius") ? doc["base_radius"].get<double>() : model.joints.front().radius;
    validate(model);
    return model;
}

std::string robot_to_json_text(const RobotModel& model) {
    json doc;
    doc["base_radius"] = model.base_radius;
    doc["joints"] = json::array();
    for (const auto& jt : model.joints) {
        json item;
        item["axis"] = {jt.axis[0], jt.axis[1], jt.axis[2]};
        item["offset"] = {jt.offset[0], jt.offset[1], jt.offset[2]};
        item["radius"] = jt.radius;
        item["q_lim"] = {jt.q_lo, jt.q_hi};
        item["qd_lim"] = {jt.qd_lo, jt.qd_hi};
        doc["joints"].push_back(item);
    }
    return doc.dump(2);
}

RobotModel load_robot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_robot: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return robot_from_json_text(ss.str());
}

void save_robot(const RobotModel& model, const std::string& path) {
    validate(model);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_robot: cannot open " + path);
    out << robot_to_json_text(model) << "\n";
}

RobotModel desk_robot_2dof() {
    RobotModel model;
    JointSpec j1;
    j1.axis = Eigen::Vector3d::UnitZ();
    j1.offset = Eigen::Vector3d(0.30, 0.0, 0.0);
    j1.radius = 0.05;
    j1.q_lo = -M_PI;
    j1.q_hi = M_PI;
    j1.qd_lo = -2.0;
    j1.qd_hi = 2.0;
    JointSpec j2 = j1;
    model.joints = {j1, j2};
    model.base_radius = 0.05;
    validate(model);
    return model;
}

RobotModel desk_robot_3dof() {
    RobotModel model;
    JointSpec j1;  // base yaw carrying a vertical column
    j1.axis = Eigen::Vector3d::UnitZ();
    j1.offset = Eigen::Vector3d(0.0, 0.0, 0.20);
    j1.radius = 0.05;
    j1.q_lo = -M_PI;
    j1.q_hi = M_PI;
    j1.qd_lo = -2.0;
    j1.qd_hi = 2.0;
    JointSpec j2;  // shoulder pitch
    j2.axis = Eigen::Vector3d::UnitY();
    j2.offset = Eigen::Vector3d(0.30, 0.0, 0.0);
    j2.radius = 0.05;
    j2.q_lo = -2.4;
    j2.q_hi = 2.4;
    j2.qd_lo = -2.0;
    j2.qd_hi = 2.0;
    JointSpec j3 = j2;  // elbow pitch
    model.joints = {j1, j2, j3};
    model.base_radius = 0.05;
    validate(model);
    return model;
}

}  // namespace reachguard
