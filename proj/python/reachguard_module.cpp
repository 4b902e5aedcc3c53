// Python bindings for the core operations: robot models, exact forward
// kinematics, sliced occupancy spheres, signed distances, the compiled
// planar network, conformal calibration arithmetic, and a single-episode
// planning helper.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reachguard/conformal.hpp"
#include "reachguard/dataset.hpp"
#include "reachguard/harness.hpp"
#include "reachguard/kinematics.hpp"
#include "reachguard/planner.hpp"
#include "reachguard/relu_net.hpp"
#include "reachguard/robot.hpp"
#include "reachguard/sdf.hpp"
#include "reachguard/trajectory.hpp"
#include "reachguard/world.hpp"

namespace py = pybind11;
namespace rg = reachguard;

namespace {

rg::Zonotope make_zonotope(const rg::Vec& center, const rg::Mat& generators) {
    if (generators.size() > 0 && generators.rows() != center.size())
        throw std::invalid_argument("generator rows must match the center dimension");
    rg::Zonotope z;
    z.center = center;
    z.generators = generators.size() > 0 ? generators : rg::Mat::Zero(center.size(), 0);
    return z;
}

std::vector<rg::Obstacle> obstacles_from_pairs(
    const std::vector<std::pair<rg::Vec, rg::Mat>>& raw) {
    std::vector<rg::Obstacle> out;
    out.reserve(raw.size());
    for (const auto& [c, g] : raw) out.push_back(rg::make_obstacle(make_zonotope(c, g)));
    return out;
}

// Sliced occupancy spheres 0..n_q for one partition interval of the default
// trajectory family.
std::vector<std::pair<Eigen::Vector3d, double>> occupancy_balls(const rg::RobotModel& model,
                                                                const rg::Vec& q0,
                                                                const rg::Vec& qd0,
                                                                const rg::Vec& k, int interval) {
    rg::TrajectoryFamily fam = rg::default_family(model);
    fam.q0 = q0;
    fam.qd0 = qd0;
    rg::TimePartition part;
    const auto entries = rg::sjo_for_interval(model, fam, part, interval);
    std::vector<std::pair<Eigen::Vector3d, double>> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        const rg::Ball b = rg::slice_entry(e, k);
        out.emplace_back(b.center, b.radius);
    }
    return out;
}

py::dict run_episode(const rg::RobotModel& model,
                     const std::vector<std::pair<rg::Vec, rg::Mat>>& raw_obstacles,
                     const rg::Vec& q_start, const rg::Vec& q_goal, int max_iters,
                     double time_budget) {
    rg::PlanProblem prob;
    prob.mode = rg::PlanMode::ExactSfo;
    prob.robot = model;
    prob.obstacles = obstacles_from_pairs(raw_obstacles);
    prob.fam = rg::default_family(model);
    prob.config.time_budget = time_budget;
    rg::EpisodeConfig cfg;
    cfg.max_iters = max_iters;
    const auto collides = [&](const rg::Mat& cols) {
        return rg::ground_truth_collision(model, cols, prob.obstacles);
    };
    const rg::EpisodeLog log = rg::plan_episode(prob, q_start, q_goal, cfg, collides);
    py::dict out;
    out["outcome"] = log.outcome == rg::EpisodeOutcome::Success     ? "success"
                     : log.outcome == rg::EpisodeOutcome::Collision ? "collision"
                                                                    : "stuck";
    out["iterations"] = static_cast<int>(log.iterations.size());
    out["final_goal_dist"] = log.final_goal_dist;
    out["executed_q"] = log.executed_q;
    return out;
}

}  // namespace

PYBIND11_MODULE(_reachguard, m) {
    m.doc() = "probabilistically safe receding-horizon arm planning (core bindings)";

    py::class_<rg::RobotModel>(m, "RobotModel")
        .def_property_readonly("n_q", &rg::RobotModel::n_q)
        .def_property_readonly("reach", &rg::RobotModel::reach)
        .def("__repr__", [](const rg::RobotModel& r) {
            return "<RobotModel n_q=" + std::to_string(r.n_q()) + ">";
        });

    m.def("desk_robot_2dof", &rg::desk_robot_2dof, "planar two-link test robot");
    m.def("desk_robot_3dof", &rg::desk_robot_3dof, "base yaw + two pitch joints");
    m.def("load_robot", &rg::load_robot, py::arg("path"), "load a robot JSON file");

    m.def(
        "sphere_centers",
        [](const rg::RobotModel& model, const rg::Vec& q) {
            return rg::sphere_centers(model, q);
        },
        py::arg("model"), py::arg("q"), "joint sphere centers 0..n_q at configuration q");

    m.def("occupancy_balls", &occupancy_balls, py::arg("model"), py::arg("q0"), py::arg("qd0"),
          py::arg("k"), py::arg("interval"),
          "sliced occupancy spheres (center, radius) for one partition interval");

    m.def(
        "covering_spheres",
        [](const Eigen::Vector3d& ca, double ra, const Eigen::Vector3d& cb, double rb, int n_s) {
            std::vector<std::pair<Eigen::Vector3d, double>> out;
            for (const rg::Ball& b : rg::sfo_slice({ca, ra}, {cb, rb}, n_s))
                out.emplace_back(b.center, b.radius);
            return out;
        },
        py::arg("center_a"), py::arg("radius_a"), py::arg("center_b"), py::arg("radius_b"),
        py::arg("n_s"), "spheres covering the tapered capsule between two balls");

    m.def(
        "signed_distance_point",
        [](const rg::Vec& center, const rg::Mat& generators, const Eigen::Vector3d& p) {
            const rg::Zonotope z = make_zonotope(center, generators);
            return rg::signed_distance_point(z, rg::halfspace_rep(z), p);
        },
        py::arg("center"), py::arg("generators"), py::arg("point"),
        "exact signed distance from a point to a zonotope (negative inside)");

    m.def(
        "signed_distance_2d",
        [](const rg::Vec& ego_center, const rg::Mat& ego_generators,
           const std::vector<std::pair<rg::Vec, rg::Mat>>& obstacles) {
            std::vector<rg::Zonotope> zs;
            zs.reserve(obstacles.size());
            for (const auto& [c, g] : obstacles) zs.push_back(make_zonotope(c, g));
            return rg::signed_distance_2d(make_zonotope(ego_center, ego_generators), zs);
        },
        py::arg("ego_center"), py::arg("ego_generators"), py::arg("obstacles"),
        "planar signed distance between a moving body and buffered obstacles");

    py::class_<rg::CompiledSdfNet>(m, "CompiledPlanarSdf")
        .def(py::init([](const std::vector<std::pair<rg::Vec, rg::Mat>>& obstacles,
                         const rg::Mat& ego_generators) {
                 std::vector<rg::Zonotope> zs;
                 zs.reserve(obstacles.size());
                 for (const auto& [c, g] : obstacles) zs.push_back(make_zonotope(c, g));
                 return rg::compile_sdf_net(zs, ego_generators);
             }),
             py::arg("obstacles"), py::arg("ego_generators"))
        .def("__call__",
             [](const rg::CompiledSdfNet& net, const Eigen::Vector2d& p) {
                 return rg::eval_compiled_sdf(net, p);
             })
        .def_property_readonly("segments",
                               [](const rg::CompiledSdfNet& n) { return n.total_segments; })
        .def_property_readonly("relu_width",
                               [](const rg::CompiledSdfNet& n) { return n.distance_size.relu_width; })
        .def_property_readonly("relu_depth",
                               [](const rg::CompiledSdfNet& n) { return n.distance_size.relu_depth; });

    m.def(
        "nonconformity",
        [](const Eigen::Vector3d& truth_c, double truth_r, const Eigen::Vector3d& pred_c,
           double pred_r) { return rg::nonconformity({truth_c, truth_r}, {pred_c, pred_r}); },
        py::arg("truth_center"), py::arg("truth_radius"), py::arg("pred_center"),
        py::arg("pred_radius"), "radius inflation that makes the prediction enclose the truth");
    m.def("calibrate", &rg::calibrate, py::arg("scores"), py::arg("eps_hat"),
          "split-conformal quantile of nonconformity scores");
    m.def("beta_coverage", &rg::beta_coverage, py::arg("n_cal"), py::arg("eps_hat"),
          py::arg("rho"), "dataset-conditioned coverage level");
    m.def("compose_guarantee", &rg::compose_guarantee, py::arg("epsilon"), py::arg("n_q"),
          "chain enclosure probability (1-eps)^(n_q+1)");

    m.def("plan_episode", &run_episode, py::arg("model"), py::arg("obstacles"),
          py::arg("q_start"), py::arg("q_goal"), py::arg("max_iters") = 150,
          py::arg("time_budget") = 10.0,
          "run one exact-mode receding-horizon episode; obstacles are (center, generators)");

    m.def(
        "cube",
        [](const Eigen::Vector3d& center, double edge) {
            const rg::Zonotope z = rg::axis_aligned_cube(center, edge);
            return std::make_pair(rg::Vec(z.center), rg::Mat(z.generators));
        },
        py::arg("center"), py::arg("edge"), "axis-aligned cube as (center, generators)");
}
