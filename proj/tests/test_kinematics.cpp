#include "reachguard/kinematics.hpp"

#include "reachguard/rng.hpp"
#include "reachguard/trajectory.hpp"

#include <doctest.h>

#include <cmath>

using namespace reachguard;

namespace {

RobotModel unit_planar_2dof() {
    RobotModel model;
    JointSpec j;
    j.axis = Eigen::Vector3d::UnitZ();
    j.offset = Eigen::Vector3d(1.0, 0.0, 0.0);
    j.radius = 0.05;
    j.q_lo = -M_PI;
    j.q_hi = M_PI;
    model.joints = {j, j};
    return model;
}

// Independent oracle: chain of 4x4 homogeneous transforms built from
// Eigen's angle-axis rotation (a different code path than the library's).
std::vector<Eigen::Vector3d> homogeneous_chain_positions(const RobotModel& model, const Vec& q) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    std::vector<Eigen::Vector3d> out;
    for (int j = 0; j < model.n_q(); ++j) {
        const JointSpec& spec = model.joints[static_cast<std::size_t>(j)];
        Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
        R.topLeftCorner<3, 3>() = Eigen::AngleAxisd(q[j], spec.axis).toRotationMatrix();
        Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
        P.topRightCorner<3, 1>() = spec.offset;
        T = T * R * P;
        out.push_back(T.topRightCorner<3, 1>());
    }
    return out;
}

}  // namespace

TEST_CASE("fk at zero sums the offsets") {
    const RobotModel model = desk_robot_3dof();
    const auto frames = fk(model, Vec::Zero(3));
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int j = 0; j < 3; ++j) {
        acc += model.joints[static_cast<std::size_t>(j)].offset;
        CHECK(frames[static_cast<std::size_t>(j)].p.isApprox(acc, 1e-14));
        CHECK(frames[static_cast<std::size_t>(j)].R.isApprox(Eigen::Matrix3d::Identity(), 1e-14));
    }
}

TEST_CASE("planar two-link elbow-up geometry") {
    const RobotModel model = unit_planar_2dof();
    Vec q(2);
    q << M_PI / 2.0, 0.0;
    const auto frames = fk(model, q);
    CHECK(frames[1].p.isApprox(Eigen::Vector3d(0.0, 2.0, 0.0), 1e-12));
    q << M_PI / 2.0, -M_PI / 2.0;
    const auto bent = fk(model, q);
    CHECK(bent[1].p.isApprox(Eigen::Vector3d(1.0, 1.0, 0.0), 1e-12));
}

TEST_CASE("fk matches the homogeneous matrix chain oracle") {
    Rng rng(31, 0);
    const RobotModel model = desk_robot_3dof();
    for (int rep = 0; rep < 200; ++rep) {
        Vec q(3);
        for (int j = 0; j < 3; ++j)
            q[j] = rng.uniform(model.joints[static_cast<std::size_t>(j)].q_lo,
                               model.joints[static_cast<std::size_t>(j)].q_hi);
        const auto frames = fk(model, q);
        const auto oracle = homogeneous_chain_positions(model, q);
        for (int j = 0; j < 3; ++j) {
            CHECK((frames[static_cast<std::size_t>(j)].p - oracle[static_cast<std::size_t>(j)])
                      .norm() == doctest::Approx(0.0).epsilon(1e-12));
            const Eigen::Matrix3d& R = frames[static_cast<std::size_t>(j)].R;
            CHECK((R.transpose() * R - Eigen::Matrix3d::Identity()).norm() < 1e-10);
            CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("sphere_centers prepends the base sphere") {
    const RobotModel model = desk_robot_3dof();
    Vec q(3);
    q << 0.3, -0.2, 0.8;
    const auto centers = sphere_centers(model, q);
    REQUIRE(centers.size() == 4);
    CHECK(centers[0].isZero(0));
    const auto frames = fk(model, q);
    for (int j = 0; j < 3; ++j)
        CHECK(centers[static_cast<std::size_t>(j + 1)]
                  .isApprox(frames[static_cast<std::size_t>(j)].p, 1e-14));
}

TEST_CASE("constant angle enclosures collapse fk_pz to the exact pose") {
    const RobotModel model = desk_robot_3dof();
    Vec q(3);
    q << 0.7, -1.1, 0.4;
    std::vector<PolyZonotope> angles;
    for (int j = 0; j < 3; ++j) angles.push_back(PolyZonotope::constant(q[j]));
    const auto set_frames = fk_pz(model, angles);
    const auto exact = fk(model, q);
    for (int j = 0; j < 3; ++j) {
        const auto [lo, hi] = interval_bound(set_frames[static_cast<std::size_t>(j)].p);
        for (int d = 0; d < 3; ++d) {
            CHECK(lo[d] == doctest::Approx(exact[static_cast<std::size_t>(j)].p[d]).epsilon(1e-9));
            CHECK(hi[d] == doctest::Approx(exact[static_cast<std::size_t>(j)].p[d]).epsilon(1e-9));
        }
    }
}

TEST_CASE("fk_pz encloses sampled forward kinematics over a time piece") {
    Rng rng(31, 1);
    const RobotModel model = desk_robot_3dof();
    TrajectoryFamily fam;
    fam.q0 = (Vec(3) << 0.2, -0.4, 0.9).finished();
    fam.qd0 = (Vec(3) << 0.4, 0.3, -0.5).finished();
    fam.k_scale = (Vec(3) << 1.0, 1.0, 1.0).finished();
    TimePartition part;
    const auto pieces = time_pieces(fam, part);
    for (int pi : {0, 18, 31}) {
        const TimePiece& piece = pieces[static_cast<std::size_t>(pi)];
        const auto set_frames = fk_pz(model, q_pz(fam, piece));
        for (int s = 0; s < 1000; ++s) {
            const double t = rng.uniform(piece.t_lo, piece.t_hi);
            Vec k(3);
            for (int j = 0; j < 3; ++j) k[j] = rng.uniform(-1.0, 1.0);
            const auto frames = fk(model, q_of_t(fam, t, k));
            std::vector<std::pair<Indet, double>> vals{
                {traj_param(1), k[0]}, {traj_param(2), k[1]}, {traj_param(3), k[2]}};
            for (int j = 0; j < 3; ++j) {
                const PolyZonotope& ppz = set_frames[static_cast<std::size_t>(j)].p;
                for (int d = 0; d < 3; ++d) {
                    const SlicedBound b = pz_sliced_bound(ppz.component(d), vals);
                    const double x = frames[static_cast<std::size_t>(j)].p[d];
                    CHECK(x >= b.lo - 1e-9);
                    CHECK(x <= b.hi + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("position uncertainty accumulates down the chain") {
    const RobotModel model = desk_robot_3dof();
    TrajectoryFamily fam;
    fam.q0 = Vec::Zero(3);
    fam.qd0 = (Vec(3) << 0.5, 0.5, 0.5).finished();
    fam.k_scale = Vec::Ones(3);
    TimePartition part;
    const auto pieces = time_pieces(fam, part);
    const auto set_frames = fk_pz(model, q_pz(fam, pieces[10]));
    double prev_width = -1.0;
    for (int j = 0; j < 3; ++j) {
        const auto [lo, hi] = interval_bound(set_frames[static_cast<std::size_t>(j)].p);
        const double width = (hi - lo).norm();
        CHECK(width >= prev_width - 1e-12);
        prev_width = width;
    }
}

TEST_CASE("rotation enclosure entries stay near [-1, 1]") {
    const RobotModel model = desk_robot_3dof();
    TrajectoryFamily fam;
    fam.q0 = (Vec(3) << 1.0, -0.5, 0.3).finished();
    fam.qd0 = (Vec(3) << 1.0, 1.0, 1.0).finished();
    fam.k_scale = Vec::Ones(3);
    TimePartition part;
    const auto pieces = time_pieces(fam, part);
    const auto set_frames = fk_pz(model, q_pz(fam, pieces[0]));
    for (const auto& frame : set_frames) {
        for (int e = 0; e < 9; ++e) {
            const auto [lo, hi] = interval_bound(frame.R.m[static_cast<std::size_t>(e)]);
            CHECK(lo[0] >= -1.1);
            CHECK(hi[0] <= 1.1);
        }
    }
}
