#include "reachguard/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace reachguard {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
    Eigen::Matrix3d s;
    s << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
    return s;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis, double angle) {
    const Eigen::Matrix3d K = skew(axis);
    return Eigen::Matrix3d::Identity() + std::sin(angle) * K + (1.0 - std::cos(angle)) * K * K;
}

}  // namespace

std::vector<FramePose> fk(const RobotModel& model, const Vec& q) {
    validate(model);
    if (q.size() != model.n_q()) throw std::invalid_argument("fk: angle dimension mismatch");
    std::vector<FramePose> frames;
    frames.reserve(model.joints.size());
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int j = 0; j < model.n_q(); ++j) {
        R = R * rodrigues(model.joints[static_cast<std::size_t>(j)].axis, q[j]);
        p = p + R * model.joints[static_cast<std::size_t>(j)].offset;
        frames.push_back({R, p});
    }
    return frames;
}

std::vector<Eigen::Vector3d> sphere_centers(const RobotModel& model, const Vec& q) {
    std::vector<Eigen::Vector3d> centers;
    centers.reserve(model.joints.size() + 1);
    centers.push_back(Eigen::Vector3d::Zero());
    for (const auto& f : fk(model, q)) centers.push_back(f.p);
    return centers;
}

Mat3Pz Mat3Pz::identity() { return Mat3Pz::constant(Eigen::Matrix3d::Identity()); }

Mat3Pz Mat3Pz::constant(const Eigen::Matrix3d& value) {
    Mat3Pz out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out.at(r, c) = PolyZonotope::constant(value(r, c));
    return out;
}

namespace {

// R(q) = I + sin(q) K + (1 - cos(q)) K^2, entrywise affine in the enclosures.
Mat3Pz rotation_pz(const Eigen::Vector3d& axis, const PolyZonotope& angle, int trig_order) {
    const TrigPair trig = pz_trig(angle, trig_order);
    const Eigen::Matrix3d K = skew(axis);
    const Eigen::Matrix3d K2 = K * K;
    Mat3Pz out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            PolyZonotope entry = PolyZonotope::constant((r == c ? 1.0 : 0.0) + K2(r, c));
            entry = pz_add(entry, pz_scale(trig.sin_pz, K(r, c)));
            entry = pz_add(entry, pz_scale(trig.cos_pz, -K2(r, c)));
            out.at(r, c) = std::move(entry);
        }
    }
    return out;
}

Mat3Pz mat_mul(const Mat3Pz& a, const Mat3Pz& b, int cap) {
    Mat3Pz out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            PolyZonotope sum = pz_mul(a.at(r, 0), b.at(0, c));
            sum = pz_add(sum, pz_mul(a.at(r, 1), b.at(1, c)));
            sum = pz_add(sum, pz_mul(a.at(r, 2), b.at(2, c)));
            out.at(r, c) = reduce(sum, cap);
        }
    }
    return out;
}

PolyZonotope rotate_offset(const Mat3Pz& R, const Eigen::Vector3d& v, int cap) {
    std::vector<PolyZonotope> comps;
    comps.reserve(3);
    for (int r = 0; r < 3; ++r) {
        PolyZonotope sum = pz_scale(R.at(r, 0), v.x());
        sum = pz_add(sum, pz_scale(R.at(r, 1), v.y()));
        sum = pz_add(sum, pz_scale(R.at(r, 2), v.z()));
        comps.push_back(reduce(sum, cap));
    }
    return pz_stack(comps);
}

}  // namespace

std::vector<FramePz> fk_pz(const RobotModel& model, const std::vector<PolyZonotope>& angles,
                           const FkPzOptions& opts) {
    validate(model);
    if (static_cast<int>(angles.size()) != model.n_q())
        throw std::invalid_argument("fk_pz: one angle enclosure per joint required");
    if (opts.reduce_cap < 8) throw std::invalid_argument("fk_pz: reduce_cap too small");

    std::vector<FramePz> frames;
    frames.reserve(angles.size());
    Mat3Pz R = Mat3Pz::identity();
    PolyZonotope p(Vec::Zero(3));
    for (int j = 0; j < model.n_q(); ++j) {
        const auto& joint = model.joints[static_cast<std::size_t>(j)];
        const Mat3Pz local = rotation_pz(joint.axis, angles[static_cast<std::size_t>(j)], opts.trig_order);
        R = mat_mul(R, local, opts.reduce_cap);
        p = reduce(pz_add(p, rotate_offset(R, joint.offset, opts.reduce_cap)), opts.reduce_cap);
        frames.push_back({R, p});
    }
    return frames;
}

}  // namespace reachguard
