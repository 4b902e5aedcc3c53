#include "reachguard/occupancy.hpp"

#include "reachguard/kinematics.hpp"
#include "reachguard/rng.hpp"
#include "reachguard/trajectory.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace reachguard;

namespace {

// Independent oracle for tapered-capsule membership: dense grid over the
// axis parameter.
double grid_clearance(const Ball& a, const Ball& b, const Eigen::Vector3d& x, int n = 20000) {
    double best = 1e300;
    for (int i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) / n;
        const Eigen::Vector3d c = (1 - s) * a.center + s * b.center;
        const double r = (1 - s) * a.radius + s * b.radius;
        best = std::min(best, (x - c).norm() - r);
    }
    return best;
}

Eigen::Vector3d random_unit(Rng& rng) {
    Eigen::Vector3d v;
    do {
        v << rng.normal(), rng.normal(), rng.normal();
    } while (v.norm() < 1e-9);
    return v.normalized();
}

}  // namespace

TEST_CASE("sjo of a constant chain keeps the bare joint radii") {
    const RobotModel model = desk_robot_3dof();
    Vec q(3);
    q << 0.4, -0.7, 1.2;
    std::vector<PolyZonotope> angles;
    for (int j = 0; j < 3; ++j) angles.push_back(PolyZonotope::constant(q[j]));
    const auto entries = sjo(model, fk_pz(model, angles));
    REQUIRE(entries.size() == 4);
    CHECK(entries[0].radius == doctest::Approx(model.base_radius));
    CHECK(entries[0].residual == doctest::Approx(0.0));
    const auto frames = fk(model, q);
    for (int j = 1; j <= 3; ++j) {
        CHECK(entries[static_cast<std::size_t>(j)].radius ==
              doctest::Approx(model.joints[static_cast<std::size_t>(j - 1)].radius)
                  .epsilon(1e-9));
        const Ball ball = slice_entry(entries[static_cast<std::size_t>(j)], Vec::Zero(3));
        CHECK((ball.center - frames[static_cast<std::size_t>(j - 1)].p).norm() < 1e-9);
    }
}

TEST_CASE("sjo residual is the euclidean norm of the box half-extents") {
    // Hand-built frame whose position has a known independent box.
    const RobotModel model = desk_robot_2dof();
    std::vector<FramePz> frames;
    for (int j = 0; j < 2; ++j) {
        FramePz f;
        f.R = Mat3Pz::identity();
        Vec c(3);
        c << 0.1 * (j + 1), 0.0, 0.0;
        Mat indep = Mat::Zero(3, 2);
        indep.col(0) << 3e-3, 0.0, 0.0;
        indep.col(1) << 0.0, 4e-3, 0.0;
        f.p = PolyZonotope(c, Mat::Zero(3, 0), MatI(0, 0), {}, indep);
        frames.push_back(f);
    }
    const auto entries = sjo(model, frames);
    for (int j = 1; j <= 2; ++j) {
        CHECK(entries[static_cast<std::size_t>(j)].residual == doctest::Approx(5e-3));
        CHECK(entries[static_cast<std::size_t>(j)].radius ==
              doctest::Approx(model.joints[static_cast<std::size_t>(j - 1)].radius + 5e-3));
        CHECK_FALSE(entries[static_cast<std::size_t>(j)].center_pz.has_indet_kind(IndetKind::Time));
        CHECK_FALSE(
            entries[static_cast<std::size_t>(j)].center_pz.has_indet_kind(IndetKind::Error));
    }
}

TEST_CASE("sliced occupancy balls contain the sampled joint spheres") {
    Rng rng(41, 0);
    const RobotModel model = desk_robot_3dof();
    TrajectoryFamily fam;
    fam.q0 = (Vec(3) << -0.3, 0.5, 0.2).finished();
    fam.qd0 = (Vec(3) << 0.6, -0.4, 0.3).finished();
    fam.k_scale = Vec::Ones(3);
    TimePartition part;
    const auto pieces = time_pieces(fam, part);
    for (int pi : {3, 22, 38}) {
        const TimePiece& piece = pieces[static_cast<std::size_t>(pi)];
        const auto entries = sjo(model, fk_pz(model, q_pz(fam, piece)));
        for (int s = 0; s < 350; ++s) {
            const double t = rng.uniform(piece.t_lo, piece.t_hi);
            Vec k(3);
            for (int j = 0; j < 3; ++j) k[j] = rng.uniform(-1.0, 1.0);
            const auto centers = sphere_centers(model, q_of_t(fam, t, k));
            for (std::size_t j = 0; j < entries.size(); ++j) {
                const Ball ball = slice_entry(entries[j], k);
                // Joint ball of radius r_j inside the occupancy ball.
                const double r_j = j == 0 ? model.base_radius : model.joints[j - 1].radius;
                CHECK((centers[j] - ball.center).norm() + r_j <= ball.radius + 1e-9);
            }
        }
    }
}

TEST_CASE("slice_entry_grad matches finite differences") {
    Rng rng(41, 1);
    const RobotModel model = desk_robot_3dof();
    TrajectoryFamily fam;
    fam.q0 = (Vec(3) << 0.2, -0.1, 0.6).finished();
    fam.qd0 = (Vec(3) << 0.3, 0.2, -0.2).finished();
    fam.k_scale = Vec::Ones(3);
    TimePartition part;
    const auto pieces = time_pieces(fam, part);
    const auto entries = sjo(model, fk_pz(model, q_pz(fam, pieces[12])));
    for (int rep = 0; rep < 10; ++rep) {
        Vec k(3);
        for (int j = 0; j < 3; ++j) k[j] = rng.uniform(-0.9, 0.9);
        for (const auto& entry : entries) {
            const auto [center, grad] = slice_entry_grad(entry, k);
            CHECK((center - slice_entry(entry, k).center).norm() < 1e-12);
            const double h = 1e-6;
            for (int j = 0; j < 3; ++j) {
                Vec kp = k, km = k;
                kp[j] += h;
                km[j] -= h;
                const Eigen::Vector3d fd =
                    (slice_entry(entry, kp).center - slice_entry(entry, km).center) / (2 * h);
                CHECK((grad.col(j) - fd).norm() < 1e-5);
            }
        }
    }
}

TEST_CASE("single covering sphere bounds the whole capsule") {
    const Ball a{Eigen::Vector3d(0, 0, 0), 0.3};
    const Ball b{Eigen::Vector3d(1, 0, 0), 0.1};
    const auto cover = sfo_slice(a, b, 1);
    REQUIRE(cover.size() == 1);
    CHECK(cover[0].center.isApprox(Eigen::Vector3d(0.5, 0, 0)));
    CHECK(cover[0].radius == doctest::Approx(0.5 + 0.3));
    // Both end balls inside.
    CHECK((a.center - cover[0].center).norm() + a.radius <= cover[0].radius + 1e-12);
    CHECK((b.center - cover[0].center).norm() + b.radius <= cover[0].radius + 1e-12);
}

TEST_CASE("degenerate capsule gives coincident spheres") {
    const Ball a{Eigen::Vector3d(0.2, -0.1, 0.5), 0.15};
    const Ball b{a.center, 0.08};
    const auto cover = sfo_slice(a, b, 4);
    REQUIRE(cover.size() == 4);
    // Zero segment length: every center collapses onto the shared point and
    // each radius is the larger interpolated end radius of its sub-segment.
    double prev = std::numeric_limits<double>::infinity();
    for (const Ball& s : cover) {
        CHECK(s.center.isApprox(a.center, 1e-12));
        CHECK(s.radius <= 0.15 + 1e-12);
        CHECK(s.radius >= 0.08 - 1e-12);
        CHECK(s.radius <= prev + 1e-12);  // taper shrinks toward b
        prev = s.radius;
    }
    // The union still covers the degenerate capsule B(center, 0.15): the
    // first sphere alone has the full radius.
    CHECK(cover[0].radius == doctest::Approx(0.15));
}

TEST_CASE("covering spheres contain sampled capsule points for several n_s") {
    Rng rng(42, 0);
    for (int n_s : {1, 3, 5}) {
        for (int rep = 0; rep < 40; ++rep) {
            Ball a, b;
            a.center = random_unit(rng) * rng.uniform(0.0, 0.5);
            b.center = random_unit(rng) * rng.uniform(0.0, 0.5);
            a.radius = rng.uniform(0.01, 0.25);
            b.radius = rng.uniform(0.01, 0.25);
            const auto cover = sfo_slice(a, b, n_s);
            REQUIRE(static_cast<int>(cover.size()) == n_s);
            for (int s = 0; s < 90; ++s) {
                // Uniform over the hull via rejection from the enclosing box,
                // using the independent dense-grid membership oracle.
                Eigen::Vector3d lo =
                    a.center.cwiseMin(b.center) - Eigen::Vector3d::Constant(std::max(a.radius, b.radius));
                Eigen::Vector3d hi =
                    a.center.cwiseMax(b.center) + Eigen::Vector3d::Constant(std::max(a.radius, b.radius));
                Eigen::Vector3d x;
                bool inside = false;
                for (int tries = 0; tries < 200 && !inside; ++tries) {
                    for (int d = 0; d < 3; ++d) x[d] = rng.uniform(lo[d], hi[d]);
                    inside = grid_clearance(a, b, x, 400) <= 0.0;
                }
                if (!inside) continue;
                bool covered = false;
                for (const Ball& c : cover)
                    if ((x - c.center).norm() <= c.radius + 1e-9) covered = true;
                CHECK(covered);
            }
        }
    }
}

TEST_CASE("covering radii shrink as the sphere count grows") {
    const Ball a{Eigen::Vector3d(0, 0, 0), 0.2};
    const Ball b{Eigen::Vector3d(0.8, 0.3, -0.2), 0.05};
    double prev_max = 1e300;
    for (int n_s : {1, 2, 4, 8, 16}) {
        double max_r = 0.0;
        for (const Ball& s : sfo_slice(a, b, n_s)) max_r = std::max(max_r, s.radius);
        CHECK(max_r <= prev_max + 1e-12);
        prev_max = max_r;
    }
}

TEST_CASE("covering conservatism stays modest at the default sphere count") {
    // Monte-Carlo volume ratio union(cover)/capsule; reported, sanity-bounded.
    Rng rng(42, 1);
    const Ball a{Eigen::Vector3d(0, 0, 0), 0.12};
    const Ball b{Eigen::Vector3d(0.6, 0, 0), 0.07};
    const auto cover = sfo_slice(a, b, 5);
    Eigen::Vector3d lo(-0.25, -0.25, -0.25), hi(0.85, 0.25, 0.25);
    int in_capsule = 0, in_union = 0;
    for (int s = 0; s < 60000; ++s) {
        Eigen::Vector3d x;
        for (int d = 0; d < 3; ++d) x[d] = rng.uniform(lo[d], hi[d]);
        const bool cap = grid_clearance(a, b, x, 300) <= 0.0;
        bool uni = false;
        for (const Ball& c : cover)
            if ((x - c.center).norm() <= c.radius) uni = true;
        if (cap) {
            ++in_capsule;
            CHECK(uni);  // capsule subset of the union
        }
        if (uni) ++in_union;
    }
    const double ratio = static_cast<double>(in_union) / std::max(1, in_capsule);
    MESSAGE("covering volume ratio at n_s=5: ", ratio);
    CHECK(ratio >= 1.0);
    // Covering balls carry len/(2 n_s) of slack on top of the end radii, so
    // some bloat is inherent; three-fold is the sanity ceiling here.
    CHECK(ratio < 3.0);
}

TEST_CASE("tapered capsule membership agrees with the dense grid oracle") {
    Rng rng(43, 0);
    const Ball a{Eigen::Vector3d(0, 0, 0), 0.3};
    const Ball b{Eigen::Vector3d(1, 0.2, -0.1), 0.12};
    CHECK(tapered_capsule_contains(a, b, a.center));
    CHECK(tapered_capsule_contains(a, b, b.center));
    const Eigen::Vector3d away = a.center - (b.center - a.center).normalized() * (a.radius + 1e-6);
    CHECK_FALSE(tapered_capsule_contains(a, b, away));

    for (int rep = 0; rep < 1000; ++rep) {
        Eigen::Vector3d x;
        for (int d = 0; d < 3; ++d) x[d] = rng.uniform(-0.6, 1.6);
        const double exact = tapered_capsule_clearance(a, b, x);
        const double grid = grid_clearance(a, b, x);
        // The grid minimizes over a subset, so it can only overestimate.
        CHECK(exact <= grid + 1e-12);
        CHECK(grid - exact < 1e-7);
        if (std::abs(exact) > 1e-6) CHECK(tapered_capsule_contains(a, b, x) == (exact <= 0.0));
    }
}
