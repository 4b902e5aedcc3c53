#include "reachguard/occupancy.hpp"

#include <cmath>
#include <stdexcept>

namespace reachguard {

std::vector<SjoEntry> sjo(const RobotModel& model, const std::vector<FramePz>& frames) {
    validate(model);
    if (static_cast<int>(frames.size()) != model.n_q())
        throw std::invalid_argument("sjo: one frame enclosure per joint required");

    std::vector<SjoEntry> entries;
    entries.reserve(frames.size() + 1);

    SjoEntry base;
    base.center_pz = PolyZonotope(Vec::Zero(3));
    base.radius = model.base_radius;
    base.residual = 0.0;
    entries.push_back(std::move(base));

    for (int j = 0; j < model.n_q(); ++j) {
        const PolyZonotope& p = frames[static_cast<std::size_t>(j)].p;

        // Split monomials: those whose exponents touch only trajectory
        // parameters stay in the center polynomial; everything else (time or
        // error dependence, and the independent part) is residual and gets
        // boxed.  The residual is parameter-independent by magnitude, so one
        // radius covers every k.
        const auto& ids = p.indets();
        std::vector<int> param_col, other_col;
        for (int c = 0; c < static_cast<int>(ids.size()); ++c)
            (ids[static_cast<std::size_t>(c)].kind == IndetKind::TrajParam ? param_col : other_col)
                .push_back(c);

        const int n = p.num_monomials();
        Mat center_dep(3, n);
        MatI center_expo(n, static_cast<int>(param_col.size()));
        int n_center = 0;
        Vec residual_box = p.indep_radius();
        for (int m = 0; m < n; ++m) {
            bool pure_param = true;
            for (int c : other_col)
                if (p.expo()(m, c) != 0) pure_param = false;
            if (pure_param) {
                center_dep.col(n_center) = p.dep().col(m);
                for (std::size_t c = 0; c < param_col.size(); ++c)
                    center_expo(n_center, static_cast<int>(c)) = p.expo()(m, param_col[c]);
                ++n_center;
            } else {
                residual_box += p.dep().col(m).cwiseAbs();
            }
        }
        std::vector<Indet> param_ids;
        param_ids.reserve(param_col.size());
        for (int c : param_col) param_ids.push_back(ids[static_cast<std::size_t>(c)]);

        SjoEntry entry;
        entry.center_pz = PolyZonotope(p.center(), center_dep.leftCols(n_center),
                                       center_expo.topRows(n_center), std::move(param_ids), Mat());
        entry.residual = residual_box.norm();
        entry.radius = model.joints[static_cast<std::size_t>(j)].radius + entry.residual;
        entries.push_back(std::move(entry));
    }
    return entries;
}

namespace {

std::vector<std::pair<Indet, double>> param_assignment(const Vec& k) {
    if ((k.array().abs() > 1.0 + 1e-12).any())
        throw std::invalid_argument("slice_entry: parameter outside [-1,1]");
    std::vector<std::pair<Indet, double>> values;
    values.reserve(static_cast<std::size_t>(k.size()));
    for (int j = 0; j < k.size(); ++j) values.emplace_back(traj_param(j + 1), k[j]);
    return values;
}

}  // namespace

Ball slice_entry(const SjoEntry& entry, const Vec& k) {
    const PolyZonotope sliced = pz_slice(entry.center_pz, param_assignment(k));
    if (sliced.num_monomials() != 0)
        throw std::runtime_error("slice_entry: center polynomial retained unexpected indeterminates");
    return Ball{sliced.center(), entry.radius};
}

std::pair<Eigen::Vector3d, Mat> slice_entry_grad(const SjoEntry& entry, const Vec& k) {
    auto [val, grad] = pz_eval_grad(entry.center_pz, param_assignment(k));
    return {Eigen::Vector3d(val), grad};
}

std::vector<Ball> sfo_slice(const Ball& a, const Ball& b, int n_s) {
    if (n_s < 1) throw std::invalid_argument("sfo_slice: need n_s >= 1");
    const Eigen::Vector3d d = b.center - a.center;
    const double len = d.norm();
    std::vector<Ball> spheres;
    spheres.reserve(static_cast<std::size_t>(n_s));
    for (int m = 1; m <= n_s; ++m) {
        const double lo = static_cast<double>(m - 1) / n_s;
        const double hi = static_cast<double>(m) / n_s;
        const double ra = a.radius + lo * (b.radius - a.radius);
        const double rb = a.radius + hi * (b.radius - a.radius);
        Ball s;
        s.center = a.center + (0.5 * (lo + hi)) * d;
        s.radius = len / (2.0 * n_s) + std::max(ra, rb);
        spheres.push_back(s);
    }
    return spheres;
}

double tapered_capsule_clearance(const Ball& a, const Ball& b, const Eigen::Vector3d& x) {
    // f(s) = ||x - c(s)|| - r(s) is convex on [0,1]; golden-section search.
    const auto f = [&](double s) {
        const Eigen::Vector3d c = a.center + s * (b.center - a.center);
        return (x - c).norm() - (a.radius + s * (b.radius - a.radius));
    };
    const double inv_phi = 0.6180339887498948482;
    double lo = 0.0, hi = 1.0;
    double m1 = hi - inv_phi * (hi - lo), m2 = lo + inv_phi * (hi - lo);
    double f1 = f(m1), f2 = f(m2);
    for (int it = 0; it < 120; ++it) {
        if (f1 <= f2) {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - inv_phi * (hi - lo);
            f1 = f(m1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + inv_phi * (hi - lo);
            f2 = f(m2);
        }
    }
    return std::min({f(lo), f1, f2, f(hi)});
}

bool tapered_capsule_contains(const Ball& a, const Ball& b, const Eigen::Vector3d& x) {
    return tapered_capsule_clearance(a, b, x) <= 0.0;
}

}  // namespace reachguard
