#include "reachguard/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace reachguard {

HalfspaceRep halfspace_rep(const Zonotope& z) {
    if (z.dim() != 3) throw std::invalid_argument("halfspace_rep: zonotope must be 3-dimensional");
    const Mat& G = z.generators;
    const int m = static_cast<int>(G.cols());
    if (Eigen::FullPivLU<Mat>(G).rank() < 3)
        throw std::invalid_argument("halfspace_rep: generators must span R^3");

    std::vector<Eigen::Vector3d> normals;
    normals.reserve(static_cast<std::size_t>(m * (m - 1)));
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            Eigen::Vector3d n = G.col(i).head<3>().cross(G.col(j).head<3>());
            const double len = n.norm();
            if (len < 1e-12 * G.col(i).norm() * G.col(j).norm()) continue;  // parallel pair
            n /= len;
            bool dup = false;
            for (const auto& seen : normals) {
                if ((seen - n).norm() < 1e-9 || (seen + n).norm() < 1e-9) {
                    dup = true;
                    break;
                }
            }
            if (!dup) normals.push_back(n);
        }
    }

    HalfspaceRep rep;
    rep.A.resize(2 * static_cast<int>(normals.size()), 3);
    rep.b.resize(2 * static_cast<int>(normals.size()));
    for (std::size_t i = 0; i < normals.size(); ++i) {
        const Eigen::Vector3d& n = normals[i];
        rep.A.row(2 * static_cast<int>(i)) = n.transpose();
        rep.A.row(2 * static_cast<int>(i) + 1) = -n.transpose();
        rep.b[2 * static_cast<int>(i)] = z.support(n);
        rep.b[2 * static_cast<int>(i) + 1] = z.support(-n);
    }
    return rep;
}

double halfspace_margin(const HalfspaceRep& rep, const Eigen::Vector3d& p) {
    return (rep.A * p - rep.b).maxCoeff();
}

namespace {

// KKT residual of 0.5||G beta - r||^2 over the unit box.
double box_kkt_residual(const Vec& beta, const Vec& grad) {
    double res = 0.0;
    for (int i = 0; i < beta.size(); ++i) {
        double r;
        if (beta[i] <= -1.0 + 1e-12)
            r = std::max(0.0, -grad[i]);
        else if (beta[i] >= 1.0 - 1e-12)
            r = std::max(0.0, grad[i]);
        else
            r = std::abs(grad[i]);
        res = std::max(res, r);
    }
    return res;
}

}  // namespace

Vec project_onto_zonotope(const Zonotope& z, const Eigen::Vector3d& p, double kkt_tol) {
    // Bounded-variable least squares (Stark-Parker style active set):
    // minimize 0.5 ||G beta - r||^2 over the unit box.  Each outer pass frees
    // the most KKT-violating bound coordinate; the inner loop exactly solves
    // the free block and clamps coordinates that cross a bound on the way.
    const Mat& G = z.generators;
    const int m = static_cast<int>(G.cols());
    if (m == 0) return Vec::Zero(0);
    const Vec r = p - z.center;
    const Mat H = G.transpose() * G;
    const Vec q = G.transpose() * r;  // gradient = H beta - q

    // Warm start from the clamped minimum-norm solution.
    std::vector<int> state(static_cast<std::size_t>(m), 0);  // -1 lower, 0 free, +1 upper
    Vec beta = G.completeOrthogonalDecomposition().solve(r);
    for (int i = 0; i < m; ++i) {
        if (beta[i] <= -1.0) {
            beta[i] = -1.0;
            state[static_cast<std::size_t>(i)] = -1;
        } else if (beta[i] >= 1.0) {
            beta[i] = 1.0;
            state[static_cast<std::size_t>(i)] = 1;
        }
    }

    for (int outer = 0; outer < 30 * m + 30; ++outer) {
        // Inner loop: exact minimization over the current free set.
        for (int inner = 0; inner <= m; ++inner) {
            std::vector<int> free_idx;
            for (int i = 0; i < m; ++i)
                if (state[static_cast<std::size_t>(i)] == 0) free_idx.push_back(i);
            if (free_idx.empty()) break;
            const int f = static_cast<int>(free_idx.size());
            Mat Gf(3, f);
            Vec rf = r;
            for (int i = 0; i < m; ++i)
                if (state[static_cast<std::size_t>(i)] != 0) rf -= G.col(i) * beta[i];
            for (int c = 0; c < f; ++c) Gf.col(c) = G.col(free_idx[static_cast<std::size_t>(c)]);
            const Vec bf = Gf.completeOrthogonalDecomposition().solve(rf);

            // Largest feasible fraction of the move toward the free optimum.
            double alpha = 1.0;
            int blocker = -1, blocker_dir = 0;
            for (int c = 0; c < f; ++c) {
                const int i = free_idx[static_cast<std::size_t>(c)];
                if (bf[c] > 1.0) {
                    const double a = (1.0 - beta[i]) / (bf[c] - beta[i]);
                    if (a < alpha) {
                        alpha = a;
                        blocker = i;
                        blocker_dir = 1;
                    }
                } else if (bf[c] < -1.0) {
                    const double a = (-1.0 - beta[i]) / (bf[c] - beta[i]);
                    if (a < alpha) {
                        alpha = a;
                        blocker = i;
                        blocker_dir = -1;
                    }
                }
            }
            if (blocker < 0) {
                for (int c = 0; c < f; ++c) beta[free_idx[static_cast<std::size_t>(c)]] = bf[c];
                break;  // free block is at its unconstrained optimum
            }
            for (int c = 0; c < f; ++c) {
                const int i = free_idx[static_cast<std::size_t>(c)];
                beta[i] += alpha * (bf[c] - beta[i]);
                if (beta[i] >= 1.0 - 1e-14) {
                    beta[i] = 1.0;
                    state[static_cast<std::size_t>(i)] = 1;
                } else if (beta[i] <= -1.0 + 1e-14) {
                    beta[i] = -1.0;
                    state[static_cast<std::size_t>(i)] = -1;
                }
            }
            beta[blocker] = blocker_dir;
            state[static_cast<std::size_t>(blocker)] = blocker_dir;
        }

        const Vec g = H * beta - q;
        if (box_kkt_residual(beta, g) <= kkt_tol) return beta;

        // Free the bound coordinate whose multiplier violates optimality most.
        int best = -1;
        double worst = kkt_tol;
        for (int i = 0; i < m; ++i) {
            const int s = state[static_cast<std::size_t>(i)];
            const double violation = s == -1 ? -g[i] : (s == 1 ? g[i] : 0.0);
            if (violation > worst) {
                worst = violation;
                best = i;
            }
        }
        if (best < 0) return beta;  // bound multipliers all optimal
        state[static_cast<std::size_t>(best)] = 0;
    }
    return beta;
}

double signed_distance_point(const Zonotope& z, const HalfspaceRep& rep, const Eigen::Vector3d& p) {
    const double margin = halfspace_margin(rep, p);
    if (margin <= 0.0) return margin;  // inside: -penetration depth
    const Vec beta = project_onto_zonotope(z, p);
    return (z.center + z.generators * beta - p).norm();
}

SignedDistanceResult signed_distance_point_grad(const Zonotope& z, const HalfspaceRep& rep,
                                                const Eigen::Vector3d& p) {
    SignedDistanceResult out;
    Eigen::Index row = 0;
    const double margin = (rep.A * p - rep.b).maxCoeff(&row);
    if (margin <= 0.0) {
        out.value = margin;
        out.grad = rep.A.row(row).transpose();
        return out;
    }
    const Vec beta = project_onto_zonotope(z, p);
    const Eigen::Vector3d diff = p - (z.center + z.generators * beta).head<3>();
    out.value = diff.norm();
    out.grad = out.value > 1e-12 ? (diff / out.value).eval() : rep.A.row(row).transpose();
    return out;
}

double sphere_clearance(const Zonotope& z, const HalfspaceRep& rep, const Ball& sphere) {
    return signed_distance_point(z, rep, sphere.center) - sphere.radius;
}

std::vector<Eigen::Vector2d> vertices_2d(const Zonotope& z) {
    if (z.dim() != 2) throw std::invalid_argument("vertices_2d: zonotope must be 2-dimensional");

    // Normalize generator signs into the upper half-plane and merge parallel
    // directions so every edge of the walk has positive length.
    std::vector<Eigen::Vector2d> gens;
    for (int c = 0; c < z.generators.cols(); ++c) {
        Eigen::Vector2d g = z.generators.col(c);
        if (g.norm() < 1e-15) continue;
        if (g.y() < 0.0 || (g.y() == 0.0 && g.x() < 0.0)) g = -g;
        bool merged = false;
        for (auto& seen : gens) {
            const double cross = seen.x() * g.y() - seen.y() * g.x();
            if (std::abs(cross) <= 1e-14 * seen.norm() * g.norm()) {
                seen += g;
                merged = true;
                break;
            }
        }
        if (!merged) gens.push_back(g);
    }
    if (gens.size() < 2)
        throw std::invalid_argument("vertices_2d: generators must span R^2");

    std::sort(gens.begin(), gens.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x());
    });

    // Boundary walk: from the all-minus vertex, add 2g in angle order, then
    // subtract in the same order; directions rotate monotonically, so the
    // polygon is convex and counterclockwise.
    const std::size_t m = gens.size();
    std::vector<Eigen::Vector2d> verts;
    verts.reserve(2 * m);
    Eigen::Vector2d v = z.center;
    for (const auto& g : gens) v -= g;
    verts.push_back(v);
    for (std::size_t i = 0; i + 1 < 2 * m; ++i) {
        const Eigen::Vector2d& g = gens[i % m];
        v += (i < m ? 2.0 : -2.0) * g;
        verts.push_back(v);
    }
    return verts;
}

SegmentDistance point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& v1,
                                       const Eigen::Vector2d& v2) {
    const Eigen::Vector2d e = v2 - v1;
    const double len2 = e.squaredNorm();
    SegmentDistance out;
    out.t = len2 > 0.0 ? std::clamp((p - v1).dot(e) / len2, 0.0, 1.0) : 0.0;
    out.distance = (p - (v1 + out.t * e)).norm();
    return out;
}

namespace {

Zonotope buffered_obstacle(const Zonotope& obstacle, const Mat& ego_generators) {
    if (obstacle.dim() != 2) throw std::invalid_argument("buffered obstacle must be 2-dimensional");
    if (ego_generators.rows() != 2)
        throw std::invalid_argument("ego generators must be 2 x m");
    Mat g(2, ego_generators.cols() + obstacle.generators.cols());
    g << ego_generators, obstacle.generators;
    return Zonotope(obstacle.center, std::move(g));
}

}  // namespace

std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> buffered_segments_2d(
    const Zonotope& obstacle, const Mat& ego_generators) {
    const auto verts = vertices_2d(buffered_obstacle(obstacle, ego_generators));
    std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> segs;
    segs.reserve(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i)
        segs.emplace_back(verts[i], verts[(i + 1) % verts.size()]);
    return segs;
}

std::pair<Mat, Vec> buffered_halfspace_2d(const Zonotope& obstacle, const Mat& ego_generators) {
    const Zonotope buf = buffered_obstacle(obstacle, ego_generators);
    const auto verts = vertices_2d(buf);
    Mat A(static_cast<int>(verts.size()), 2);
    Vec b(static_cast<int>(verts.size()));
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const Eigen::Vector2d e = verts[(i + 1) % verts.size()] - verts[i];
        Eigen::Vector2d n(e.y(), -e.x());  // outward for a CCW polygon
        n.normalize();
        A.row(static_cast<int>(i)) = n.transpose();
        b[static_cast<int>(i)] = n.dot(verts[i]);
    }
    return {A, b};
}

double signed_distance_2d(const Zonotope& ego, const std::vector<Zonotope>& obstacles) {
    if (ego.dim() != 2) throw std::invalid_argument("signed_distance_2d: ego must be 2-dimensional");
    if (obstacles.empty()) throw std::invalid_argument("signed_distance_2d: no obstacles");
    const Eigen::Vector2d c = ego.center.head<2>();
    double min_dist = std::numeric_limits<double>::infinity();
    bool intersecting = false;
    for (const auto& obs : obstacles) {
        const auto [A, b] = buffered_halfspace_2d(obs, ego.generators);
        if (((A * c - b).array() <= 0.0).all()) intersecting = true;
        for (const auto& [v1, v2] : buffered_segments_2d(obs, ego.generators))
            min_dist = std::min(min_dist, point_segment_distance(c, v1, v2).distance);
    }
    return intersecting ? -min_dist : min_dist;
}

}  // namespace reachguard
