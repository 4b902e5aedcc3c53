#include "reachguard/planner.hpp"

#include "reachguard/parallel.hpp"
#include "reachguard/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace reachguard {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

// Sphere chain (positions, radii, jacobians w.r.t. k) for one piece.
struct SphereChain {
    std::vector<Eigen::Vector3d> c;
    std::vector<double> r;
    std::vector<Mat> J;  // 3 x n_q per sphere
};

struct Precomputed {
    std::vector<TimePiece> pieces;
    std::vector<std::vector<PolyZonotope>> q;    // per piece, per joint
    std::vector<std::vector<PolyZonotope>> qd;   // per piece, per joint
    std::vector<std::vector<SjoEntry>> spheres;  // per piece (exact mode only)
    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> obstacle_aabb;
};

void check_problem(const PlanProblem& prob) {
    validate(prob.robot);
    validate(prob.fam, prob.part);
    if (prob.q_goal.size() != prob.robot.n_q())
        throw std::invalid_argument("planner: q_goal dimension mismatch");
    if (prob.mode == PlanMode::ConformalizedNeural) {
        if (prob.surrogate == nullptr)
            throw std::invalid_argument("planner: ConformalizedNeural mode needs a surrogate");
        if (prob.surrogate->calibration.delta_per_joint.size() != prob.robot.n_q())
            throw std::invalid_argument("planner: calibration size mismatch");
    }
}

Precomputed precompute(const PlanProblem& prob) {
    Precomputed pre;
    pre.pieces = time_pieces(prob.fam, prob.part);
    const std::size_t n_pieces = pre.pieces.size();
    pre.q.resize(n_pieces);
    pre.qd.resize(n_pieces);
    const bool exact = prob.mode == PlanMode::ExactSfo;
    if (exact) pre.spheres.resize(n_pieces);
    auto build = [&](std::int64_t p) {
        const auto idx = static_cast<std::size_t>(p);
        pre.q[idx] = q_pz(prob.fam, pre.pieces[idx]);
        pre.qd[idx] = qd_pz(prob.fam, pre.pieces[idx]);
        if (exact)
            pre.spheres[idx] = sjo(prob.robot, fk_pz(prob.robot, pre.q[idx], prob.config.fk));
    };
    if (prob.config.parallel && exact)
        parallel_for(static_cast<std::int64_t>(n_pieces), build);
    else
        for (std::size_t p = 0; p < n_pieces; ++p) build(static_cast<std::int64_t>(p));
    pre.obstacle_aabb.reserve(prob.obstacles.size());
    for (const auto& obstacle : prob.obstacles) pre.obstacle_aabb.push_back(zonotope_aabb(obstacle.body));
    return pre;
}

std::vector<std::pair<Indet, double>> k_assignment(const Vec& k) {
    std::vector<std::pair<Indet, double>> values;
    values.reserve(static_cast<std::size_t>(k.size()));
    for (int j = 0; j < k.size(); ++j) values.emplace_back(traj_param(j + 1), k[j]);
    return values;
}

// Chains for every piece at one parameter value.
std::vector<SphereChain> chains_at(const PlanProblem& prob, const Precomputed& pre, const Vec& k) {
    const int n_q = prob.robot.n_q();
    const std::size_t n_pieces = pre.pieces.size();
    std::vector<SphereChain> chains(n_pieces);
    if (prob.mode == PlanMode::ExactSfo) {
        const auto values = k_assignment(k);
        for (std::size_t p = 0; p < n_pieces; ++p) {
            auto& chain = chains[p];
            chain.c.resize(static_cast<std::size_t>(n_q) + 1);
            chain.r.resize(static_cast<std::size_t>(n_q) + 1);
            chain.J.resize(static_cast<std::size_t>(n_q) + 1);
            for (int j = 0; j <= n_q; ++j) {
                const auto& entry = pre.spheres[p][static_cast<std::size_t>(j)];
                auto [center, grad] = pz_eval_grad(entry.center_pz, values);
                chain.c[static_cast<std::size_t>(j)] = center;
                chain.J[static_cast<std::size_t>(j)] = grad;
                chain.r[static_cast<std::size_t>(j)] = entry.radius;
            }
        }
        return chains;
    }

    const NeuralSfo& surrogate = *prob.surrogate;
    const int input_dim = dataset_input_dim(n_q, prob.part.n_t, surrogate.encoding);
    Mat X(input_dim, static_cast<int>(n_pieces));
    for (std::size_t p = 0; p < n_pieces; ++p)
        X.col(static_cast<int>(p)) = encode_input(prob.fam.q0, prob.fam.qd0, k,
                                                  pre.pieces[p].interval, prob.part.n_t,
                                                  surrogate.encoding);
    const Mat centers = surrogate.center_net.forward_batch(X);
    const Mat radii = surrogate.radius_net.forward_batch(X);
    Mat grads;
    if (prob.config.use_grad_net) grads = surrogate.grad_net.forward_batch(X);
    for (std::size_t p = 0; p < n_pieces; ++p) {
        auto& chain = chains[p];
        chain.c.resize(static_cast<std::size_t>(n_q) + 1);
        chain.r.resize(static_cast<std::size_t>(n_q) + 1);
        chain.J.resize(static_cast<std::size_t>(n_q) + 1);
        chain.c[0].setZero();
        chain.r[0] = prob.robot.base_radius;
        chain.J[0] = Mat::Zero(3, n_q);
        Mat Jx;
        if (!prob.config.use_grad_net) Jx = surrogate.center_net.input_jacobian(X.col(static_cast<int>(p)));
        for (int j = 1; j <= n_q; ++j) {
            chain.c[static_cast<std::size_t>(j)] =
                centers.col(static_cast<int>(p)).segment(3 * (j - 1), 3);
            chain.r[static_cast<std::size_t>(j)] =
                radii(j - 1, static_cast<int>(p)) + surrogate.calibration.delta_per_joint[j - 1];
            Mat J(3, n_q);
            if (prob.config.use_grad_net) {
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < n_q; ++c)
                        J(r, c) = grads((j - 1) * 3 * n_q + r * n_q + c, static_cast<int>(p));
            } else {
                J = Jx.block(3 * (j - 1), 2 * n_q, 3, n_q);
            }
            chain.J[static_cast<std::size_t>(j)] = std::move(J);
        }
    }
    return chains;
}

// Covering sphere m (1-based) of the link between chain spheres j-1 and j.
struct CoveringSphere {
    Eigen::Vector3d center;
    double radius;
    Vec radius_grad;  // d radius / d k
    Mat center_jac;   // 3 x n_q
};

CoveringSphere covering_sphere(const SphereChain& chain, int j, int m, int n_s) {
    const auto a = static_cast<std::size_t>(j - 1);
    const auto b = static_cast<std::size_t>(j);
    const Eigen::Vector3d e = chain.c[b] - chain.c[a];
    const double len = e.norm();
    const double lambda = (m - 0.5) / n_s;
    const double sa = static_cast<double>(m - 1) / n_s;
    const double sb = static_cast<double>(m) / n_s;
    const double ra = chain.r[a] + sa * (chain.r[b] - chain.r[a]);
    const double rb = chain.r[a] + sb * (chain.r[b] - chain.r[a]);
    CoveringSphere s;
    s.center = chain.c[a] + lambda * e;
    s.radius = len / (2.0 * n_s) + std::max(ra, rb);
    const Mat dE = chain.J[b] - chain.J[a];
    if (len > 1e-12)
        s.radius_grad = (dE.transpose() * e) / (len * 2.0 * n_s);
    else
        s.radius_grad = Vec::Zero(chain.J[a].cols());
    s.center_jac = chain.J[a] + lambda * dE;
    return s;
}

// Distance from a point to an axis-aligned box (zero inside): a lower bound
// on the signed distance to the zonotope the box encloses.
double aabb_distance(const std::pair<Eigen::Vector3d, Eigen::Vector3d>& box,
                     const Eigen::Vector3d& p) {
    const Eigen::Vector3d d =
        (box.first - p).cwiseMax(p - box.second).cwiseMax(Eigen::Vector3d::Zero());
    return d.norm();
}

struct EvalCounters {
    std::atomic<long> evals{0};
    std::atomic<long long> eval_ns{0};
};

struct ConstraintLayout {
    int n_pieces = 0;
    int n_q = 0;
    int n_s = 0;
    int n_obs = 0;

    int n_limit() const { return n_pieces * n_q * 4; }
    int n_collision() const { return n_pieces * n_q * n_s * n_obs; }
    int total() const { return n_limit() + n_collision(); }
    long collision_index(int piece, int link, int m, int obs) const {
        return n_limit() +
               ((static_cast<long>(piece) * n_q + (link - 1)) * n_s + (m - 1)) * n_obs + obs;
    }
};

ConstraintLayout layout_of(const PlanProblem& prob, const Precomputed& pre) {
    ConstraintLayout lay;
    lay.n_pieces = static_cast<int>(pre.pieces.size());
    lay.n_q = prob.robot.n_q();
    lay.n_s = prob.config.n_s;
    lay.n_obs = static_cast<int>(prob.obstacles.size());
    return lay;
}

// Augmented-Lagrangian value/gradient at k.  Collision terms whose cheap
// lower bound proves g <= 0 while their multiplier is zero contribute
// exactly nothing and skip the exact distance solve.  When g_out is given,
// every exactly-evaluated constraint index/value pair is appended (skipped
// ones are guaranteed nonpositive, so their multiplier stays zero).
struct AlEval {
    double value = 0.0;
    Vec grad;
    double max_violation = -std::numeric_limits<double>::infinity();
};

AlEval al_eval(const PlanProblem& prob, const Precomputed& pre, const ConstraintLayout& lay,
               const Vec& k, const Vec& lambda, double mu, EvalCounters& counters,
               std::vector<std::pair<long, double>>* g_out) {
    const auto t0 = Clock::now();
    const int n_q = lay.n_q;
    AlEval out;
    out.grad = Vec::Zero(n_q);

    // Cost: squared distance of the braked endpoint to the waypoint.
    const Vec qe = q_end(prob.fam, k);
    const Mat Je = q_end_jacobian(prob.fam);
    out.value = 0.5 * (qe - prob.q_goal).squaredNorm();
    out.grad = Je.transpose() * (qe - prob.q_goal);

    // Optimize against constraints tightened beyond the verification slack:
    // the cost pushes solutions onto the constraint boundary, and a boundary
    // point of the tightened problem still verifies strictly feasible on the
    // true constraints afterwards.
    const double tighten = 2.0 * prob.config.verify_slack;

    const auto add_term = [&](long index, double g, const Vec& dg) {
        const double shifted = lambda[index] + mu * g;
        if (shifted > 0.0) {
            out.value += (shifted * shifted - lambda[index] * lambda[index]) / (2.0 * mu);
            out.grad += shifted * dg;
        } else {
            out.value -= lambda[index] * lambda[index] / (2.0 * mu);
        }
        out.max_violation = std::max(out.max_violation, g);
        if (g_out != nullptr) g_out->emplace_back(index, g);
    };

    // Limit rows.
    const auto values = k_assignment(k);
    long index = 0;
    for (int p = 0; p < lay.n_pieces; ++p) {
        for (int j = 0; j < n_q; ++j) {
            const auto& spec = prob.robot.joints[static_cast<std::size_t>(j)];
            const auto qb = pz_sliced_bound(pre.q[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)], values);
            const auto vb = pz_sliced_bound(pre.qd[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)], values);
            add_term(index++, qb.hi - spec.q_hi + tighten, qb.dhi);
            add_term(index++, spec.q_lo - qb.lo + tighten, -qb.dlo);
            add_term(index++, vb.hi - spec.qd_hi + tighten, vb.dhi);
            add_term(index++, spec.qd_lo - vb.lo + tighten, -vb.dlo);
        }
    }

    // Collision rows.
    if (lay.n_obs > 0) {
        const auto chains = chains_at(prob, pre, k);
        for (int p = 0; p < lay.n_pieces; ++p) {
            for (int j = 1; j <= n_q; ++j) {
                for (int m = 1; m <= lay.n_s; ++m) {
                    const CoveringSphere sphere = covering_sphere(chains[static_cast<std::size_t>(p)], j, m, lay.n_s);
                    for (int n = 0; n < lay.n_obs; ++n) {
                        const long ci = lay.collision_index(p, j, m, n);
                        const double threshold =
                            sphere.radius + prob.config.collision_margin + tighten;
                        if (lambda[ci] == 0.0 &&
                            aabb_distance(pre.obstacle_aabb[static_cast<std::size_t>(n)], sphere.center) >=
                                threshold) {
                            continue;  // provably satisfied, zero contribution
                        }
                        const auto& obstacle = prob.obstacles[static_cast<std::size_t>(n)];
                        const SignedDistanceResult sd =
                            signed_distance_point_grad(obstacle.body, obstacle.hs, sphere.center);
                        const double g = threshold - sd.value;
                        const Vec dg = sphere.radius_grad - sphere.center_jac.transpose() * sd.grad;
                        add_term(ci, g, dg);
                    }
                }
            }
        }
    }

    counters.evals.fetch_add(1, std::memory_order_relaxed);
    counters.eval_ns.fetch_add(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count(),
        std::memory_order_relaxed);
    return out;
}

ConstraintEval eval_constraints_with(const PlanProblem& prob, const Precomputed& pre, const Vec& k) {
    const ConstraintLayout lay = layout_of(prob, pre);
    const int n_q = lay.n_q;
    ConstraintEval out;
    out.n_limit = lay.n_limit();
    out.n_collision = lay.n_collision();
    out.values.resize(lay.total());
    out.gradients.resize(lay.total(), n_q);

    const auto values = k_assignment(k);
    long index = 0;
    for (int p = 0; p < lay.n_pieces; ++p) {
        for (int j = 0; j < n_q; ++j) {
            const auto& spec = prob.robot.joints[static_cast<std::size_t>(j)];
            const auto qb = pz_sliced_bound(pre.q[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)], values);
            const auto vb = pz_sliced_bound(pre.qd[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)], values);
            out.values[index] = qb.hi - spec.q_hi;
            out.gradients.row(index++) = qb.dhi.transpose();
            out.values[index] = spec.q_lo - qb.lo;
            out.gradients.row(index++) = -qb.dlo.transpose();
            out.values[index] = vb.hi - spec.qd_hi;
            out.gradients.row(index++) = vb.dhi.transpose();
            out.values[index] = spec.qd_lo - vb.lo;
            out.gradients.row(index++) = -vb.dlo.transpose();
        }
    }

    if (lay.n_obs > 0) {
        const auto chains = chains_at(prob, pre, k);
        for (int p = 0; p < lay.n_pieces; ++p) {
            for (int j = 1; j <= n_q; ++j) {
                for (int m = 1; m <= lay.n_s; ++m) {
                    const CoveringSphere sphere = covering_sphere(chains[static_cast<std::size_t>(p)], j, m, lay.n_s);
                    for (int n = 0; n < lay.n_obs; ++n) {
                        const auto& obstacle = prob.obstacles[static_cast<std::size_t>(n)];
                        const SignedDistanceResult sd =
                            signed_distance_point_grad(obstacle.body, obstacle.hs, sphere.center);
                        const long ci = lay.collision_index(p, j, m, n);
                        out.values[ci] = sphere.radius + prob.config.collision_margin - sd.value;
                        out.gradients.row(ci) =
                            (sphere.radius_grad - sphere.center_jac.transpose() * sd.grad).transpose();
                    }
                }
            }
        }
    }
    return out;
}

Vec clamp_box(Vec k) {
    for (int i = 0; i < k.size(); ++i) k[i] = std::clamp(k[i], -1.0, 1.0);
    return k;
}

struct StartResult {
    bool certified = false;
    Vec k;
    double cost = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

// Box-projected quasi-Newton descent on the augmented Lagrangian from one
// start, multiplier updates between inner loops.
StartResult run_start(const PlanProblem& prob, const Precomputed& pre, const ConstraintLayout& lay,
                      Vec k, Clock::time_point deadline, EvalCounters& counters) {
    Vec lambda = Vec::Zero(lay.total());
    double mu = 10.0;
    double prev_violation = std::numeric_limits<double>::infinity();
    StartResult result;
    k = clamp_box(std::move(k));

    for (int outer = 0; outer < prob.config.al_outer_iters; ++outer) {
        std::deque<Vec> s_mem, y_mem;
        AlEval cur = al_eval(prob, pre, lay, k, lambda, mu, counters, nullptr);
        for (int inner = 0; inner < prob.config.inner_iters; ++inner) {
            if (Clock::now() > deadline) break;
            // Projected-gradient stationarity test.
            const Vec stationarity = clamp_box(k - cur.grad) - k;
            if (stationarity.lpNorm<Eigen::Infinity>() <= 1e-9) break;
            ++result.iterations;

            // Two-loop recursion over the curvature memory.
            Vec d = -cur.grad;
            std::vector<double> alpha(s_mem.size());
            for (std::size_t h = s_mem.size(); h-- > 0;) {
                const double rho = 1.0 / y_mem[h].dot(s_mem[h]);
                alpha[h] = rho * s_mem[h].dot(d);
                d -= alpha[h] * y_mem[h];
            }
            if (!s_mem.empty()) {
                const double gamma =
                    s_mem.back().dot(y_mem.back()) / y_mem.back().squaredNorm();
                d *= gamma;
            }
            for (std::size_t h = 0; h < s_mem.size(); ++h) {
                const double rho = 1.0 / y_mem[h].dot(s_mem[h]);
                const double beta = rho * y_mem[h].dot(d);
                d += (alpha[h] - beta) * s_mem[h];
            }
            if (d.dot(cur.grad) >= 0.0) d = -cur.grad;  // keep a descent direction

            // Backtracking Armijo search along the projected arc.
            double step = 1.0;
            bool accepted = false;
            AlEval next;
            Vec k_next;
            for (int ls = 0; ls < 30; ++ls) {
                k_next = clamp_box(k + step * d);
                const Vec delta = k_next - k;
                if (delta.lpNorm<Eigen::Infinity>() < 1e-14) break;
                next = al_eval(prob, pre, lay, k_next, lambda, mu, counters, nullptr);
                if (next.value <= cur.value + 1e-4 * cur.grad.dot(delta)) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;

            const Vec s = k_next - k;
            const Vec y = next.grad - cur.grad;
            if (s.dot(y) > 1e-12) {
                s_mem.push_back(s);
                y_mem.push_back(y);
                if (s_mem.size() > 8) {
                    s_mem.pop_front();
                    y_mem.pop_front();
                }
            }
            k = k_next;
            cur = next;
        }

        // Multiplier update from exactly evaluated terms; skipped terms are
        // provably nonpositive with zero multiplier, so they stay at zero.
        std::vector<std::pair<long, double>> g_values;
        const AlEval final_eval = al_eval(prob, pre, lay, k, lambda, mu, counters, &g_values);
        double violation = 0.0;
        for (const auto& [idx, g] : g_values)
            lambda[idx] = std::max(0.0, lambda[idx] + mu * g);
        violation = std::max(final_eval.max_violation, 0.0);
        if (violation <= 0.0) break;  // feasible point found; verification decides
        if (violation > 0.25 * prev_violation) mu = std::min(mu * 10.0, 1e8);
        prev_violation = violation;
        if (Clock::now() > deadline) break;
    }

    // Strict verification on freshly assembled exact constraints.
    const ConstraintEval verify = eval_constraints_with(prob, pre, k);
    counters.evals.fetch_add(1, std::memory_order_relaxed);
    if (verify.values.size() == 0 || verify.values.maxCoeff() <= -prob.config.verify_slack) {
        result.certified = true;
        result.k = k;
        result.cost = 0.5 * (q_end(prob.fam, k) - prob.q_goal).squaredNorm();
    } else {
        result.k = k;
    }
    return result;
}

}  // namespace

ConstraintEval eval_constraints(const PlanProblem& prob, const Vec& k) {
    check_problem(prob);
    if (k.size() != prob.robot.n_q()) throw std::invalid_argument("eval_constraints: k dimension mismatch");
    const Precomputed pre = precompute(prob);
    return eval_constraints_with(prob, pre, k);
}

PlanResult solve(const PlanProblem& prob) {
    check_problem(prob);
    const auto t0 = Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(prob.config.time_budget));
    const int n_q = prob.robot.n_q();
    const Precomputed pre = precompute(prob);
    const ConstraintLayout lay = layout_of(prob, pre);

    // Start points: zero, endpoint heuristic, deterministic perturbations.
    std::vector<Vec> starts;
    starts.push_back(Vec::Zero(n_q));
    const Mat Je = q_end_jacobian(prob.fam);
    Vec heuristic(n_q);
    const Vec qe0 = q_end(prob.fam, Vec::Zero(n_q));
    for (int j = 0; j < n_q; ++j)
        heuristic[j] = Je(j, j) > 1e-12 ? (prob.q_goal[j] - qe0[j]) / Je(j, j) : 0.0;
    starts.push_back(clamp_box(heuristic));
    for (int extra = 2; extra < prob.config.multistarts; ++extra) {
        Rng rng(0x5717u, static_cast<std::uint64_t>(extra));
        Vec k(n_q);
        for (int j = 0; j < n_q; ++j) k[j] = heuristic[j] + rng.uniform(-0.4, 0.4);
        starts.push_back(clamp_box(std::move(k)));
    }
    if (static_cast<int>(starts.size()) > std::max(prob.config.multistarts, 1))
        starts.resize(static_cast<std::size_t>(std::max(prob.config.multistarts, 1)));

    EvalCounters counters;
    std::vector<StartResult> results(starts.size());
    auto run = [&](std::int64_t i) {
        results[static_cast<std::size_t>(i)] =
            run_start(prob, pre, lay, starts[static_cast<std::size_t>(i)], deadline, counters);
    };
    if (prob.config.parallel)
        parallel_for(static_cast<std::int64_t>(starts.size()), run);
    else
        for (std::size_t i = 0; i < starts.size(); ++i) run(static_cast<std::int64_t>(i));

    PlanResult out;
    int best = -1;
    for (std::size_t i = 0; i < results.size(); ++i) {
        out.iterations += results[i].iterations;
        if (!results[i].certified) continue;
        if (best < 0 || results[i].cost < results[static_cast<std::size_t>(best)].cost)
            best = static_cast<int>(i);
    }
    if (best >= 0) {
        out.status = PlanStatus::Feasible;
        out.k = results[static_cast<std::size_t>(best)].k;
        out.cost = results[static_cast<std::size_t>(best)].cost;
        out.certified = true;
    }
    out.constraint_evals = counters.evals.load();
    out.eval_time = static_cast<double>(counters.eval_ns.load()) * 1e-9;
    out.wall_time = seconds_between(t0, Clock::now());
    return out;
}

// ------------------------------------------------------------------ episode

EpisodeLog plan_episode(PlanProblem prob, const Vec& q_start, const Vec& q_goal,
                        const EpisodeConfig& cfg, const CollisionCallback& collides) {
    const int n_q = prob.robot.n_q();
    if (q_start.size() != n_q || q_goal.size() != n_q)
        throw std::invalid_argument("plan_episode: state dimension mismatch");

    EpisodeLog log;
    std::vector<double> ts;
    std::vector<Vec> qs, qds;
    double t_abs = 0.0;
    Vec q_cur = q_start;
    Vec qd_cur = Vec::Zero(n_q);
    ts.push_back(0.0);
    qs.push_back(q_cur);
    qds.push_back(qd_cur);

    TrajectoryFamily tail_fam;  // previous feasible trajectory, if unfinished
    Vec tail_k;
    bool have_tail = false;
    int consecutive_failures = 0;
    bool done = false;

    // Samples one trajectory on (t_from, t_to] and runs the collision
    // callback on the segment; returns false when a collision ends the run.
    const auto execute = [&](const TrajectoryFamily& fam, const Vec& k, double t_from, double t_to) {
        const int n_samples = std::max(1, static_cast<int>(std::llround((t_to - t_from) / cfg.sample_dt)));
        Mat segment(n_q, n_samples);
        for (int i = 1; i <= n_samples; ++i) {
            const double t = i == n_samples ? t_to : t_from + i * cfg.sample_dt;
            const Vec q = q_of_t(fam, t, k);
            const Vec qd = qd_of_t(fam, t, k);
            segment.col(i - 1) = q;
            ts.push_back(t_abs + (t - t_from));
            qs.push_back(q);
            qds.push_back(qd);
        }
        t_abs += t_to - t_from;
        q_cur = qs.back();
        qd_cur = qds.back();
        if (collides && collides(segment)) {
            log.outcome = EpisodeOutcome::Collision;
            return false;
        }
        return true;
    };

    for (int iter = 0; iter < cfg.max_iters && !done; ++iter) {
        Vec waypoint(n_q);
        for (int j = 0; j < n_q; ++j)
            waypoint[j] = q_cur[j] + std::clamp(q_goal[j] - q_cur[j], -cfg.waypoint_step, cfg.waypoint_step);
        prob.fam.q0 = q_cur;
        prob.fam.qd0 = qd_cur;
        prob.q_goal = waypoint;
        const PlanResult res = solve(prob);

        EpisodeIteration it;
        it.feasible = res.status == PlanStatus::Feasible;
        it.k = res.k;
        it.solve_time = res.wall_time;
        it.eval_time = res.eval_time;
        it.constraint_evals = res.constraint_evals;
        it.solver_iterations = res.iterations;
        log.iterations.push_back(std::move(it));

        if (res.status == PlanStatus::Feasible) {
            consecutive_failures = 0;
            const TrajectoryFamily fam = prob.fam;
            const bool finish =
                (q_end(fam, res.k) - q_goal).lpNorm<Eigen::Infinity>() < cfg.goal_tol;
            const double t_to = finish ? fam.t_final : fam.t_plan;
            if (!execute(fam, res.k, 0.0, t_to)) {
                done = true;
                break;
            }
            if (finish) {
                qd_cur.setZero();  // the family is at rest at t_final by construction
                log.outcome = EpisodeOutcome::Success;
                done = true;
            } else {
                tail_fam = fam;
                tail_k = res.k;
                have_tail = true;
            }
        } else {
            ++consecutive_failures;
            if (have_tail) {
                if (!execute(tail_fam, tail_k, tail_fam.t_plan, tail_fam.t_final)) {
                    done = true;
                    break;
                }
                qd_cur.setZero();
                have_tail = false;
            }
            // At rest: success may still hold if braking stopped near the goal.
            if (qd_cur.lpNorm<Eigen::Infinity>() == 0.0 &&
                (q_cur - q_goal).lpNorm<Eigen::Infinity>() < cfg.goal_tol) {
                log.outcome = EpisodeOutcome::Success;
                done = true;
            } else if (consecutive_failures >= 2) {
                log.outcome = EpisodeOutcome::Stuck;
                log.stuck_reason = StuckReason::ConsecutiveFailures;
                done = true;
            }
        }
    }
    if (!done) {
        log.outcome = EpisodeOutcome::Stuck;
        log.stuck_reason = StuckReason::MaxIters;
    }

    log.executed_t = std::move(ts);
    log.executed_q.resize(n_q, static_cast<int>(qs.size()));
    log.executed_qd.resize(n_q, static_cast<int>(qds.size()));
    for (std::size_t i = 0; i < qs.size(); ++i) {
        log.executed_q.col(static_cast<int>(i)) = qs[i];
        log.executed_qd.col(static_cast<int>(i)) = qds[i];
    }
    log.final_goal_dist = (q_cur - q_goal).lpNorm<Eigen::Infinity>();
    return log;
}

std::string episode_to_json_text(const EpisodeLog& log) {
    nlohmann::json j;
    j["format"] = "episode-v1";
    switch (log.outcome) {
        case EpisodeOutcome::Success: j["outcome"] = "success"; break;
        case EpisodeOutcome::Collision: j["outcome"] = "collision"; break;
        case EpisodeOutcome::Stuck: j["outcome"] = "stuck"; break;
    }
    switch (log.stuck_reason) {
        case StuckReason::None: j["stuck_reason"] = "none"; break;
        case StuckReason::ConsecutiveFailures: j["stuck_reason"] = "consecutive_failures"; break;
        case StuckReason::MaxIters: j["stuck_reason"] = "max_iters"; break;
    }
    j["final_goal_dist"] = log.final_goal_dist;
    j["iterations"] = nlohmann::json::array();
    for (const auto& it : log.iterations) {
        nlohmann::json item;
        item["feasible"] = it.feasible;
        item["k"] = std::vector<double>(it.k.data(), it.k.data() + it.k.size());
        item["solve_time"] = it.solve_time;
        item["eval_time"] = it.eval_time;
        item["constraint_evals"] = it.constraint_evals;
        item["solver_iterations"] = it.solver_iterations;
        j["iterations"].push_back(std::move(item));
    }
    j["executed"] = nlohmann::json::object();
    j["executed"]["t"] = log.executed_t;
    j["executed"]["q"] = nlohmann::json::array();
    j["executed"]["qd"] = nlohmann::json::array();
    for (int c = 0; c < log.executed_q.cols(); ++c) {
        const Vec q = log.executed_q.col(c);
        const Vec qd = log.executed_qd.col(c);
        j["executed"]["q"].push_back(std::vector<double>(q.data(), q.data() + q.size()));
        j["executed"]["qd"].push_back(std::vector<double>(qd.data(), qd.data() + qd.size()));
    }
    return j.dump();
}

}  // namespace reachguard
