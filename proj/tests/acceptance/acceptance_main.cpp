// Acceptance gate: seven end-to-end checks, one PASS/FAIL line each.
// Hard criteria drive the exit code; soft targets inside a criterion are
// reported in its detail line.  Every randomized check is seeded, and the
// heavyweight surrogate (data, training, calibration) is built once and
// shared by the criteria that need it.
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "reachguard/conformal.hpp"
#include "reachguard/dataset.hpp"
#include "reachguard/harness.hpp"
#include "reachguard/mlp.hpp"
#include "reachguard/occupancy.hpp"
#include "reachguard/planner.hpp"
#include "reachguard/relu_net.hpp"
#include "reachguard/rng.hpp"
#include "reachguard/sdf.hpp"
#include "reachguard/world.hpp"

using namespace reachguard;

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::string fmt(const char* format, ...) {
    char buffer[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return std::string(buffer);
}

// ------------------------------------------------------------- criterion 1
// Containment chain on the three-joint desk arm: sampled true link-capsule
// points must lie inside the covering spheres derived from the sliced
// per-interval ball chain, for random initial states, parameters and times.
Criterion criterion_containment() {
    Criterion crit;
    crit.name = "1 containment-chain";
    const double t0 = now_s();
    const double budget_s = 300.0;

    const RobotModel robot = desk_robot_3dof();
    const int n_q = robot.n_q();
    TrajectoryFamily fam = default_family(robot);
    TimePartition part;  // default: dt = 0.025, n_t = 40
    long violations = 0;
    long checks = 0;
    double worst_gap = -std::numeric_limits<double>::infinity();

    Rng rng(2026, 10);
    const int n_states = 10;
    const int n_samples = 1000;
    const int n_s = 5;
    for (int state = 0; state < n_states; ++state) {
        for (int j = 0; j < n_q; ++j) {
            const auto& spec = robot.joints[static_cast<size_t>(j)];
            fam.q0(j) = 0.8 * rng.uniform(spec.q_lo, spec.q_hi);
            fam.qd0(j) = 0.5 * rng.uniform(spec.qd_lo, spec.qd_hi);
        }
        // Reachable ball chain for every interval.
        std::vector<std::vector<SjoEntry>> entries(static_cast<size_t>(part.n_t));
        for (int i = 1; i <= part.n_t; ++i)
            entries[static_cast<size_t>(i - 1)] = sjo_for_interval(robot, fam, part, i);

        for (int s = 0; s < n_samples; ++s) {
            Vec k(n_q);
            for (int j = 0; j < n_q; ++j) k(j) = rng.uniform(-1.0, 1.0);
            const double t = rng.uniform(0.0, fam.t_final);
            const int interval = std::min(part.n_t, 1 + static_cast<int>(t / part.dt));
            const auto& chain = entries[static_cast<size_t>(interval - 1)];

            const Vec q = q_of_t(fam, t, k);
            const auto centers = sphere_centers(robot, q);

            // Joint spheres lie inside the sliced balls.
            std::vector<Ball> sliced(static_cast<size_t>(n_q + 1));
            for (int j = 0; j <= n_q; ++j) {
                sliced[static_cast<size_t>(j)] = slice_entry(chain[static_cast<size_t>(j)], k);
                const double r_true = j == 0 ? robot.base_radius
                                             : robot.joints[static_cast<size_t>(j - 1)].radius;
                const double gap = (centers[static_cast<size_t>(j)] -
                                    sliced[static_cast<size_t>(j)].center)
                                       .norm() +
                                   r_true - sliced[static_cast<size_t>(j)].radius;
                worst_gap = std::max(worst_gap, gap);
                ++checks;
                if (gap > 1e-9) ++violations;
            }
            // A random true link-capsule point lies inside some covering sphere.
            for (int j = 1; j <= n_q; ++j) {
                const double frac = rng.uniform();
                const double eta = rng.uniform();
                Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
                dir.normalize();
                const double r0 = j == 1 ? robot.base_radius
                                         : robot.joints[static_cast<size_t>(j - 2)].radius;
                const double r1 = robot.joints[static_cast<size_t>(j - 1)].radius;
                const Eigen::Vector3d point =
                    (1 - frac) * centers[static_cast<size_t>(j - 1)] +
                    frac * centers[static_cast<size_t>(j)] +
                    eta * ((1 - frac) * r0 + frac * r1) * dir;
                const auto covering = sfo_slice(sliced[static_cast<size_t>(j - 1)],
                                                sliced[static_cast<size_t>(j)], n_s);
                double best = std::numeric_limits<double>::infinity();
                for (const auto& ball : covering)
                    best = std::min(best, (point - ball.center).norm() - ball.radius);
                worst_gap = std::max(worst_gap, best);
                ++checks;
                if (best > 1e-9) ++violations;
            }
        }
    }

    crit.seconds = now_s() - t0;
    const bool in_budget = crit.seconds < budget_s;
    crit.pass = violations == 0 && in_budget;
    crit.detail = fmt("%ld/%ld violations, worst slack %.2e, %.1f s (budget %.0f s)", violations,
                      checks, worst_gap, crit.seconds, budget_s);
    return crit;
}

// ------------------------------------------------------------- criterion 2
// 3D signed distance against an independent active-set enumeration oracle,
// plus Lipschitz and sign checks on a larger sweep.
double enumerated_distance(const Zonotope& z, const Eigen::Vector3d& p) {
    const int m = static_cast<int>(z.generators.cols());
    const Mat& G = z.generators;
    const Eigen::Vector3d d = p - Eigen::Vector3d(z.center);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> state(static_cast<size_t>(m), 0);
    long total = 1;
    for (int i = 0; i < m; ++i) total *= 3;
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = 0; i < m; ++i) {
            state[static_cast<size_t>(i)] = static_cast<int>(c % 3);
            c /= 3;
        }
        Vec beta = Vec::Zero(m);
        std::vector<int> free_idx;
        for (int i = 0; i < m; ++i) {
            if (state[static_cast<size_t>(i)] == 0) beta(i) = -1.0;
            else if (state[static_cast<size_t>(i)] == 2) beta(i) = 1.0;
            else free_idx.push_back(i);
        }
        if (!free_idx.empty()) {
            const int f = static_cast<int>(free_idx.size());
            Mat Gf(3, f);
            for (int i = 0; i < f; ++i) Gf.col(i) = G.col(free_idx[static_cast<size_t>(i)]);
            Eigen::Vector3d rhs = d;
            for (int i = 0; i < m; ++i)
                if (state[static_cast<size_t>(i)] != 1) rhs -= beta(i) * G.col(i);
            const Eigen::FullPivLU<Mat> lu(Mat(Gf.transpose() * Gf));
            if (!lu.isInvertible()) continue;
            const Vec bf = lu.solve(Gf.transpose() * rhs);
            bool ok = true;
            for (int i = 0; i < f; ++i) {
                if (std::abs(bf(i)) > 1.0 + 1e-12) {
                    ok = false;
                    break;
                }
                beta(free_idx[static_cast<size_t>(i)]) = std::clamp(bf(i), -1.0, 1.0);
            }
            if (!ok) continue;
        }
        best = std::min(best, (Eigen::Vector3d(z.center) + G * beta - p).norm());
    }
    return best;
}

Criterion criterion_sdf() {
    Criterion crit;
    crit.name = "2 signed-distance";
    const double t0 = now_s();

    Rng rng(2026, 20);
    double worst_oracle = 0.0;
    int oracle_checked = 0;
    long bad = 0;
    while (oracle_checked < 1000) {
        const int m = 3 + static_cast<int>(rng.uniform_index(3));
        Zonotope z;
        z.center = Vec(3);
        z.generators = Mat(3, m);
        for (int i = 0; i < 3; ++i) z.center(i) = rng.uniform(-1.0, 1.0);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < 3; ++i) z.generators(i, j) = rng.uniform(-0.8, 0.8);
        HalfspaceRep hs;
        try {
            hs = halfspace_rep(z);
        } catch (const std::invalid_argument&) {
            continue;
        }
        const Eigen::Vector3d p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        if (halfspace_margin(hs, p) <= 1e-9) continue;  // oracle covers the outside branch
        const double sd = signed_distance_point(z, hs, p);
        const double oracle = enumerated_distance(z, p);
        worst_oracle = std::max(worst_oracle, std::abs(sd - oracle));
        if (std::abs(sd - oracle) > 1e-6) ++bad;
        ++oracle_checked;
    }

    // Lipschitz + sign sweep on one fixed zonotope.
    Zonotope z;
    z.center = Vec::Zero(3);
    z.generators = Mat(3, 5);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 3; ++i) z.generators(i, j) = rng.uniform(-0.7, 0.7);
    const auto hs = halfspace_rep(z);
    long lipschitz_bad = 0, sign_bad = 0;
    Eigen::Vector3d prev(2.0, 2.0, 2.0);
    double prev_sd = signed_distance_point(z, hs, prev);
    for (int i = 0; i < 10000; ++i) {
        const Eigen::Vector3d p(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5),
                                rng.uniform(-2.5, 2.5));
        const double sd = signed_distance_point(z, hs, p);
        const double margin = halfspace_margin(hs, p);
        if (margin > 1e-9 && sd <= 0.0) ++sign_bad;
        if (margin < -1e-9 && sd >= 0.0) ++sign_bad;
        if (std::abs(sd - prev_sd) > (p - prev).norm() + 1e-9) ++lipschitz_bad;
        prev = p;
        prev_sd = sd;
    }

    crit.seconds = now_s() - t0;
    crit.pass = bad == 0 && lipschitz_bad == 0 && sign_bad == 0;
    crit.detail = fmt("oracle max err %.2e over %d, lipschitz %ld bad, sign %ld bad, %.1f s",
                      worst_oracle, oracle_checked, lipschitz_bad, sign_bad, crit.seconds);
    return crit;
}

// ------------------------------------------------------------- criterion 3
// Compiled piecewise-linear network vs direct evaluation, with size bounds.
Criterion criterion_compiled_net() {
    Criterion crit;
    crit.name = "3 compiled-network";
    const double t0 = now_s();

    Rng rng(2026, 30);
    auto square = [](double cx, double cy, double half) {
        Zonotope z;
        z.center = Vec(2);
        z.center << cx, cy;
        z.generators = half * Mat::Identity(2, 2);
        return z;
    };
    auto random_obs = [&rng](int m) {
        Zonotope z;
        z.center = Vec(2);
        z.center << rng.uniform(-2, 2), rng.uniform(-2, 2);
        z.generators = Mat(2, m);
        for (int j = 0; j < m; ++j) {
            z.generators(0, j) = rng.uniform(-0.6, 0.6);
            z.generators(1, j) = rng.uniform(-0.6, 0.6);
        }
        return z;
    };

    struct Scene {
        std::vector<Zonotope> obstacles;
        Mat ego;
        int segments;
    };
    std::vector<Scene> scenes;
    scenes.push_back({{square(0, 0, 1)}, Mat::Zero(2, 0), 4});
    scenes.push_back({{square(-1.5, 0, 0.5), square(1.5, 0.5, 0.7)}, Mat::Zero(2, 0), 8});
    {
        Mat ego(2, 3);
        ego << 0.15, -0.05, 0.08, 0.04, 0.12, -0.1;
        scenes.push_back({{random_obs(3), random_obs(3)}, ego, 24});
    }

    double worst = 0.0;
    bool sizes_ok = true;
    std::string size_note;
    for (const auto& scene : scenes) {
        const auto net = compile_sdf_net(scene.obstacles, scene.ego);
        if (net.total_segments != scene.segments) {
            sizes_ok = false;
            size_note += fmt(" segments %d != %d;", net.total_segments, scene.segments);
        }
        const int N = net.total_segments;
        const int width_bound = 4 * ((N + 1) / 2) + 8;
        const int depth_bound =
            2 * static_cast<int>(std::floor(std::log2(static_cast<double>(N)))) + 4;
        if (net.distance_size.relu_width > width_bound ||
            net.distance_size.relu_depth > depth_bound) {
            sizes_ok = false;
            size_note += fmt(" size (w%d,d%d) exceeds (w%d,d%d) at N=%d;",
                             net.distance_size.relu_width, net.distance_size.relu_depth,
                             width_bound, depth_bound, N);
        }
        Zonotope ego;
        ego.generators = scene.ego;
        for (int i = 0; i < 10000; ++i) {
            const Eigen::Vector2d q(rng.uniform(-4, 4), rng.uniform(-4, 4));
            ego.center = Vec(2);
            ego.center << q.x(), q.y();
            const double direct = signed_distance_2d(ego, scene.obstacles);
            const double compiled = eval_compiled_sdf(net, q);
            worst = std::max(worst, std::abs(direct - compiled));
        }
    }

    crit.seconds = now_s() - t0;
    crit.pass = worst <= 1e-9 && sizes_ok;
    crit.detail = fmt("max |compiled - direct| %.2e over 30000 queries, sizes %s%s, %.1f s", worst,
                      sizes_ok ? "ok" : "VIOLATED", size_note.c_str(), crit.seconds);
    return crit;
}

// ------------------------------------------------------- shared surrogate
struct SurrogatePack {
    NeuralSfo sfo;
    Dataset pool;       // disjoint calibration/test chunks live here
    int n_train = 0;
    double gen_seconds = 0.0;
    double train_seconds = 0.0;
    double center_val_rmse = 0.0;
};

SurrogatePack build_surrogate(const RobotModel& robot, const TrajectoryFamily& base,
                              const TimePartition& part) {
    SurrogatePack pack;
    const int n_q = robot.n_q();
    const int n_train = 30000, n_val = 2500;
    const int n_pool = 20 * (2500 + 400);
    pack.n_train = n_train;

    const TimeEncoding enc = TimeEncoding::OneHot;
    double t0 = now_s();
    const Dataset full = gen_dataset(robot, base, part, n_train + n_val + n_pool, 777001, enc);
    pack.gen_seconds = now_s() - t0;

    Dataset train_ds, val_ds;
    auto carve = [&full](Dataset& dst, int from, int count) {
        dst.n_q = full.n_q;
        dst.n_t = full.n_t;
        dst.encoding = full.encoding;
        dst.seed = full.seed;
        dst.X = full.X.middleCols(from, count);
        dst.Y = full.Y.middleCols(from, count);
        dst.G = full.G.middleCols(from, count);
        dst.intervals.assign(full.intervals.begin() + from,
                             full.intervals.begin() + from + count);
    };
    carve(train_ds, 0, n_train);
    carve(val_ds, n_train, n_val);
    carve(pack.pool, n_train + n_val, n_pool);

    const int in_dim = dataset_input_dim(n_q, part.n_t, enc);
    pack.sfo.encoding = enc;
    pack.sfo.center_net = Mlp({in_dim, 128, 128, 3 * n_q}, Activation::Gelu, 101);
    pack.sfo.radius_net = Mlp({in_dim, 128, 128, n_q}, Activation::Relu, 102);
    pack.sfo.grad_net = Mlp({in_dim, 128, 128, 128, 3 * n_q * n_q}, Activation::Gelu, 103);

    // Standardize targets per output component (then fold the affine map back
    // into the last layer) and anneal the learning rate in stages; both are
    // needed because the gradient targets span several orders of magnitude
    // across time intervals.
    auto train_staged = [&](Mlp& net, const Mat& Y, const Mat& Yval, std::uint64_t seed) {
        Vec mean = Y.rowwise().mean();
        Vec scale(Y.rows());
        for (int r = 0; r < Y.rows(); ++r)
            scale[r] = std::max(
                std::sqrt((Y.row(r).array() - mean[r]).square().sum() / Y.cols()), 1e-8);
        const Mat Yn = scale.cwiseInverse().asDiagonal() * (Y.colwise() - mean);
        const Mat Yvn = scale.cwiseInverse().asDiagonal() * (Yval.colwise() - mean);
        TrainConfig cfg;
        cfg.batch_size = 256;
        cfg.weight_decay = 1e-4;
        cfg.patience = 8;
        const int epochs[4] = {40, 30, 30, 20};
        const double lrs[4] = {1e-3, 3e-4, 1e-4, 3e-5};
        for (int phase = 0; phase < 4; ++phase) {
            cfg.epochs = epochs[phase];
            cfg.lr = lrs[phase];
            cfg.seed = seed + static_cast<std::uint64_t>(phase);
            train(net, train_ds.X, Yn, val_ds.X, Yvn, cfg);
        }
        Mat& W = net.weights().back();
        Vec& b = net.biases().back();
        W = scale.asDiagonal() * W;
        b = scale.cwiseProduct(b) + mean;
    };

    t0 = now_s();
    const Mat train_c = center_targets(train_ds), val_c = center_targets(val_ds);
    train_staged(pack.sfo.center_net, train_c, val_c, 11);
    train_staged(pack.sfo.radius_net, radius_targets(train_ds), radius_targets(val_ds), 12);
    train_staged(pack.sfo.grad_net, train_ds.G, val_ds.G, 13);
    pack.train_seconds = now_s() - t0;

    const Mat pred = pack.sfo.center_net.forward_batch(val_ds.X);
    pack.center_val_rmse = std::sqrt((pred - val_c).squaredNorm() /
                                     static_cast<double>(val_c.size()));

    // Calibrate the bundle on the first pool chunk (used by the benchmark).
    std::vector<std::vector<double>> scores(static_cast<size_t>(n_q));
    for (int s = 0; s < 2500; ++s) {
        const Vec x = pack.pool.X.col(s);
        const auto pred_balls =
            predict_spheres(pack.sfo.center_net, pack.sfo.radius_net, robot, x);
        for (int j = 1; j <= n_q; ++j) {
            Ball truth;
            truth.center = Eigen::Vector3d(pack.pool.Y.block(3 * j, s, 3, 1));
            truth.radius = pack.pool.Y(3 * (n_q + 1) + j, s);
            scores[static_cast<size_t>(j - 1)].push_back(
                nonconformity(truth, pred_balls[static_cast<size_t>(j)]));
        }
    }
    pack.sfo.calibration = calibrate_joints(scores, 0.05, 0.05);
    return pack;
}

// ------------------------------------------------------------- criterion 4
Criterion criterion_conformal(const RobotModel& robot, const SurrogatePack& pack) {
    Criterion crit;
    crit.name = "4 conformal-coverage";
    const double t0 = now_s();
    const int n_q = robot.n_q();
    const int splits = 20, n_cal = 2500, n_test = 400;
    const double eps_hat = 0.05;

    // Per-joint coverage pooled over splits.
    std::vector<long> covered(static_cast<size_t>(n_q), 0);
    long per_joint_total = 0;
    for (int split = 0; split < splits; ++split) {
        const int base_col = split * (n_cal + n_test);
        std::vector<std::vector<double>> scores(static_cast<size_t>(n_q));
        for (int s = 0; s < n_cal; ++s) {
            const Vec x = pack.pool.X.col(base_col + s);
            const auto pred = predict_spheres(pack.sfo.center_net, pack.sfo.radius_net, robot, x);
            for (int j = 1; j <= n_q; ++j) {
                Ball truth;
                truth.center = Eigen::Vector3d(pack.pool.Y.block(3 * j, base_col + s, 3, 1));
                truth.radius = pack.pool.Y(3 * (n_q + 1) + j, base_col + s);
                scores[static_cast<size_t>(j - 1)].push_back(
                    nonconformity(truth, pred[static_cast<size_t>(j)]));
            }
        }
        Vec delta(n_q);
        for (int j = 0; j < n_q; ++j) delta(j) = calibrate(scores[static_cast<size_t>(j)], eps_hat);
        for (int s = 0; s < n_test; ++s) {
            const int col = base_col + n_cal + s;
            const Vec x = pack.pool.X.col(col);
            const auto pred = predict_spheres(pack.sfo.center_net, pack.sfo.radius_net, robot, x);
            for (int j = 1; j <= n_q; ++j) {
                Ball truth;
                truth.center = Eigen::Vector3d(pack.pool.Y.block(3 * j, col, 3, 1));
                truth.radius = pack.pool.Y(3 * (n_q + 1) + j, col);
                const double score = nonconformity(truth, pred[static_cast<size_t>(j)]);
                if (score <= delta(j - 1)) ++covered[static_cast<size_t>(j - 1)];
            }
        }
        per_joint_total += n_test;
    }

    double min_cov = 1.0;
    for (int j = 0; j < n_q; ++j)
        min_cov = std::min(min_cov,
                           static_cast<double>(covered[static_cast<size_t>(j)]) /
                               static_cast<double>(per_joint_total));
    // 99% binomial band around the guaranteed level.
    const double se = std::sqrt(eps_hat * (1 - eps_hat) / static_cast<double>(per_joint_total));
    const double threshold = (1 - eps_hat) - 2.576 * se;
    const bool coverage_ok = min_cov >= threshold;

    // Dataset-conditioned quantile agrees with Simpson quadrature of the
    // Beta density.
    const double q = beta_coverage(n_cal, eps_hat, 0.05);
    const double a = static_cast<double>(n_cal + 1 - 125), b = 125.0;  // nu = floor(2501*0.05)
    const double lg = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const int panels = 60000;
    const double h = q / panels;
    // Composite Simpson over [0, q]: interior nodes alternate 4/2, endpoints
    // carry weight 1 (the left endpoint density is zero since a > 1).
    double acc = std::exp(lg + (a - 1) * std::log(q) + (b - 1) * std::log1p(-q));
    for (int i = 1; i < panels; ++i) {
        const double t = i * h;
        acc += (i % 2 ? 4.0 : 2.0) * std::exp(lg + (a - 1) * std::log(t) + (b - 1) * std::log1p(-t));
    }
    const double cdf = acc * h / 3.0;
    const bool beta_ok = std::abs(cdf - 0.05) <= 1e-8;

    crit.seconds = now_s() - t0;
    crit.pass = coverage_ok && beta_ok;
    crit.detail = fmt("min per-sphere coverage %.4f (threshold %.4f, n=%ld), beta quantile "
                      "%.6f quadrature gap %.1e, %.1f s",
                      min_cov, threshold, per_joint_total, q, std::abs(cdf - 0.05), crit.seconds);
    return crit;
}

// ------------------------------------------------------------- criterion 5
Criterion criterion_composition() {
    Criterion crit;
    crit.name = "5 guarantee-composition";
    const double t0 = now_s();

    const double bound = compose_guarantee(0.001, 7);
    const double expect = std::pow(0.999, 8.0);
    const bool exact_ok = std::abs(bound - expect) <= 1e-12;

    // Monte Carlo joint enclosure with independent per-sphere failures at
    // exactly the nominal rate must respect the product bound.
    Rng rng(2026, 50);
    const int trials = 10000;
    int joint_ok = 0;
    for (int t = 0; t < trials; ++t) {
        bool all = true;
        for (int j = 0; j < 8; ++j)
            if (rng.uniform() < 0.001) all = false;
        joint_ok += all ? 1 : 0;
    }
    const double freq = static_cast<double>(joint_ok) / trials;
    const double se = std::sqrt(bound * (1 - bound) / trials);
    const bool mc_ok = freq >= bound - 3.5 * se;

    crit.seconds = now_s() - t0;
    crit.pass = exact_ok && mc_ok;
    crit.detail = fmt("bound %.12f (gap %.1e), joint MC %.4f >= %.4f, %.1f s", bound,
                      std::abs(bound - expect), freq, bound - 3.5 * se, crit.seconds);
    return crit;
}

// ------------------------------------------------------------- criterion 6
Criterion criterion_benchmark(const RobotModel& robot, const SurrogatePack& pack) {
    Criterion crit;
    crit.name = "6 planner-benchmark";
    const double t0 = now_s();
    const double budget_s = 1800.0;

    BenchmarkConfig cfg;
    cfg.robot = robot;
    cfg.robot_id = "desk-3dof";
    cfg.n_obstacles = 10;
    cfg.trials = 50;
    cfg.seed = 31337;
    cfg.modes = {PlanMode::ExactSfo, PlanMode::ConformalizedNeural};
    cfg.base_fam = default_family(robot);
    cfg.planner.n_s = 15;  // finer covering: less conservatism near obstacles
    cfg.planner.multistarts = 4;
    cfg.planner.al_outer_iters = 8;
    cfg.planner.inner_iters = 30;
    cfg.planner.time_budget = 1.5;
    cfg.episode.max_iters = 60;
    cfg.surrogate = &pack.sfo;

    const auto report = run_benchmark(cfg);

    int collisions = 0, exact_success = 0, neural_success = 0, neural_collisions = 0;
    double exact_solve = 0.0, neural_solve = 0.0;
    for (const auto& mode : report.modes) {
        collisions += mode.collisions;
        if (mode.mode == "exact") {
            exact_success = mode.successes;
            exact_solve = mode.mean_solve_time;
        } else {
            neural_success = mode.successes;
            neural_collisions = mode.collisions;
            neural_solve = mode.mean_solve_time;
        }
    }

    crit.seconds = now_s() - t0;
    const bool in_budget = crit.seconds < budget_s;
    const bool soft_success = exact_success > 25;
    crit.pass = collisions == 0 && in_budget;
    crit.detail = fmt("collisions %d (hard), exact %d/50 success%s, neural %d/50 (%d col), "
                      "solve %.2f/%.2f s, total %.0f s (budget %.0f s)",
                      collisions, exact_success,
                      soft_success ? "" : " [SOFT TARGET >25 MISSED]", neural_success,
                      neural_collisions, exact_solve, neural_solve, crit.seconds, budget_s);
    return crit;
}

// ------------------------------------------------------------- criterion 7
Criterion criterion_gradients(const RobotModel& robot, const SurrogatePack& pack) {
    Criterion crit;
    crit.name = "7 gradient-fidelity";
    const double t0 = now_s();

    // (a) exact-mode constraint gradients against central differences.
    PlanProblem prob;
    prob.mode = PlanMode::ExactSfo;
    prob.robot = robot;
    prob.fam = default_family(robot);
    prob.fam.q0 = Vec::Zero(robot.n_q());
    prob.fam.qd0 = Vec::Zero(robot.n_q());
    prob.part.dt = 0.0625;
    prob.part.n_t = 16;
    prob.q_goal = Vec::Zero(robot.n_q());
    prob.config.n_s = 3;
    prob.config.parallel = false;
    prob.obstacles = {make_obstacle(axis_aligned_cube({0.45, 0.3, 0.2}, 0.2)),
                      make_obstacle(axis_aligned_cube({-0.3, -0.4, 0.4}, 0.2))};

    Rng rng(2026, 70);
    const double h = 1e-6;
    double worst_rel = 0.0;
    long rows_checked = 0, rows_failed = 0;
    for (int rep = 0; rep < 10; ++rep) {
        Vec k(robot.n_q());
        for (int j = 0; j < robot.n_q(); ++j) k(j) = rng.uniform(-0.9, 0.9);
        const auto at_k = eval_constraints(prob, k);
        for (int c = 0; c < robot.n_q(); ++c) {
            Vec kp = k, km = k;
            kp(c) += h;
            km(c) -= h;
            const Vec vp = eval_constraints(prob, kp).values;
            const Vec vm = eval_constraints(prob, km).values;
            for (int r = 0; r < at_k.values.size(); ++r) {
                const double fwd = (vp(r) - at_k.values(r)) / h;
                const double bwd = (at_k.values(r) - vm(r)) / h;
                const double central = 0.5 * (fwd + bwd);
                const double scale = std::max({1.0, std::abs(fwd), std::abs(bwd)});
                if (std::abs(fwd - bwd) > 1e-3 * scale) continue;  // kink: one-sided slopes differ
                const double rel = std::abs(at_k.gradients(r, c) - central) /
                                   std::max(1.0, std::abs(central));
                worst_rel = std::max(worst_rel, rel);
                ++rows_checked;
                if (rel > 1e-4) ++rows_failed;
            }
        }
    }

    // (b) training-gradient checks on fresh networks.
    const double g1 = grad_check(Mlp({7, 32, 16, 3}, Activation::Gelu, 201), 301);
    const double g2 = grad_check(Mlp({9, 48, 48, 7}, Activation::Gelu, 202), 302);
    const double g3 = grad_check(Mlp({5, 32, 32, 2}, Activation::Relu, 203), 303);
    const double worst_net = std::max({g1, g2, g3});

    // (c) soft: gradient head accuracy on held-out samples (median relative
    // error of the predicted center jacobians).
    const int n_q = robot.n_q();
    std::vector<double> rels;
    const int offset = 2500;  // skip the chunk used for bundle calibration
    for (int s = 0; s < 2000; ++s) {
        const Vec x = pack.pool.X.col(offset + s);
        const Vec pred = pack.sfo.grad_net.forward(x);
        const Vec truth = pack.pool.G.col(offset + s);
        rels.push_back((pred - truth).norm() / std::max(truth.norm(), 1e-9));
    }
    std::nth_element(rels.begin(), rels.begin() + rels.size() / 2, rels.end());
    const double median_rel = rels[rels.size() / 2];

    crit.seconds = now_s() - t0;
    const bool fd_ok = rows_failed == 0 && rows_checked > 500;
    const bool nets_ok = worst_net <= 1e-6;
    const bool soft_ok = median_rel < 0.05;
    crit.pass = fd_ok && nets_ok;
    crit.detail = fmt("constraint FD worst rel %.2e over %ld rows (%ld failed), net grad check "
                      "%.2e, gradient-head median rel %.3f%s, %.1f s",
                      worst_rel, rows_checked, rows_failed, worst_net, median_rel,
                      soft_ok ? "" : " [SOFT TARGET <0.05 MISSED]", crit.seconds);
    return crit;
}

}  // namespace

int main() {
    std::printf("acceptance gate: 7 criteria\n");
    std::vector<Criterion> results;

    results.push_back(criterion_containment());
    std::printf("[%s] %s: %s\n", results.back().pass ? "PASS" : "FAIL",
                results.back().name.c_str(), results.back().detail.c_str());
    results.push_back(criterion_sdf());
    std::printf("[%s] %s: %s\n", results.back().pass ? "PASS" : "FAIL",
                results.back().name.c_str(), results.back().detail.c_str());
    results.push_back(criterion_compiled_net());
    std::printf("[%s] %s: %s\n", results.back().pass ? "PASS" : "FAIL",
                results.back().name.c_str(), results.back().detail.c_str());

    const RobotModel robot = desk_robot_3dof();
    const TrajectoryFamily base = default_family(robot);
    const TimePartition part;  // default
    std::printf("[info] building shared surrogate (data + training + calibration)...\n");
    const SurrogatePack pack = build_surrogate(robot, base, part);
    std::printf("[info] surrogate: %d train samples, gen %.0f s, train %.0f s, center val "
                "rmse %.4f, deltas",
                pack.n_train, pack.gen_seconds, pack.train_seconds, pack.center_val_rmse);
    for (int j = 0; j < pack.sfo.calibration.delta_per_joint.size(); ++j)
        std::printf(" %.4f", pack.sfo.calibration.delta_per_joint(j));
    std::printf(", beta coverage %.4f\n", pack.sfo.calibration.beta_cov);

    results.push_back(criterion_conformal(robot, pack));
    std::printf("[%s] %s: %s\n", results.back().pass ? "PASS" : "FAIL",
                results.back().name.c_str(), results.back().detail.c_str());
    results.push_back(criterion_composition());
    std::printf("[%s] %s: %s\n", results.back().pass ? "PASS" : "FAIL",
                results.back().name.c_str(), results.back().detail.c_str());
    results.push_back(criterion_benchmark(robot, pack));
    std::printf("[%s] %s: %s\n", results.back().pass ? "PASS" : "FAIL",
                results.back().name.c_str(), results.back().detail.c_str());
    results.push_back(criterion_gradients(robot, pack));
    std::printf("[%s] %s: %s\n", results.back().pass ? "PASS" : "FAIL",
                results.back().name.c_str(), results.back().detail.c_str());

    int failures = 0;
    for (const auto& crit : results)
        if (!crit.pass) ++failures;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    return failures == 0 ? 0 : 1;
}
