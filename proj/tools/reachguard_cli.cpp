// reachguard command line.
//
// Pipeline subcommands share one artifact directory (--out): `gen-data`
// writes datasets, `train` reads them and writes network checkpoints,
// `calibrate` reads both and writes calibration.json, and `plan` / `bench`
// consume everything.  `compile-relu` builds and validates a planar
// signed-distance network, and `verify` runs fast built-in self checks.
//
// The worker pool size is capped by the REACHGUARD_THREADS environment
// variable.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reachguard/conformal.hpp"
#include "reachguard/dataset.hpp"
#include "reachguard/harness.hpp"
#include "reachguard/kinematics.hpp"
#include "reachguard/mlp.hpp"
#include "reachguard/planner.hpp"
#include "reachguard/polyzonotope.hpp"
#include "reachguard/relu_net.hpp"
#include "reachguard/rng.hpp"
#include "reachguard/robot.hpp"
#include "reachguard/sdf.hpp"
#include "reachguard/trajectory.hpp"
#include "reachguard/world.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace rg = reachguard;
using json = nlohmann::json;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

rg::RobotModel resolve_robot(const std::string& spec) {
    if (spec == "desk-2dof") return rg::desk_robot_2dof();
    if (spec == "desk-3dof") return rg::desk_robot_3dof();
    return rg::load_robot(spec);
}

std::string robot_label(const std::string& spec) {
    if (spec == "desk-2dof" || spec == "desk-3dof") return spec;
    return std::filesystem::path(spec).stem().string();
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

rg::TimeEncoding parse_encoding(const std::string& s) {
    if (s == "scalar") return rg::TimeEncoding::Scalar;
    if (s == "onehot") return rg::TimeEncoding::OneHot;
    throw std::invalid_argument("unknown time encoding: " + s);
}

rg::Vec parse_csv_vector(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) vals.push_back(std::stod(item));
    }
    rg::Vec v(static_cast<int>(vals.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = vals[static_cast<std::size_t>(i)];
    return v;
}

// Scales every output row back to target units after training on
// standardized targets: the linear output layer absorbs the affine map
// exactly, so the checkpoint predicts unnormalized values.
void fold_output_affine(rg::Mlp& net, const rg::Vec& mean, const rg::Vec& scale) {
    rg::Mat& W = net.weights().back();
    rg::Vec& b = net.biases().back();
    W = scale.asDiagonal() * W;
    b = scale.cwiseProduct(b) + mean;
}

struct TrainedNet {
    rg::Mlp net;
    rg::TrainResult result;
    double seconds = 0.0;
};

TrainedNet train_one(const std::string& name, const rg::Mat& X, const rg::Mat& Y,
                     const rg::Mat& Xval, const rg::Mat& Yval, const std::vector<int>& widths,
                     rg::Activation act, const rg::TrainConfig& cfg, bool normalize,
                     std::uint64_t init_seed) {
    TrainedNet out;
    out.net = rg::Mlp(widths, act, init_seed);
    const double t0 = now_seconds();
    if (normalize) {
        rg::Vec mean = Y.rowwise().mean();
        rg::Vec scale(Y.rows());
        for (int r = 0; r < Y.rows(); ++r) {
            const double var =
                (Y.row(r).array() - mean[r]).square().sum() / std::max<double>(1, Y.cols());
            scale[r] = std::max(std::sqrt(var), 1e-8);
        }
        const rg::Mat Yn = scale.cwiseInverse().asDiagonal() * (Y.colwise() - mean);
        rg::Mat Yvn;
        if (Yval.cols() > 0) Yvn = scale.cwiseInverse().asDiagonal() * (Yval.colwise() - mean);
        out.result = rg::train(out.net, X, Yn, Xval, Yvn, cfg);
        fold_output_affine(out.net, mean, scale);
    } else {
        out.result = rg::train(out.net, X, Y, Xval, Yval, cfg);
    }
    out.seconds = now_seconds() - t0;
    std::printf("trained %s: %d epochs, final train loss %.3e%s (%.1f s)\n", name.c_str(),
                static_cast<int>(out.result.train_loss.size()),
                out.result.train_loss.empty() ? 0.0 : out.result.train_loss.back(),
                out.result.val_loss.empty()
                    ? ""
                    : (", val loss " + std::to_string(out.result.val_loss.back())).c_str(),
                out.seconds);
    return out;
}

rg::NeuralSfo load_surrogate(const std::string& dir, rg::TimeEncoding enc) {
    rg::NeuralSfo s;
    s.center_net = rg::load_checkpoint(join_path(dir, "center.net"));
    s.radius_net = rg::load_checkpoint(join_path(dir, "radius.net"));
    s.grad_net = rg::load_checkpoint(join_path(dir, "grad.net"));
    s.encoding = enc;
    s.calibration = rg::load_calibration(join_path(dir, "calibration.json"));
    return s;
}

rg::TimeEncoding encoding_from_meta(const std::string& dir) {
    const std::string path = join_path(dir, "dataset_meta.json");
    std::ifstream in(path);
    if (!in) return rg::TimeEncoding::Scalar;
    json j = json::parse(in);
    return parse_encoding(j.value("encoding", "scalar"));
}

std::vector<rg::PlanMode> parse_modes(const std::string& mode) {
    if (mode == "exact") return {rg::PlanMode::ExactSfo};
    if (mode == "neural") return {rg::PlanMode::ConformalizedNeural};
    if (mode == "both") return {rg::PlanMode::ExactSfo, rg::PlanMode::ConformalizedNeural};
    throw std::invalid_argument("unknown mode: " + mode + " (expected exact|neural|both)");
}

// ------------------------------------------------------------- subcommands

struct GenDataArgs {
    std::string robot = "desk-3dof";
    std::string out;
    std::uint64_t seed = 0;
    int n_train = 20000, n_val = 2500, n_cal = 2500, n_test = 2500;
    int n_t = 40;
    std::string encoding = "scalar";
};

int run_gen_data(const GenDataArgs& a) {
    const rg::RobotModel model = resolve_robot(a.robot);
    const rg::TrajectoryFamily fam = rg::default_family(model);
    rg::TimePartition part;
    part.n_t = a.n_t;
    part.dt = fam.t_final / a.n_t;
    const rg::TimeEncoding enc = parse_encoding(a.encoding);
    ensure_dir(a.out);

    const std::vector<std::pair<std::string, int>> splits = {
        {"train", a.n_train}, {"val", a.n_val}, {"cal", a.n_cal}, {"test", a.n_test}};
    json meta;
    meta["schema"] = "dataset-meta-v1";
    meta["robot"] = robot_label(a.robot);
    meta["n_q"] = model.n_q();
    meta["n_t"] = a.n_t;
    meta["encoding"] = a.encoding;
    meta["seed"] = a.seed;
    for (std::size_t i = 0; i < splits.size(); ++i) {
        const auto& [name, n] = splits[i];
        if (n <= 0) continue;
        const std::uint64_t split_seed = rg::Rng(a.seed, 0xDA7A0000ULL + i).next_u64();
        const double t0 = now_seconds();
        const rg::Dataset ds = rg::gen_dataset(model, fam, part, n, split_seed, enc);
        const std::string path = join_path(a.out, "dataset_" + name + ".bin");
        rg::save_dataset(ds, path);
        meta["splits"][name] = {{"n", n}, {"seed", split_seed}, {"file", "dataset_" + name + ".bin"}};
        std::printf("wrote %s: %d samples (%.1f s)\n", path.c_str(), n, now_seconds() - t0);
    }
    write_text(join_path(a.out, "dataset_meta.json"), meta.dump(2) + "\n");
    return 0;
}

struct TrainArgs {
    std::string out;
    std::string data;  // defaults to out
    std::uint64_t seed = 0;
    int width = 128;
    int center_layers = 3, radius_layers = 3, grad_layers = 4;
    int epochs = 30, batch = 256, patience = 0;
    double lr = 3e-4, weight_decay = 1e-4;
    bool normalize = false;
    int log_every = 0;
};

int run_train(const TrainArgs& a) {
    const std::string data_dir = a.data.empty() ? a.out : a.data;
    const rg::Dataset train_ds = rg::load_dataset(join_path(data_dir, "dataset_train.bin"));
    const rg::Dataset val_ds = rg::load_dataset(join_path(data_dir, "dataset_val.bin"));
    const int n_q = train_ds.n_q;
    const int in_dim = train_ds.X.rows();
    ensure_dir(a.out);

    auto widths = [&](int hidden, int out_dim) {
        std::vector<int> w{in_dim};
        for (int i = 0; i < hidden; ++i) w.push_back(a.width);
        w.push_back(out_dim);
        return w;
    };
    rg::TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.lr = a.lr;
    cfg.weight_decay = a.weight_decay;
    cfg.patience = a.patience;
    cfg.log_every_epochs = a.log_every;

    const rg::Mat Yc = rg::center_targets(train_ds), Yvc = rg::center_targets(val_ds);
    const rg::Mat Yr = rg::radius_targets(train_ds), Yvr = rg::radius_targets(val_ds);

    cfg.seed = rg::Rng(a.seed, 0xC3ULL).next_u64();
    TrainedNet center =
        train_one("center", train_ds.X, Yc, val_ds.X, Yvc, widths(a.center_layers, 3 * n_q),
                  rg::Activation::Gelu, cfg, a.normalize, rg::Rng(a.seed, 0xC4ULL).next_u64());
    cfg.seed = rg::Rng(a.seed, 0xADULL).next_u64();
    TrainedNet radius =
        train_one("radius", train_ds.X, Yr, val_ds.X, Yvr, widths(a.radius_layers, n_q),
                  rg::Activation::Relu, cfg, a.normalize, rg::Rng(a.seed, 0xAEULL).next_u64());
    cfg.seed = rg::Rng(a.seed, 0x64ULL).next_u64();
    TrainedNet grad =
        train_one("grad", train_ds.X, train_ds.G, val_ds.X, val_ds.G,
                  widths(a.grad_layers, 3 * n_q * n_q), rg::Activation::Gelu, cfg, a.normalize,
                  rg::Rng(a.seed, 0x65ULL).next_u64());

    rg::save_checkpoint(center.net, join_path(a.out, "center.net"));
    rg::save_checkpoint(radius.net, join_path(a.out, "radius.net"));
    rg::save_checkpoint(grad.net, join_path(a.out, "grad.net"));

    json report;
    report["schema"] = "training-v1";
    report["width"] = a.width;
    report["epochs"] = a.epochs;
    report["batch"] = a.batch;
    report["lr"] = a.lr;
    report["weight_decay"] = a.weight_decay;
    report["patience"] = a.patience;
    report["normalize"] = a.normalize;
    report["seed"] = a.seed;
    auto curve = [](const TrainedNet& t) {
        return json{{"train_loss", t.result.train_loss},
                    {"val_loss", t.result.val_loss},
                    {"seconds", t.seconds}};
    };
    report["center"] = curve(center);
    report["radius"] = curve(radius);
    report["grad"] = curve(grad);
    write_text(join_path(a.out, "training.json"), report.dump(2) + "\n");
    std::printf("checkpoints written to %s\n", a.out.c_str());
    return 0;
}

struct CalibrateArgs {
    std::string robot = "desk-3dof";
    std::string out;
    std::string data;  // defaults to out
    std::string nets;  // defaults to out
    double eps_hat = 0.05;
    double rho = 0.05;
};

int run_calibrate(const CalibrateArgs& a) {
    const rg::RobotModel model = resolve_robot(a.robot);
    const std::string data_dir = a.data.empty() ? a.out : a.data;
    const std::string net_dir = a.nets.empty() ? a.out : a.nets;
    const rg::Dataset cal = rg::load_dataset(join_path(data_dir, "dataset_cal.bin"));
    if (cal.n_q != model.n_q())
        throw std::runtime_error("calibration dataset n_q does not match the robot");
    const rg::Mlp center_net = rg::load_checkpoint(join_path(net_dir, "center.net"));
    const rg::Mlp radius_net = rg::load_checkpoint(join_path(net_dir, "radius.net"));

    const int n_q = cal.n_q;
    std::vector<std::vector<double>> scores(static_cast<std::size_t>(n_q));
    for (auto& s : scores) s.reserve(static_cast<std::size_t>(cal.size()));
    for (int s = 0; s < cal.size(); ++s) {
        const std::vector<rg::Ball> pred =
            rg::predict_spheres(center_net, radius_net, model, cal.X.col(s));
        for (int j = 1; j <= n_q; ++j) {
            rg::Ball truth;
            truth.center = cal.Y.col(s).segment<3>(3 * j);
            truth.radius = cal.Y(3 * (n_q + 1) + j, s);
            scores[static_cast<std::size_t>(j - 1)].push_back(
                rg::nonconformity(truth, pred[static_cast<std::size_t>(j)]));
        }
    }
    const rg::CalibrationResult result = rg::calibrate_joints(scores, a.eps_hat, a.rho);
    ensure_dir(a.out);
    rg::save_calibration(result, join_path(a.out, "calibration.json"));
    std::printf("calibrated on %d samples, eps_hat=%.4g, rho=%.4g\n", result.n_cal,
                result.epsilon_hat, result.rho);
    for (int j = 0; j < result.delta_per_joint.size(); ++j)
        std::printf("  joint %d: delta = %.6g m\n", j + 1, result.delta_per_joint[j]);
    std::printf("  dataset-conditioned coverage >= %.6f (nu = %d)\n", result.beta_cov, result.nu);
    std::printf("  chain guarantee (1-eps)^(n_q+1) = %.6f\n",
                rg::compose_guarantee(a.eps_hat, n_q));
    return 0;
}

struct PlanArgs {
    std::string robot = "desk-3dof";
    std::string mode = "exact";
    std::string out;
    std::string nets;   // defaults to out
    std::string scene;  // obstacles JSON; empty -> random scene
    std::string start_csv, goal_csv;
    int obstacles = 10;
    std::uint64_t seed = 0;
    int n_s = 5;
    double time_budget = 10.0;
    int max_iters = 150;
};

int run_plan(const PlanArgs& a) {
    const rg::RobotModel model = resolve_robot(a.robot);
    const std::vector<rg::PlanMode> modes = parse_modes(a.mode);
    if (modes.size() != 1)
        throw std::invalid_argument("plan takes a single mode (exact or neural)");

    rg::Scenario scenario;
    if (!a.scene.empty()) {
        if (a.start_csv.empty() || a.goal_csv.empty())
            throw std::invalid_argument("--scene requires --start and --goal");
        scenario.robot_id = robot_label(a.robot);
        scenario.obstacles = rg::load_obstacles(a.scene);
        scenario.q_start = parse_csv_vector(a.start_csv);
        scenario.q_goal = parse_csv_vector(a.goal_csv);
        scenario.seed = a.seed;
    } else {
        scenario =
            rg::gen_scenarios(model, robot_label(a.robot), a.obstacles, 1, a.seed).front();
        if (!a.start_csv.empty()) scenario.q_start = parse_csv_vector(a.start_csv);
        if (!a.goal_csv.empty()) scenario.q_goal = parse_csv_vector(a.goal_csv);
    }
    if (scenario.q_start.size() != model.n_q() || scenario.q_goal.size() != model.n_q())
        throw std::invalid_argument("start/goal dimension does not match the robot");

    rg::PlanProblem prob;
    prob.mode = modes.front();
    prob.robot = model;
    prob.obstacles = scenario.obstacles;
    prob.fam = rg::default_family(model);
    prob.config.n_s = a.n_s;
    prob.config.time_budget = a.time_budget;
    rg::NeuralSfo surrogate;
    if (prob.mode == rg::PlanMode::ConformalizedNeural) {
        const std::string net_dir = a.nets.empty() ? a.out : a.nets;
        surrogate = load_surrogate(net_dir, encoding_from_meta(net_dir));
        prob.surrogate = &surrogate;
    }

    rg::EpisodeConfig ecfg;
    ecfg.max_iters = a.max_iters;
    const auto collides = [&](const rg::Mat& q_cols) {
        return rg::ground_truth_collision(model, q_cols, scenario.obstacles);
    };
    const double t0 = now_seconds();
    const rg::EpisodeLog log = rg::plan_episode(prob, scenario.q_start, scenario.q_goal, ecfg,
                                                collides);
    const double wall = now_seconds() - t0;

    const char* outcome = log.outcome == rg::EpisodeOutcome::Success     ? "success"
                          : log.outcome == rg::EpisodeOutcome::Collision ? "collision"
                                                                         : "stuck";
    std::printf("outcome: %s after %d planning iterations (%.1f s wall)\n", outcome,
                static_cast<int>(log.iterations.size()), wall);
    std::printf("final goal distance: %.4f rad (inf norm)\n", log.final_goal_dist);
    if (!a.out.empty()) {
        ensure_dir(a.out);
        write_text(join_path(a.out, "episode.json"), rg::episode_to_json_text(log));
        write_text(join_path(a.out, "scene.svg"), rg::scene_to_svg_text(model, scenario));
        std::printf("wrote %s and %s\n", join_path(a.out, "episode.json").c_str(),
                    join_path(a.out, "scene.svg").c_str());
    }
    return log.outcome == rg::EpisodeOutcome::Collision ? 1 : 0;
}

struct BenchArgs {
    std::string robot = "desk-3dof";
    std::string mode = "exact";
    std::string out;
    std::string nets;  // defaults to out
    int obstacles = 10;
    int trials = 50;
    std::uint64_t seed = 0;
    int n_s = 5;
    double time_budget = 10.0;
};

int run_bench(const BenchArgs& a) {
    rg::BenchmarkConfig cfg;
    cfg.robot = resolve_robot(a.robot);
    cfg.robot_id = robot_label(a.robot);
    cfg.n_obstacles = a.obstacles;
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.modes = parse_modes(a.mode);
    cfg.base_fam = rg::default_family(cfg.robot);
    cfg.planner.n_s = a.n_s;
    cfg.planner.time_budget = a.time_budget;
    cfg.out_dir = a.out;
    rg::NeuralSfo surrogate;
    const bool needs_net =
        std::find(cfg.modes.begin(), cfg.modes.end(), rg::PlanMode::ConformalizedNeural) !=
        cfg.modes.end();
    if (needs_net) {
        const std::string net_dir = a.nets.empty() ? a.out : a.nets;
        surrogate = load_surrogate(net_dir, encoding_from_meta(net_dir));
        cfg.surrogate = &surrogate;
    }

    const double t0 = now_seconds();
    const rg::BenchmarkReport report = rg::run_benchmark(cfg);
    std::printf("benchmark: %d trials x %d mode(s), %d obstacles, %.1f s\n", report.trials,
                static_cast<int>(report.modes.size()), report.n_obstacles, now_seconds() - t0);
    for (const rg::ModeStats& m : report.modes) {
        std::printf(
            "  %-8s success %d/%d, collisions %d, stuck %d, mean solve %.3f s, mean eval %.2f us\n",
            m.mode.c_str(), m.successes, report.trials, m.collisions, m.stucks,
            m.mean_solve_time, 1e6 * m.mean_eval_time);
    }
    if (!a.out.empty()) std::printf("report files written to %s\n", a.out.c_str());
    int total_collisions = 0;
    for (const rg::ModeStats& m : report.modes) total_collisions += m.collisions;
    return total_collisions > 0 ? 1 : 0;
}

struct CompileArgs {
    int obstacles = 2;
    int ego_gens = 1;
    int queries = 10000;
    std::uint64_t seed = 0;
    std::string out;
    double tol = 1e-9;
};

int run_compile_relu(const CompileArgs& a) {
    rg::Rng rng(a.seed, 0x2D5DFULL);
    std::vector<rg::Zonotope> obstacles;
    for (int i = 0; i < a.obstacles; ++i) {
        rg::Zonotope z;
        z.center = rg::Vec(2);
        z.center << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        z.generators = rg::Mat::Zero(2, 2);
        for (int g = 0; g < 2; ++g) {
            const double ang = rng.uniform(0.0, 3.141592653589793);
            const double len = rng.uniform(0.08, 0.3);
            z.generators(0, g) = len * std::cos(ang);
            z.generators(1, g) = len * std::sin(ang);
        }
        obstacles.push_back(z);
    }
    rg::Mat ego = rg::Mat::Zero(2, std::max(0, a.ego_gens));
    for (int g = 0; g < a.ego_gens; ++g) {
        const double ang = rng.uniform(0.0, 3.141592653589793);
        const double len = rng.uniform(0.05, 0.15);
        ego(0, g) = len * std::cos(ang);
        ego(1, g) = len * std::sin(ang);
    }

    const rg::CompiledSdfNet net = rg::compile_sdf_net(obstacles, ego);
    double max_err = 0.0;
    for (int i = 0; i < a.queries; ++i) {
        Eigen::Vector2d p(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5));
        rg::Zonotope ego_z;
        ego_z.center = p;
        ego_z.generators = ego;
        const double direct = rg::signed_distance_2d(ego_z, obstacles);
        const double compiled = rg::eval_compiled_sdf(net, p);
        max_err = std::max(max_err, std::abs(direct - compiled));
    }
    const int n_seg = net.total_segments;
    const int width_bound = 4 * ((n_seg + 1) / 2) + 8;
    const int depth_bound =
        2 * static_cast<int>(std::floor(std::log2(std::max(1, n_seg)))) + 4;
    std::printf("scene: %d obstacles, %d buffered segments\n", a.obstacles, n_seg);
    std::printf("max |compiled - direct| over %d queries: %.3e (tolerance %.1e)\n", a.queries,
                max_err, a.tol);
    std::printf("relu size: width %d (bound %d), depth %d (bound %d), norm units %d\n",
                net.distance_size.relu_width, width_bound, net.distance_size.relu_depth,
                depth_bound, net.distance_size.norm_units);
    const bool ok = max_err <= a.tol && net.distance_size.relu_width <= width_bound &&
                    net.distance_size.relu_depth <= depth_bound;
    std::printf("%s\n", ok ? "PASS" : "FAIL");
    if (!a.out.empty()) {
        ensure_dir(a.out);
        rg::save_network(net.distance, join_path(a.out, "sdf_distance.json"));
        rg::save_network(net.indicator, join_path(a.out, "sdf_indicator.json"));
        json rep;
        rep["schema"] = "compile-relu-v1";
        rep["segments"] = n_seg;
        rep["max_error"] = max_err;
        rep["relu_width"] = net.distance_size.relu_width;
        rep["relu_depth"] = net.distance_size.relu_depth;
        rep["norm_units"] = net.distance_size.norm_units;
        rep["width_bound"] = width_bound;
        rep["depth_bound"] = depth_bound;
        write_text(join_path(a.out, "compile_report.json"), rep.dump(2) + "\n");
    }
    return ok ? 0 : 1;
}

// ------------------------------------------------------------------ verify

struct SelfCheck {
    std::string name;
    std::function<std::string()> run;  // empty string = pass, else detail
};

int run_verify(std::uint64_t seed) {
    std::vector<SelfCheck> checks;

    checks.push_back({"trajectory-containment", [seed]() -> std::string {
        const rg::RobotModel model = rg::desk_robot_3dof();
        rg::TrajectoryFamily fam = rg::default_family(model);
        rg::TimePartition part;
        rg::Rng rng(seed, 1);
        for (int rep = 0; rep < 3; ++rep) {
            for (int j = 0; j < model.n_q(); ++j) {
                fam.q0[j] = rng.uniform(model.joints[static_cast<std::size_t>(j)].q_lo,
                                        model.joints[static_cast<std::size_t>(j)].q_hi);
                fam.qd0[j] = rng.uniform(-1.0, 1.0);
            }
            const auto pieces = rg::time_pieces(fam, part);
            for (const rg::TimePiece& piece : pieces) {
                const auto qpz = rg::q_pz(fam, piece);
                for (int s = 0; s < 20; ++s) {
                    const double t = rng.uniform(piece.t_lo, piece.t_hi);
                    rg::Vec k(model.n_q());
                    for (int j = 0; j < k.size(); ++j) k[j] = rng.uniform(-1.0, 1.0);
                    const rg::Vec q = rg::q_of_t(fam, t, k);
                    for (int j = 0; j < model.n_q(); ++j) {
                        std::vector<std::pair<rg::Indet, double>> vals;
                        for (int l = 0; l < k.size(); ++l)
                            vals.emplace_back(rg::traj_param(l + 1), k[l]);
                        const rg::SlicedBound b =
                            rg::pz_sliced_bound(qpz[static_cast<std::size_t>(j)], vals);
                        if (q[j] < b.lo - 1e-9 || q[j] > b.hi + 1e-9)
                            return "joint position escaped its sliced enclosure";
                    }
                }
            }
        }
        return "";
    }});

    checks.push_back({"sphere-chain-containment", [seed]() -> std::string {
        const rg::RobotModel model = rg::desk_robot_3dof();
        rg::TrajectoryFamily fam = rg::default_family(model);
        rg::TimePartition part;
        rg::Rng rng(seed, 2);
        for (int j = 0; j < model.n_q(); ++j) fam.qd0[j] = rng.uniform(-0.5, 0.5);
        const auto pieces = rg::time_pieces(fam, part);
        for (int pi : {0, 10, 25, 39}) {
            const rg::TimePiece& piece = pieces[static_cast<std::size_t>(pi)];
            const auto frames = rg::fk_pz(model, rg::q_pz(fam, piece));
            const auto entries = rg::sjo(model, frames);
            for (int s = 0; s < 25; ++s) {
                const double t = rng.uniform(piece.t_lo, piece.t_hi);
                rg::Vec k(model.n_q());
                for (int j = 0; j < k.size(); ++j) k[j] = rng.uniform(-1.0, 1.0);
                const auto centers = rg::sphere_centers(model, rg::q_of_t(fam, t, k));
                for (std::size_t j = 0; j < entries.size(); ++j) {
                    const rg::Ball ball = rg::slice_entry(entries[j], k);
                    if ((centers[j] - ball.center).norm() > ball.radius + 1e-9)
                        return "joint sphere escaped its sliced occupancy ball";
                }
            }
        }
        return "";
    }});

    checks.push_back({"capsule-covering", [seed]() -> std::string {
        rg::Rng rng(seed, 3);
        for (int rep = 0; rep < 200; ++rep) {
            rg::Ball a, b;
            for (int d = 0; d < 3; ++d) {
                a.center[d] = rng.uniform(-1.0, 1.0);
                b.center[d] = rng.uniform(-1.0, 1.0);
            }
            a.radius = rng.uniform(0.02, 0.2);
            b.radius = rng.uniform(0.02, 0.2);
            const auto cover = rg::sfo_slice(a, b, 5);
            for (int s = 0; s < 10; ++s) {
                const double lam = rng.uniform(0.0, 1.0);
                Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
                if (dir.norm() < 1e-12) continue;
                dir.normalize();
                const double r = (1 - lam) * a.radius + lam * b.radius;
                const Eigen::Vector3d x =
                    (1 - lam) * a.center + lam * b.center + rng.uniform(0.0, r) * dir;
                bool covered = false;
                for (const rg::Ball& c : cover)
                    if ((x - c.center).norm() <= c.radius + 1e-9) covered = true;
                if (!covered) return "capsule point escaped the covering spheres";
            }
        }
        return "";
    }});

    checks.push_back({"signed-distance-properties", [seed]() -> std::string {
        rg::Rng rng(seed, 4);
        for (int rep = 0; rep < 300; ++rep) {
            rg::Zonotope z;
            z.center = rg::Vec(3);
            for (int d = 0; d < 3; ++d) z.center[d] = rng.uniform(-0.5, 0.5);
            const int m = 3 + static_cast<int>(rng.uniform_index(3));
            z.generators = rg::Mat(3, m);
            for (int g = 0; g < m; ++g)
                for (int d = 0; d < 3; ++d) z.generators(d, g) = rng.uniform(-0.3, 0.3);
            const rg::HalfspaceRep rep_h = rg::halfspace_rep(z);
            Eigen::Vector3d p, q;
            for (int d = 0; d < 3; ++d) {
                p[d] = rng.uniform(-1.5, 1.5);
                q[d] = rng.uniform(-1.5, 1.5);
            }
            const double sp = rg::signed_distance_point(z, rep_h, p);
            const double sq = rg::signed_distance_point(z, rep_h, q);
            if (std::abs(sp - sq) > (p - q).norm() + 1e-9) return "Lipschitz bound violated";
            const double margin = rg::halfspace_margin(rep_h, p);
            if (margin > 1e-9 && sp <= 0.0) return "outside point got non-positive distance";
            if (margin < -1e-9 && sp >= 0.0) return "inside point got non-negative distance";
            if (sp > 0.0) {
                const rg::Vec proj = rg::project_onto_zonotope(z, p);
                if (std::abs((p - Eigen::Vector3d(proj)).norm() - sp) > 1e-7)
                    return "distance disagrees with the projection";
            }
        }
        return "";
    }});

    checks.push_back({"compiled-planar-network", [seed]() -> std::string {
        CompileArgs ca;
        ca.obstacles = 2;
        ca.ego_gens = 1;
        ca.queries = 1500;
        ca.seed = seed;
        rg::Rng rng(seed, 5);
        std::vector<rg::Zonotope> obstacles;
        for (int i = 0; i < 2; ++i) {
            rg::Zonotope z;
            z.center = rg::Vec(2);
            z.center << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
            z.generators = rg::Mat(2, 2);
            for (int g = 0; g < 2; ++g) {
                const double ang = rng.uniform(0.0, 3.141592653589793);
                const double len = rng.uniform(0.1, 0.3);
                z.generators(0, g) = len * std::cos(ang);
                z.generators(1, g) = len * std::sin(ang);
            }
            obstacles.push_back(z);
        }
        const rg::Mat ego = rg::Mat::Zero(2, 0);
        const rg::CompiledSdfNet net = rg::compile_sdf_net(obstacles, ego);
        for (int i = 0; i < ca.queries; ++i) {
            Eigen::Vector2d p(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
            rg::Zonotope ego_z;
            ego_z.center = p;
            ego_z.generators = ego;
            if (std::abs(rg::signed_distance_2d(ego_z, obstacles) -
                         rg::eval_compiled_sdf(net, p)) > 1e-9)
                return "compiled network disagrees with direct evaluation";
        }
        return "";
    }});

    checks.push_back({"mlp-gradients", [seed]() -> std::string {
        const rg::Mlp gelu({6, 16, 16, 4}, rg::Activation::Gelu, seed + 11);
        const rg::Mlp relu({6, 16, 16, 4}, rg::Activation::Relu, seed + 12);
        const double eg = rg::grad_check(gelu, seed + 13);
        if (eg > 1e-6) return "gelu gradient error " + std::to_string(eg);
        const double er = rg::grad_check(relu, seed + 14);
        if (er > 1e-6) return "relu gradient error " + std::to_string(er);
        return "";
    }});

    checks.push_back({"conformal-arithmetic", [seed]() -> std::string {
        rg::Rng rng(seed, 7);
        std::vector<double> scores;
        for (int i = 0; i < 400; ++i) scores.push_back(rng.uniform(0.0, 1.0));
        std::vector<double> sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        const double eps = 0.05;
        const int idx = static_cast<int>(std::ceil((400 + 1) * (1 - eps)));
        if (rg::calibrate(scores, eps) != sorted[static_cast<std::size_t>(idx - 1)])
            return "quantile disagrees with the sorted order statistic";
        if (std::abs(rg::compose_guarantee(0.001, 7) - std::pow(0.999, 8)) > 1e-12)
            return "chain guarantee arithmetic is off";
        for (int i = 0; i < 50; ++i) {
            const double aa = rng.uniform(0.5, 20.0), bb = rng.uniform(0.5, 20.0);
            const double x = rng.uniform(0.0, 1.0);
            const double s = rg::regularized_incomplete_beta(aa, bb, x) +
                             rg::regularized_incomplete_beta(bb, aa, 1 - x);
            if (std::abs(s - 1.0) > 1e-11) return "incomplete beta symmetry violated";
        }
        const double cov = rg::beta_coverage(2500, 0.05, 0.05);
        if (!(cov > 0.9 && cov < 1.0)) return "beta coverage outside its plausible range";
        return "";
    }});

    checks.push_back({"format-roundtrips", [seed]() -> std::string {
        const rg::RobotModel model = rg::desk_robot_3dof();
        if (rg::robot_to_json_text(rg::robot_from_json_text(rg::robot_to_json_text(model))) !=
            rg::robot_to_json_text(model))
            return "robot JSON round-trip changed";
        std::vector<rg::Obstacle> obs;
        obs.push_back(rg::make_obstacle(rg::axis_aligned_cube(Eigen::Vector3d(0.4, 0.1, 0.3), 0.2)));
        const std::string t1 = rg::obstacles_to_json_text(obs);
        if (rg::obstacles_to_json_text(rg::obstacles_from_json_text(t1)) != t1)
            return "obstacle JSON round-trip changed";
        const rg::TrajectoryFamily fam = rg::default_family(model);
        rg::TimePartition part;
        const rg::Dataset ds = rg::gen_dataset(model, fam, part, 16, seed);
        const std::string tmp = (std::filesystem::temp_directory_path() / "rg_verify_ds.bin").string();
        rg::save_dataset(ds, tmp);
        const rg::Dataset ds2 = rg::load_dataset(tmp);
        std::filesystem::remove(tmp);
        if (ds2.X != ds.X || ds2.Y != ds.Y || ds2.G != ds.G)
            return "dataset binary round-trip changed";
        const rg::Mlp net({4, 8, 2}, rg::Activation::Gelu, seed + 21);
        const std::string tmp2 = (std::filesystem::temp_directory_path() / "rg_verify_net.bin").string();
        rg::save_checkpoint(net, tmp2);
        const rg::Mlp net2 = rg::load_checkpoint(tmp2);
        std::filesystem::remove(tmp2);
        rg::Vec x(4);
        x << 0.1, -0.2, 0.3, 0.7;
        if (net.forward(x) != net2.forward(x)) return "checkpoint round-trip changed";
        return "";
    }});

    int failures = 0;
    for (const SelfCheck& c : checks) {
        std::string detail;
        try {
            detail = c.run();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (detail.empty()) {
            std::printf("PASS %s\n", c.name.c_str());
        } else {
            std::printf("FAIL %s: %s\n", c.name.c_str(), detail.c_str());
            ++failures;
        }
    }
    std::printf("%d/%d self checks passed\n", static_cast<int>(checks.size()) - failures,
                static_cast<int>(checks.size()));
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistically safe receding-horizon arm planning"};
    app.require_subcommand(1);

    GenDataArgs gd;
    CLI::App* c_gd = app.add_subcommand("gen-data", "generate surrogate training datasets");
    c_gd->add_option("--robot", gd.robot, "robot JSON file or desk-2dof|desk-3dof");
    c_gd->add_option("--out", gd.out, "artifact directory")->required();
    c_gd->add_option("--seed", gd.seed, "master seed");
    c_gd->add_option("--n-train", gd.n_train, "training samples");
    c_gd->add_option("--n-val", gd.n_val, "validation samples");
    c_gd->add_option("--n-cal", gd.n_cal, "calibration samples");
    c_gd->add_option("--n-test", gd.n_test, "held-out test samples");
    c_gd->add_option("--n-t", gd.n_t, "time partition intervals");
    c_gd->add_option("--encoding", gd.encoding, "time encoding: scalar|onehot");

    TrainArgs tr;
    CLI::App* c_tr = app.add_subcommand("train", "train the center/radius/gradient networks");
    c_tr->add_option("--out", tr.out, "artifact directory")->required();
    c_tr->add_option("--data", tr.data, "dataset directory (default: --out)");
    c_tr->add_option("--seed", tr.seed, "training seed");
    c_tr->add_option("--width", tr.width, "hidden width");
    c_tr->add_option("--center-layers", tr.center_layers, "center hidden layers");
    c_tr->add_option("--radius-layers", tr.radius_layers, "radius hidden layers");
    c_tr->add_option("--grad-layers", tr.grad_layers, "gradient hidden layers");
    c_tr->add_option("--epochs", tr.epochs, "training epochs");
    c_tr->add_option("--batch", tr.batch, "batch size");
    c_tr->add_option("--lr", tr.lr, "learning rate");
    c_tr->add_option("--weight-decay", tr.weight_decay, "decoupled weight decay");
    c_tr->add_option("--patience", tr.patience, "early stop after N flat val epochs (0 = off)");
    c_tr->add_flag("--normalize", tr.normalize, "standardize outputs during training");
    c_tr->add_option("--log-every", tr.log_every, "print losses every N epochs (0 = quiet)");

    CalibrateArgs ca;
    CLI::App* c_ca = app.add_subcommand("calibrate", "conformal calibration of the surrogate");
    c_ca->add_option("--robot", ca.robot, "robot JSON file or desk-2dof|desk-3dof");
    c_ca->add_option("--out", ca.out, "artifact directory")->required();
    c_ca->add_option("--data", ca.data, "dataset directory (default: --out)");
    c_ca->add_option("--nets", ca.nets, "checkpoint directory (default: --out)");
    c_ca->add_option("--eps-hat", ca.eps_hat, "per-sphere miscoverage level");
    c_ca->add_option("--rho", ca.rho, "confidence level over the calibration draw");

    PlanArgs pl;
    CLI::App* c_pl = app.add_subcommand("plan", "run one receding-horizon episode");
    c_pl->add_option("--robot", pl.robot, "robot JSON file or desk-2dof|desk-3dof");
    c_pl->add_option("--mode", pl.mode, "exact|neural");
    c_pl->add_option("--out", pl.out, "artifact directory (episode.json, scene.svg)");
    c_pl->add_option("--nets", pl.nets, "surrogate directory (default: --out)");
    c_pl->add_option("--scene", pl.scene, "obstacles JSON (default: random scene)");
    c_pl->add_option("--start", pl.start_csv, "start configuration, comma separated");
    c_pl->add_option("--goal", pl.goal_csv, "goal configuration, comma separated");
    c_pl->add_option("--obstacles", pl.obstacles, "random cube count");
    c_pl->add_option("--seed", pl.seed, "scene seed");
    c_pl->add_option("--n-s", pl.n_s, "covering spheres per link");
    c_pl->add_option("--time-budget", pl.time_budget, "seconds per solve");
    c_pl->add_option("--max-iters", pl.max_iters, "episode iteration cap");

    BenchArgs be;
    CLI::App* c_be = app.add_subcommand("bench", "batch benchmark over random scenes");
    c_be->add_option("--robot", be.robot, "robot JSON file or desk-2dof|desk-3dof");
    c_be->add_option("--mode", be.mode, "exact|neural|both");
    c_be->add_option("--out", be.out, "report directory (json/csv/svg)");
    c_be->add_option("--nets", be.nets, "surrogate directory (default: --out)");
    c_be->add_option("--obstacles", be.obstacles, "random cubes per scene");
    c_be->add_option("--trials", be.trials, "number of scenes");
    c_be->add_option("--seed", be.seed, "benchmark seed");
    c_be->add_option("--n-s", be.n_s, "covering spheres per link");
    c_be->add_option("--time-budget", be.time_budget, "seconds per solve");

    CompileArgs cr;
    CLI::App* c_cr = app.add_subcommand("compile-relu", "compile and check a planar network");
    c_cr->add_option("--obstacles", cr.obstacles, "random planar obstacles");
    c_cr->add_option("--ego-gens", cr.ego_gens, "ego body generators (0 = point)");
    c_cr->add_option("--queries", cr.queries, "validation query count");
    c_cr->add_option("--seed", cr.seed, "scene seed");
    c_cr->add_option("--out", cr.out, "write network JSON and report here");
    c_cr->add_option("--tol", cr.tol, "max allowed |compiled - direct|");

    std::uint64_t verify_seed = 0;
    CLI::App* c_ve = app.add_subcommand("verify", "run built-in self checks");
    c_ve->add_option("--seed", verify_seed, "self-check seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_gd->parsed()) return run_gen_data(gd);
        if (c_tr->parsed()) return run_train(tr);
        if (c_ca->parsed()) return run_calibrate(ca);
        if (c_pl->parsed()) return run_plan(pl);
        if (c_be->parsed()) return run_bench(be);
        if (c_cr->parsed()) return run_compile_relu(cr);
        if (c_ve->parsed()) return run_verify(verify_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
