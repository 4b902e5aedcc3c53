#include "reachguard/harness.hpp"

#include "reachguard/kinematics.hpp"
#include "reachguard/parallel.hpp"
#include "reachguard/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace reachguard {

TrajectoryFamily default_family(const RobotModel& model) {
    TrajectoryFamily fam;
    fam.q0 = Vec::Zero(model.n_q());
    fam.qd0 = Vec::Zero(model.n_q());
    fam.k_scale = Vec::Constant(model.n_q(), 1.0);
    fam.t_plan = 0.5;
    fam.t_final = 1.0;
    return fam;
}

namespace {

double clearance_at(const Obstacle& obstacle, const Ball& a, const Ball& b, double s) {
    const Eigen::Vector3d c = a.center + s * (b.center - a.center);
    const double r = a.radius + s * (b.radius - a.radius);
    return signed_distance_point(obstacle.body, obstacle.hs, c) - r;
}

// Exact minimum of the convex map s -> sd(O, c(s)) - r(s) over [0, 1].
double exact_capsule_clearance(const Obstacle& obstacle, const Ball& a, const Ball& b) {
    constexpr double kInvPhi = 0.6180339887498948482;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = clearance_at(obstacle, a, b, x1);
    double f2 = clearance_at(obstacle, a, b, x2);
    for (int it = 0; it < 90; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = clearance_at(obstacle, a, b, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = clearance_at(obstacle, a, b, x2);
        }
    }
    return std::min({clearance_at(obstacle, a, b, 0.0), f1, f2, clearance_at(obstacle, a, b, 1.0)});
}

}  // namespace

bool capsule_intersects(const Obstacle& obstacle, const Ball& a, const Ball& b) {
    // Disjoint bounding boxes cannot intersect.
    const auto box = zonotope_aabb(obstacle.body);
    const Eigen::Vector3d cap_lo =
        (a.center.array() - a.radius).min(b.center.array() - b.radius).matrix();
    const Eigen::Vector3d cap_hi =
        (a.center.array() + a.radius).max(b.center.array() + b.radius).matrix();
    const Eigen::Vector3d gap = (box.first - cap_hi).cwiseMax(cap_lo - box.second);
    if (gap.maxCoeff() > 0.0) return false;

    // Sphere sweep: sample spacing at most a quarter of the smaller end
    // radius; any nonpositive sample proves intersection, and a sweep
    // minimum above the Lipschitz slack proves clearance.
    const double len = (b.center - a.center).norm();
    const double min_r = std::min(a.radius, b.radius);
    const int segments = std::max(1, static_cast<int>(std::ceil(len / std::max(min_r / 4.0, 1e-9))));
    const double ds = 1.0 / segments;
    double sweep_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= segments; ++i) {
        const double h = clearance_at(obstacle, a, b, i * ds);
        if (h <= 0.0) return true;
        sweep_min = std::min(sweep_min, h);
    }
    const double lipschitz = len + std::abs(b.radius - a.radius);
    if (sweep_min > lipschitz * ds / 2.0) return false;

    // Borderline: the clearance map is convex in s, so the golden-section
    // minimum is exact.
    return exact_capsule_clearance(obstacle, a, b) <= 0.0;
}

bool config_collides(const RobotModel& model, const Vec& q, const std::vector<Obstacle>& obstacles) {
    const auto centers = sphere_centers(model, q);
    const int n_q = model.n_q();
    for (int j = 1; j <= n_q; ++j) {
        const Ball a{centers[static_cast<std::size_t>(j) - 1],
                     j == 1 ? model.base_radius : model.joints[static_cast<std::size_t>(j) - 2].radius};
        const Ball b{centers[static_cast<std::size_t>(j)],
                     model.joints[static_cast<std::size_t>(j) - 1].radius};
        for (const auto& obstacle : obstacles)
            if (capsule_intersects(obstacle, a, b)) return true;
    }
    return false;
}

bool ground_truth_collision(const RobotModel& model, const Mat& q_samples,
                            const std::vector<Obstacle>& obstacles) {
    for (int c = 0; c < q_samples.cols(); ++c)
        if (config_collides(model, q_samples.col(c), obstacles)) return true;
    return false;
}

std::vector<Scenario> gen_scenarios(const RobotModel& model, const std::string& robot_id,
                                    int n_obstacles, int n_trials, std::uint64_t seed,
                                    int max_rejections) {
    if (n_obstacles < 0 || n_trials < 0) throw std::invalid_argument("gen_scenarios: negative counts");
    validate(model);
    const double reach = model.reach();
    std::vector<Scenario> scenarios(static_cast<std::size_t>(n_trials));
    for (int trial = 0; trial < n_trials; ++trial) {
        Rng rng(seed, 0x5CE00000ULL + static_cast<std::uint64_t>(trial));
        Scenario& scenario = scenarios[static_cast<std::size_t>(trial)];
        scenario.robot_id = robot_id;
        scenario.seed = seed;
        scenario.q_start.resize(model.n_q());
        scenario.q_goal.resize(model.n_q());
        for (int j = 0; j < model.n_q(); ++j) {
            const auto& spec = model.joints[static_cast<std::size_t>(j)];
            scenario.q_start[j] = rng.uniform(spec.q_lo, spec.q_hi);
            scenario.q_goal[j] = rng.uniform(spec.q_lo, spec.q_hi);
        }
        int rejections = 0;
        while (static_cast<int>(scenario.obstacles.size()) < n_obstacles) {
            Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
            if (dir.norm() < 1e-9) continue;
            dir.normalize();
            const double radius = rng.uniform(0.40 * reach, 0.95 * reach);
            const Obstacle candidate = make_obstacle(axis_aligned_cube(radius * dir, 0.20));
            const std::vector<Obstacle> single{candidate};
            if (config_collides(model, scenario.q_start, single) ||
                config_collides(model, scenario.q_goal, single)) {
                if (++rejections > max_rejections)
                    throw std::runtime_error("gen_scenarios: rejection budget exhausted");
                continue;
            }
            scenario.obstacles.push_back(candidate);
        }
    }
    return scenarios;
}

namespace {

std::string mode_name(PlanMode mode) {
    return mode == PlanMode::ExactSfo ? "exact" : "neural";
}

std::string outcome_name(EpisodeOutcome outcome) {
    switch (outcome) {
        case EpisodeOutcome::Success: return "success";
        case EpisodeOutcome::Collision: return "collision";
        case EpisodeOutcome::Stuck: return "stuck";
    }
    return "stuck";
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    if (config.trials < 0) throw std::invalid_argument("run_benchmark: trials >= 0");
    for (PlanMode mode : config.modes)
        if (mode == PlanMode::ConformalizedNeural && config.surrogate == nullptr)
            throw std::invalid_argument("run_benchmark: neural mode needs a surrogate");

    const auto scenarios = gen_scenarios(config.robot, config.robot_id, config.n_obstacles,
                                         config.trials, config.seed, config.max_rejections);

    BenchmarkReport report;
    report.trials = config.trials;
    report.n_obstacles = config.n_obstacles;
    report.seed = config.seed;
    if (config.surrogate != nullptr) {
        report.has_calibration = true;
        report.calibration = config.surrogate->calibration;
    }

    struct Cell {
        TrialRecord record;
        std::vector<double> solve_times;
    };
    const auto n_modes = static_cast<int>(config.modes.size());
    std::vector<Cell> cells(static_cast<std::size_t>(config.trials) * n_modes);

    parallel_for(static_cast<std::int64_t>(cells.size()), [&](std::int64_t idx) {
        const int trial = static_cast<int>(idx) / n_modes;
        const PlanMode mode = config.modes[static_cast<std::size_t>(idx % n_modes)];
        const Scenario& scenario = scenarios[static_cast<std::size_t>(trial)];

        PlanProblem prob;
        prob.mode = mode;
        prob.robot = config.robot;
        prob.obstacles = scenario.obstacles;
        prob.fam = config.base_fam.k_scale.size() == config.robot.n_q() ? config.base_fam
                                                                        : default_family(config.robot);
        prob.fam.q0 = Vec::Zero(config.robot.n_q());
        prob.fam.qd0 = Vec::Zero(config.robot.n_q());
        prob.part = config.part;
        prob.config = config.planner;
        prob.config.parallel = false;  // trials already saturate the pool
        prob.surrogate = config.surrogate;

        const auto collides = [&](const Mat& q_columns) {
            return ground_truth_collision(config.robot, q_columns, scenario.obstacles);
        };
        const EpisodeLog log =
            plan_episode(prob, scenario.q_start, scenario.q_goal, config.episode, collides);

        Cell& cell = cells[static_cast<std::size_t>(idx)];
        cell.record.scenario = trial;
        cell.record.mode = mode_name(mode);
        cell.record.outcome = outcome_name(log.outcome);
        cell.record.episode_iters = static_cast<int>(log.iterations.size());
        cell.record.final_goal_dist = log.final_goal_dist;
        for (const auto& it : log.iterations) {
            cell.record.solve_time_total += it.solve_time;
            cell.record.eval_time_total += it.eval_time;
            cell.record.constraint_evals += it.constraint_evals;
            cell.solve_times.push_back(it.solve_time);
        }
    });

    for (const auto& cell : cells) report.records.push_back(cell.record);

    for (int m = 0; m < n_modes; ++m) {
        ModeStats stats;
        stats.mode = mode_name(config.modes[static_cast<std::size_t>(m)]);
        std::vector<double> solve_times;
        double eval_time = 0.0;
        long evals = 0;
        long episode_iters = 0;
        for (int trial = 0; trial < config.trials; ++trial) {
            const Cell& cell = cells[static_cast<std::size_t>(trial) * n_modes + m];
            if (cell.record.outcome == "success") ++stats.successes;
            if (cell.record.outcome == "collision") ++stats.collisions;
            if (cell.record.outcome == "stuck") ++stats.stucks;
            solve_times.insert(solve_times.end(), cell.solve_times.begin(), cell.solve_times.end());
            eval_time += cell.record.eval_time_total;
            evals += cell.record.constraint_evals;
            episode_iters += cell.record.episode_iters;
        }
        if (!solve_times.empty()) {
            double mean = 0.0;
            for (double t : solve_times) mean += t;
            mean /= static_cast<double>(solve_times.size());
            double var = 0.0;
            for (double t : solve_times) var += (t - mean) * (t - mean);
            stats.mean_solve_time = mean;
            stats.std_solve_time = std::sqrt(var / static_cast<double>(solve_times.size()));
        }
        if (evals > 0) stats.mean_eval_time = eval_time / static_cast<double>(evals);
        if (config.trials > 0)
            stats.mean_episode_iters = static_cast<double>(episode_iters) / config.trials;
        report.modes.push_back(std::move(stats));
    }

    if (!config.out_dir.empty()) write_report_files(report, config.robot, scenarios, config.out_dir);
    return report;
}

// ------------------------------------------------------------------ reports

std::string report_to_json_text(const BenchmarkReport& report) {
    nlohmann::json j;
    j["format"] = "bench-report-v1";
    j["trials"] = report.trials;
    j["n_obstacles"] = report.n_obstacles;
    j["seed"] = report.seed;
    j["modes"] = nlohmann::json::array();
    for (const auto& stats : report.modes) {
        nlohmann::json item;
        item["mode"] = stats.mode;
        item["successes"] = stats.successes;
        item["collisions"] = stats.collisions;
        item["stucks"] = stats.stucks;
        item["mean_solve_time_s"] = stats.mean_solve_time;
        item["std_solve_time_s"] = stats.std_solve_time;
        item["mean_constraint_eval_time_s"] = stats.mean_eval_time;
        item["mean_episode_iters"] = stats.mean_episode_iters;
        j["modes"].push_back(std::move(item));
    }
    j["records"] = nlohmann::json::array();
    for (const auto& record : report.records) {
        nlohmann::json item;
        item["scenario"] = record.scenario;
        item["mode"] = record.mode;
        item["outcome"] = record.outcome;
        item["episode_iters"] = record.episode_iters;
        item["solve_time_total_s"] = record.solve_time_total;
        item["eval_time_total_s"] = record.eval_time_total;
        item["constraint_evals"] = record.constraint_evals;
        item["final_goal_dist"] = record.final_goal_dist;
        j["records"].push_back(std::move(item));
    }
    if (report.has_calibration)
        j["calibration"] = nlohmann::json::parse(calibration_to_json_text(report.calibration));
    return j.dump(2);
}

std::string report_to_csv_text(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "# schema: reachguard-bench-v1\n";
    out << "trial,mode,outcome,iterations,solve_time_s,eval_time_s,constraint_evals,final_goal_dist\n";
    for (const auto& record : report.records) {
        out << record.scenario << ',' << record.mode << ',' << record.outcome << ','
            << record.episode_iters << ',' << record.solve_time_total << ','
            << record.eval_time_total << ',' << record.constraint_evals << ','
            << record.final_goal_dist << '\n';
    }
    return out.str();
}

namespace {

struct SvgCanvas {
    std::ostringstream body;
    double scale = 300.0;   // pixels per meter
    double half = 1.2;      // world half-extent, meters

    double px(double x) const { return (x + half) * scale; }
    double py(double y) const { return (half - y) * scale; }
    double size() const { return 2.0 * half * scale; }

    std::string finish(const std::string& title) {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size() << "\" height=\""
            << size() << "\" viewBox=\"0 0 " << size() << ' ' << size() << "\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << "<text x=\"10\" y=\"20\" font-family=\"monospace\" font-size=\"14\">" << title
            << "</text>\n";
        out << body.str();
        out << "</svg>\n";
        return out.str();
    }
};

void draw_chain(SvgCanvas& canvas, const RobotModel& model, const Vec& q, const std::string& color) {
    const auto centers = sphere_centers(model, q);
    for (std::size_t j = 0; j + 1 < centers.size(); ++j) {
        canvas.body << "<line x1=\"" << canvas.px(centers[j].x()) << "\" y1=\""
                    << canvas.py(centers[j].y()) << "\" x2=\"" << canvas.px(centers[j + 1].x())
                    << "\" y2=\"" << canvas.py(centers[j + 1].y()) << "\" stroke=\"" << color
                    << "\" stroke-width=\"3\"/>\n";
    }
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double r =
            j == 0 ? model.base_radius : model.joints[j - 1].radius;
        canvas.body << "<circle cx=\"" << canvas.px(centers[j].x()) << "\" cy=\""
                    << canvas.py(centers[j].y()) << "\" r=\"" << r * canvas.scale << "\" fill=\""
                    << color << "\" fill-opacity=\"0.4\"/>\n";
    }
}

}  // namespace

std::string scene_to_svg_text(const RobotModel& model, const Scenario& scenario) {
    SvgCanvas canvas;
    canvas.half = std::max(1.2, model.reach() * 1.3);
    canvas.scale = 600.0 / (2.0 * canvas.half);
    for (const auto& obstacle : scenario.obstacles) {
        // Top-down footprint: project generators onto the xy plane.
        Zonotope flat;
        flat.center = obstacle.body.center.head(2);
        flat.generators = obstacle.body.generators.topRows(2);
        std::vector<Eigen::Vector2d> verts;
        try {
            verts = vertices_2d(flat);
        } catch (const std::exception&) {
            continue;  // degenerate footprint
        }
        canvas.body << "<polygon points=\"";
        for (const auto& v : verts) canvas.body << canvas.px(v.x()) << ',' << canvas.py(v.y()) << ' ';
        canvas.body << "\" fill=\"#888888\" fill-opacity=\"0.6\" stroke=\"#444444\"/>\n";
    }
    draw_chain(canvas, model, scenario.q_start, "#1f77b4");
    draw_chain(canvas, model, scenario.q_goal, "#2ca02c");
    return canvas.finish("scene (top view): start=blue goal=green");
}

std::string calibration_to_svg_text(const CalibrationResult& cal) {
    const int width = 640;
    const int row_height = 120;
    const int rows = static_cast<int>(cal.histograms.size());
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << rows * row_height + 30 << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"10\" y=\"20\" font-family=\"monospace\" font-size=\"14\">nonconformity "
           "scores per predicted sphere</text>\n";
    for (int r = 0; r < rows; ++r) {
        const auto& hist = cal.histograms[static_cast<std::size_t>(r)];
        const int base_y = 30 + (r + 1) * row_height - 20;
        int max_count = 1;
        for (int c : hist.counts) max_count = std::max(max_count, c);
        const double bar_w = static_cast<double>(width - 120) / std::max<std::size_t>(1, hist.counts.size());
        for (std::size_t b = 0; b < hist.counts.size(); ++b) {
            const double h = (row_height - 40.0) * hist.counts[b] / max_count;
            out << "<rect x=\"" << 80 + b * bar_w << "\" y=\"" << base_y - h << "\" width=\""
                << bar_w * 0.9 << "\" height=\"" << h << "\" fill=\"#1f77b4\"/>\n";
        }
        out << "<text x=\"10\" y=\"" << base_y - row_height / 2 + 20
            << "\" font-family=\"monospace\" font-size=\"12\">sphere " << r + 1 << "</text>\n";
        out << "<text x=\"80\" y=\"" << base_y + 14 << "\" font-family=\"monospace\" font-size=\"10\">"
            << hist.lo << "</text>\n";
        out << "<text x=\"" << width - 80 << "\" y=\"" << base_y + 14
            << "\" font-family=\"monospace\" font-size=\"10\">" << hist.hi << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_report_files(const BenchmarkReport& report, const RobotModel& model,
                        const std::vector<Scenario>& scenarios, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/report.json");
        if (!out) throw std::runtime_error("write_report_files: cannot open report.json");
        out << report_to_json_text(report) << "\n";
    }
    {
        std::ofstream out(dir + "/report.csv");
        if (!out) throw std::runtime_error("write_report_files: cannot open report.csv");
        out << report_to_csv_text(report);
    }
    const std::size_t n_scenes = std::min<std::size_t>(scenarios.size(), 3);
    for (std::size_t i = 0; i < n_scenes; ++i) {
        std::ofstream out(dir + "/scene_" + std::to_string(i) + ".svg");
        out << scene_to_svg_text(model, scenarios[i]);
    }
    if (report.has_calibration) {
        std::ofstream out(dir + "/calibration_scores.svg");
        out << calibration_to_svg_text(report.calibration);
    }
}

}  // namespace reachguard
