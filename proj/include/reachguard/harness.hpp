#pragma once

// Scenario generation, ground-truth collision checking, and the batch
// benchmark: runs receding-horizon episodes over randomized scenes, checks
// every executed sample against the exact capsule geometry, aggregates
// outcome and timing statistics, and emits JSON / CSV / SVG reports.

#include "reachguard/planner.hpp"

#include <string>
#include <vector>

namespace reachguard {

struct Scenario {
    std::string robot_id;
    std::vector<Obstacle> obstacles;
    Vec q_start;
    Vec q_goal;
    std::uint64_t seed = 0;
};

// Trajectory family template for a robot: unit acceleration scale on every
// joint, 0.5 s planning phase, 1 s horizon.
TrajectoryFamily default_family(const RobotModel& model);

// Exact intersection test between one link capsule (hull of two balls) and
// one obstacle: sphere sweep with a Lipschitz gap bound, refined by convex
// minimization when the sweep is inconclusive.
bool capsule_intersects(const Obstacle& obstacle, const Ball& a, const Ball& b);

// Exact: does the arm at configuration q touch any obstacle?
bool config_collides(const RobotModel& model, const Vec& q, const std::vector<Obstacle>& obstacles);

// Exact: does any capsule at any sampled configuration (columns) touch any
// obstacle?
bool ground_truth_collision(const RobotModel& model, const Mat& q_samples,
                            const std::vector<Obstacle>& obstacles);

// Random scenes: axis-aligned cubes of edge 0.20 m, centers uniform in a
// spherical shell of the reach, each cube rejection-sampled until the start
// and goal configurations stay collision-free.  Deterministic per seed.
// Throws std::runtime_error when the rejection budget is exhausted.
std::vector<Scenario> gen_scenarios(const RobotModel& model, const std::string& robot_id,
                                    int n_obstacles, int n_trials, std::uint64_t seed,
                                    int max_rejections = 20000);

struct BenchmarkConfig {
    RobotModel robot;
    std::string robot_id = "desk-3dof";
    int n_obstacles = 10;
    int trials = 50;
    std::uint64_t seed = 0;
    std::vector<PlanMode> modes{PlanMode::ExactSfo};
    TrajectoryFamily base_fam;  // q0/qd0 ignored; k_scale/t_plan/t_final used
    TimePartition part;
    PlannerConfig planner;
    EpisodeConfig episode;
    const NeuralSfo* surrogate = nullptr;  // required when modes include neural
    std::string out_dir;                   // empty: no files written
    int max_rejections = 20000;
};

struct TrialRecord {
    int scenario = 0;
    std::string mode;
    std::string outcome;  // success | collision | stuck
    int episode_iters = 0;
    double solve_time_total = 0.0;
    double eval_time_total = 0.0;
    long constraint_evals = 0;
    double final_goal_dist = 0.0;
};

struct ModeStats {
    std::string mode;
    int successes = 0;
    int collisions = 0;
    int stucks = 0;
    double mean_solve_time = 0.0;  // per planning iteration, seconds
    double std_solve_time = 0.0;
    double mean_eval_time = 0.0;   // per constraint evaluation, seconds
    double mean_episode_iters = 0.0;
};

struct BenchmarkReport {
    int trials = 0;
    int n_obstacles = 0;
    std::uint64_t seed = 0;
    std::vector<ModeStats> modes;
    std::vector<TrialRecord> records;
    bool has_calibration = false;
    CalibrationResult calibration;  // conformal coverage stats when present
};

BenchmarkReport run_benchmark(const BenchmarkConfig& config);

std::string report_to_json_text(const BenchmarkReport& report);
// Versioned column schema: trial,mode,outcome,iterations,solve_time_s,
// eval_time_s,constraint_evals,final_goal_dist.
std::string report_to_csv_text(const BenchmarkReport& report);

// Top-down scene sketch (obstacle footprints, start/goal sphere chains).
std::string scene_to_svg_text(const RobotModel& model, const Scenario& scenario);
// Per-joint nonconformity score histograms.
std::string calibration_to_svg_text(const CalibrationResult& cal);

// report.json, report.csv, and SVG sketches under `dir` (created if absent).
void write_report_files(const BenchmarkReport& report, const RobotModel& model,
                        const std::vector<Scenario>& scenarios, const std::string& dir);

}  // namespace reachguard
