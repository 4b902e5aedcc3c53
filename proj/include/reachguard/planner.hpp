#pragma once

// Receding-horizon trajectory optimization over the parameterized family.
// One solve minimizes the distance of the braked endpoint to a waypoint
// subject to joint/velocity limits (from sliced enclosure bounds) and
// sphere-chain collision constraints, in one of two modes: exact swept
// spheres, or conformalized network predictions.  A candidate is Feasible
// only after a fresh strict verification pass.  The episode loop executes
// the planning phase of each feasible trajectory and falls back to the
// braking tail of the previous one otherwise.

#include "reachguard/conformal.hpp"
#include "reachguard/dataset.hpp"
#include "reachguard/occupancy.hpp"
#include "reachguard/robot.hpp"
#include "reachguard/trajectory.hpp"
#include "reachguard/world.hpp"

#include <functional>
#include <string>
#include <vector>

namespace reachguard {

enum class PlanMode { ExactSfo, ConformalizedNeural };

// Trained surrogate bundle with its calibration.
struct NeuralSfo {
    Mlp center_net;
    Mlp radius_net;
    Mlp grad_net;
    TimeEncoding encoding = TimeEncoding::Scalar;
    CalibrationResult calibration;
};

struct PlannerConfig {
    int n_s = 5;                     // covering spheres per link
    double time_budget = 10.0;       // seconds per solve
    double collision_margin = 1e-6;  // added to every collision constraint
    double verify_slack = 1e-6;      // strict feasibility threshold on fresh constraints
    int multistarts = 4;             // k = 0, endpoint heuristic, perturbations
    int al_outer_iters = 8;          // augmented-Lagrangian outer iterations
    int inner_iters = 40;            // quasi-Newton iterations per outer loop
    bool use_grad_net = true;        // neural mode: gradient head vs backprop
    bool parallel = true;            // parallelize precompute and starts
    FkPzOptions fk;
};

struct PlanProblem {
    PlanMode mode = PlanMode::ExactSfo;
    RobotModel robot;
    std::vector<Obstacle> obstacles;
    TrajectoryFamily fam;  // q0/qd0 = state the plan departs from
    TimePartition part;
    Vec q_goal;            // waypoint pulled toward by the cost
    PlannerConfig config;
    const NeuralSfo* surrogate = nullptr;  // required in ConformalizedNeural mode
};

enum class PlanStatus { Feasible, Infeasible };

struct PlanResult {
    PlanStatus status = PlanStatus::Infeasible;
    Vec k;                      // valid when Feasible
    double cost = 0.0;          // 0.5 * |q_end(k) - q_goal|^2 when Feasible
    int iterations = 0;         // inner iterations summed over starts
    long constraint_evals = 0;  // full or lazy constraint evaluations
    double eval_time = 0.0;     // seconds spent inside constraint evaluation
    double wall_time = 0.0;     // seconds for the whole solve
    bool certified = false;     // strict re-verification passed
};

// Exact constraint assembly at one parameter value.  Layout: for each piece
// p and joint j, four limit rows (q upper, q lower, qd upper, qd lower);
// then for each piece p, link j = 1..n_q, covering sphere m, obstacle n one
// collision row r + margin - sd(O_n, c(k)).  Feasible means every value
// <= 0.  `gradients` holds one row per constraint (d value / d k).
struct ConstraintEval {
    Vec values;
    Mat gradients;
    int n_limit = 0;      // leading limit rows
    int n_collision = 0;  // trailing collision rows
};

ConstraintEval eval_constraints(const PlanProblem& prob, const Vec& k);

PlanResult solve(const PlanProblem& prob);

// ---------------------------------------------------------------- episode

struct EpisodeConfig {
    double waypoint_step = 0.35;  // rad, per-joint clamp toward the goal
    double goal_tol = 0.05;       // rad, infinity norm, checked at rest
    int max_iters = 150;
    double sample_dt = 1e-3;      // executed-trajectory sampling step
};

enum class EpisodeOutcome { Success, Collision, Stuck };
enum class StuckReason { None, ConsecutiveFailures, MaxIters };

struct EpisodeIteration {
    bool feasible = false;
    Vec k;                  // empty when infeasible
    double solve_time = 0.0;
    double eval_time = 0.0;
    long constraint_evals = 0;
    int solver_iterations = 0;
};

struct EpisodeLog {
    EpisodeOutcome outcome = EpisodeOutcome::Stuck;
    StuckReason stuck_reason = StuckReason::None;
    std::vector<EpisodeIteration> iterations;
    Mat executed_q;                  // n_q x n samples, executed positions
    Mat executed_qd;                 // matching velocities
    std::vector<double> executed_t;  // absolute sample times
    double final_goal_dist = 0.0;    // infinity-norm distance at the end
};

// Returns true when any sampled configuration (columns) collides; invoked
// on every executed segment.  An empty callback disables the check.
using CollisionCallback = std::function<bool(const Mat& q_columns)>;

// Receding-horizon loop from rest at q_start toward q_goal.  `prob`
// supplies mode, robot, obstacles, family shape, partition, and config; its
// q0/qd0/q_goal fields are managed by the loop.
EpisodeLog plan_episode(PlanProblem prob, const Vec& q_start, const Vec& q_goal,
                        const EpisodeConfig& cfg, const CollisionCallback& collides = {});

std::string episode_to_json_text(const EpisodeLog& log);

}  // namespace reachguard
