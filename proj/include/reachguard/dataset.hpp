#pragma once

// Training data for the occupancy surrogate.  Each sample fixes an initial
// state, a trajectory parameter, and one partition interval, runs the exact
// sphere pipeline, and records the sliced ball chain plus the jacobians of
// the predicted centers.  Inputs and targets are stored column-per-sample.

#include "reachguard/mlp.hpp"
#include "reachguard/occupancy.hpp"
#include "reachguard/robot.hpp"
#include "reachguard/trajectory.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace reachguard {

enum class TimeEncoding {
    Scalar,  // one extra input: (i - 1/2) / n_t
    OneHot   // n_t extra inputs
};

int dataset_input_dim(int n_q, int n_t, TimeEncoding enc);

// Network input for state (q0, qd0), parameter k, and 1-based interval i.
Vec encode_input(const Vec& q0, const Vec& qd0, const Vec& k, int interval, int n_t,
                 TimeEncoding enc);

struct Dataset {
    int n_q = 0;
    int n_t = 0;
    TimeEncoding encoding = TimeEncoding::Scalar;
    std::uint64_t seed = 0;
    Mat X;  // input_dim x n
    Mat Y;  // 4(n_q+1) x n: centers of spheres 0..n_q (xyz each), then radii 0..n_q
    Mat G;  // 3*n_q*n_q x n: per sphere j=1..n_q the 3 x n_q center jacobian, row-major
    std::vector<std::int32_t> intervals;  // sampled 1-based interval per column

    int size() const { return static_cast<int>(X.cols()); }
};

// SJO entries for one 1-based partition interval of the family.  Requires a
// partition whose interval boundaries include t_plan, so that no interval
// straddles the phase switch and every interval is exactly one piece (the
// default partition satisfies this); throws std::invalid_argument otherwise.
std::vector<SjoEntry> sjo_for_interval(const RobotModel& model, const TrajectoryFamily& fam,
                                       const TimePartition& part, int interval,
                                       const FkPzOptions& opts = {});

// i.i.d. draws: q0 ~ U(joint limits), qd0 ~ U(velocity limits),
// k ~ U[-1,1]^{n_q}, interval ~ U{1..n_t}; targets from the exact pipeline
// sliced at k.  `base` supplies k_scale / t_plan / t_final (its q0 and qd0
// are ignored).  Deterministic per seed; generation is parallel with one
// counter-based stream per sample.
Dataset gen_dataset(const RobotModel& model, const TrajectoryFamily& base,
                    const TimePartition& part, int n, std::uint64_t seed,
                    TimeEncoding enc = TimeEncoding::Scalar);

// Rows of Y restricted to the predicted spheres 1..n_q.
Mat center_targets(const Dataset& ds);  // 3 n_q x n
Mat radius_targets(const Dataset& ds);  // n_q x n

// Columnar binary round-trip (little-endian, magic "RGDAT001").
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Decode one prediction into the full ball chain.  Sphere 0 is the constant
// analytic base ball and is never predicted.
std::vector<Ball> predict_spheres(const Mlp& center_net, const Mlp& radius_net,
                                  const RobotModel& model, const Vec& x);

// Decode the gradient head: 3 x n_q jacobian of each predicted center
// (spheres 1..n_q) with respect to k.
std::vector<Mat> predict_center_grad(const Mlp& grad_net, int n_q, const Vec& x);

}  // namespace reachguard
