#pragma once

// Parameterized trajectories with a guaranteed stop.  Over [0, t_plan) each
// joint accelerates at k_scale_j * k_j from (q0, qd0); over [t_plan, t_final]
// the peak velocity v_p = qd0 + k_scale*k*t_plan decays linearly to zero, so
// every member of the family is at rest at t_final.  The family is indexed by
// k in [-1,1]^{n_q}.

#include "reachguard/polyzonotope.hpp"

#include <vector>

namespace reachguard {

struct TrajectoryFamily {
    Vec q0;        // initial position, n_q
    Vec qd0;       // initial velocity, n_q
    Vec k_scale;   // per-joint acceleration scale (> 0), n_q
    double t_plan = 0.5;
    double t_final = 1.0;

    int n_q() const { return static_cast<int>(q0.size()); }
};

// Uniform partition of [0, t_final] into n_t intervals of width dt.
struct TimePartition {
    double dt = 0.025;
    int n_t = 40;
};

// One monotone sub-range of a partition interval.  Intervals that straddle
// t_plan split into two pieces so each piece lies in a single trajectory
// phase; each piece carries its own time indeterminate.
struct TimePiece {
    int interval = 1;    // 1-based index of the owning partition interval
    double t_lo = 0.0;
    double t_hi = 0.0;
    Indet indet;         // Time(piece id)
    bool braking = false;
};

// Throws std::invalid_argument if dimensions disagree, scales are not
// positive, or 0 < t_plan < t_final fails.
void validate(const TrajectoryFamily& fam);
void validate(const TrajectoryFamily& fam, const TimePartition& part);

// Closed-form trajectory values; t must lie in [0, t_final] and k in
// [-1,1]^{n_q}.
Vec q_of_t(const TrajectoryFamily& fam, double t, const Vec& k);
Vec qd_of_t(const TrajectoryFamily& fam, double t, const Vec& k);

// Rest position at t_final as a function of k (affine in k).
Vec q_end(const TrajectoryFamily& fam, const Vec& k);
Mat q_end_jacobian(const TrajectoryFamily& fam);

// Dim-1 enclosure of interval i (1-based) of the partition: center
// (2i-1)/2*dt, one Time(i) generator of magnitude dt/2.
PolyZonotope time_interval_pz(const TimePartition& part, int interval);

// Phase-consistent pieces covering [0, t_final].
std::vector<TimePiece> time_pieces(const TrajectoryFamily& fam, const TimePartition& part);

// Per-joint angle / velocity enclosures over one piece, polynomial in the
// piece's time indeterminate and the joint's trajectory parameter.  Exact:
// evaluating the dependent polynomial at (x_t, x_k) reproduces
// q_of_t(center + radius*x_t, k) to rounding.
std::vector<PolyZonotope> q_pz(const TrajectoryFamily& fam, const TimePiece& piece);
std::vector<PolyZonotope> qd_pz(const TrajectoryFamily& fam, const TimePiece& piece);

}  // namespace reachguard
