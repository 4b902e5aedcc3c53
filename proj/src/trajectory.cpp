#include "reachguard/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace reachguard {

void validate(const TrajectoryFamily& fam) {
    const int n = fam.n_q();
    if (n == 0) throw std::invalid_argument("TrajectoryFamily: empty joint vector");
    if (fam.qd0.size() != n || fam.k_scale.size() != n)
        throw std::invalid_argument("TrajectoryFamily: q0/qd0/k_scale dimensions disagree");
    if (!(fam.t_plan > 0.0) || !(fam.t_final > fam.t_plan))
        throw std::invalid_argument("TrajectoryFamily: need 0 < t_plan < t_final");
    for (int j = 0; j < n; ++j)
        if (!(fam.k_scale[j] > 0.0))
            throw std::invalid_argument("TrajectoryFamily: k_scale must be positive");
}

void validate(const TrajectoryFamily& fam, const TimePartition& part) {
    validate(fam);
    if (part.n_t <= 0 || !(part.dt > 0.0))
        throw std::invalid_argument("TimePartition: need n_t > 0 and dt > 0");
    if (std::abs(part.n_t * part.dt - fam.t_final) > 1e-9)
        throw std::invalid_argument("TimePartition: n_t * dt must equal t_final");
}

namespace {

void check_inputs(const TrajectoryFamily& fam, double t, const Vec& k) {
    validate(fam);
    if (k.size() != fam.n_q())
        throw std::invalid_argument("trajectory: parameter dimension mismatch");
    if ((k.array().abs() > 1.0 + 1e-12).any())
        throw std::invalid_argument("trajectory: parameter outside [-1,1]");
    if (t < -1e-12 || t > fam.t_final + 1e-12)
        throw std::invalid_argument("trajectory: time outside [0, t_final]");
}

}  // namespace

Vec q_of_t(const TrajectoryFamily& fam, double t, const Vec& k) {
    check_inputs(fam, t, k);
    const Vec a = fam.k_scale.cwiseProduct(k);
    const double tp = fam.t_plan, tf = fam.t_final;
    if (t < tp) return fam.q0 + fam.qd0 * t + 0.5 * t * t * a;
    const Vec q_peak = fam.q0 + fam.qd0 * tp + 0.5 * tp * tp * a;
    const Vec v_peak = fam.qd0 + a * tp;
    const double ramp = (2.0 * tf - tp - t) * (t - tp) / (2.0 * (tf - tp));
    return q_peak + v_peak * ramp;
}

Vec qd_of_t(const TrajectoryFamily& fam, double t, const Vec& k) {
    check_inputs(fam, t, k);
    const Vec a = fam.k_scale.cwiseProduct(k);
    const double tp = fam.t_plan, tf = fam.t_final;
    if (t < tp) return fam.qd0 + a * t;
    const Vec v_peak = fam.qd0 + a * tp;
    return v_peak * ((tf - t) / (tf - tp));
}

Vec q_end(const TrajectoryFamily& fam, const Vec& k) { return q_of_t(fam, fam.t_final, k); }

Mat q_end_jacobian(const TrajectoryFamily& fam) {
    validate(fam);
    // q(tf) = q0 + qd0*tp + 0.5*a*tp^2 + (qd0 + a*tp)*(tf - tp)/2, a = s.*k
    const double tp = fam.t_plan, tf = fam.t_final;
    const double coef = 0.5 * tp * tp + tp * (tf - tp) * 0.5;
    return (coef * fam.k_scale).asDiagonal();
}

PolyZonotope time_interval_pz(const TimePartition& part, int interval) {
    if (interval < 1 || interval > part.n_t)
        throw std::invalid_argument("time_interval_pz: interval index out of range");
    const double center = (2.0 * interval - 1.0) * 0.5 * part.dt;
    return PolyZonotope::scalar_generator(center, 0.5 * part.dt, time_indet(interval));
}

std::vector<TimePiece> time_pieces(const TrajectoryFamily& fam, const TimePartition& part) {
    validate(fam, part);
    std::vector<TimePiece> pieces;
    pieces.reserve(static_cast<std::size_t>(part.n_t) + 1);
    int next_id = 1;
    for (int i = 1; i <= part.n_t; ++i) {
        const double lo = (i - 1) * part.dt;
        const double hi = i * part.dt;
        const double tp = fam.t_plan;
        if (lo < tp - 1e-12 && hi > tp + 1e-12) {
            pieces.push_back({i, lo, tp, time_indet(next_id++), false});
            pieces.push_back({i, tp, hi, time_indet(next_id++), true});
        } else {
            const bool braking = lo >= tp - 1e-12;
            pieces.push_back({i, lo, hi, time_indet(next_id++), braking});
        }
    }
    return pieces;
}

namespace {

PolyZonotope piece_time_pz(const TimePiece& piece) {
    return PolyZonotope::scalar_generator(0.5 * (piece.t_lo + piece.t_hi),
                                          0.5 * (piece.t_hi - piece.t_lo), piece.indet);
}

}  // namespace

std::vector<PolyZonotope> q_pz(const TrajectoryFamily& fam, const TimePiece& piece) {
    validate(fam);
    const PolyZonotope T = piece_time_pz(piece);
    const PolyZonotope T2 = pz_mul(T, T);
    const double tp = fam.t_plan, tf = fam.t_final;

    std::vector<PolyZonotope> out;
    out.reserve(static_cast<std::size_t>(fam.n_q()));
    for (int j = 0; j < fam.n_q(); ++j) {
        const PolyZonotope K = PolyZonotope::scalar_generator(0.0, 1.0, traj_param(j + 1));
        const double s = fam.k_scale[j];
        if (!piece.braking) {
            // q0 + qd0*t + 0.5*s*k*t^2
            PolyZonotope q = PolyZonotope::constant(fam.q0[j]);
            q = pz_add(q, pz_scale(T, fam.qd0[j]));
            q = pz_add(q, pz_scale(pz_mul(K, T2), 0.5 * s));
            out.push_back(std::move(q));
        } else {
            // q_peak(k) + v_peak(k) * (2 tf - tp - t)(t - tp) / (2 (tf - tp))
            PolyZonotope q_peak = pz_add(PolyZonotope::constant(fam.q0[j] + fam.qd0[j] * tp),
                                         pz_scale(K, 0.5 * s * tp * tp));
            PolyZonotope v_peak = pz_add(PolyZonotope::constant(fam.qd0[j]), pz_scale(K, s * tp));
            PolyZonotope left = pz_add(PolyZonotope::constant(2.0 * tf - tp), pz_scale(T, -1.0));
            PolyZonotope right = pz_add(T, PolyZonotope::constant(-tp));
            PolyZonotope ramp = pz_scale(pz_mul(left, right), 0.5 / (tf - tp));
            out.push_back(pz_add(std::move(q_peak), pz_mul(v_peak, ramp)));
        }
    }
    return out;
}

std::vector<PolyZonotope> qd_pz(const TrajectoryFamily& fam, const TimePiece& piece) {
    validate(fam);
    const PolyZonotope T = piece_time_pz(piece);
    const double tp = fam.t_plan, tf = fam.t_final;

    std::vector<PolyZonotope> out;
    out.reserve(static_cast<std::size_t>(fam.n_q()));
    for (int j = 0; j < fam.n_q(); ++j) {
        const PolyZonotope K = PolyZonotope::scalar_generator(0.0, 1.0, traj_param(j + 1));
        const double s = fam.k_scale[j];
        if (!piece.braking) {
            // qd0 + s*k*t
            out.push_back(pz_add(PolyZonotope::constant(fam.qd0[j]), pz_scale(pz_mul(K, T), s)));
        } else {
            // v_peak(k) * (tf - t)/(tf - tp)
            PolyZonotope v_peak = pz_add(PolyZonotope::constant(fam.qd0[j]), pz_scale(K, s * tp));
            PolyZonotope decay =
                pz_scale(pz_add(PolyZonotope::constant(tf), pz_scale(T, -1.0)), 1.0 / (tf - tp));
            out.push_back(pz_mul(v_peak, decay));
        }
    }
    return out;
}

}  // namespace reachguard
