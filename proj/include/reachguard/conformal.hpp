#pragma once

// Split conformal calibration of the sphere surrogate.  A nonconformity
// score measures the radius inflation that makes a predicted ball enclose
// the true ball; the per-joint calibration quantile turns fresh predictions
// into balls with a distribution-free coverage guarantee, and the Beta
// quantile gives the dataset-conditioned version of that guarantee.

#include "reachguard/occupancy.hpp"
#include "reachguard/polyzonotope.hpp"

#include <string>
#include <vector>

namespace reachguard {

// Minimal inflation of pred's radius that encloses truth (never negative).
double nonconformity(const Ball& truth, const Ball& pred);

// truth subset of outer, i.e. |c_out - c_in| + r_in <= r_out (tolerance 0).
bool ball_encloses(const Ball& outer, const Ball& inner);

// The ceil((N+1)(1-eps_hat))-th smallest score (1-indexed order statistic).
// When that index exceeds N the guarantee is unattainable at this sample
// size; returns +infinity and prints a warning.
double calibrate(std::vector<double> scores, double eps_hat);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation, absolute accuracy ~1e-14 for moderate a, b.
double regularized_incomplete_beta(double a, double b, double x);

// rho-quantile of Beta(n_cal + 1 - nu, nu) with nu = floor((n_cal+1)
// eps_hat): the coverage level that holds with probability 1 - rho over the
// draw of the calibration set.  Throws std::invalid_argument when nu = 0
// (eps_hat too small for this calibration size).
double beta_coverage(int n_cal, double eps_hat, double rho);

// Radius inflation by a calibrated margin.
Ball conformalize(const Ball& pred, double delta);

// (1 - epsilon)^(n_q + 1): lower bound on the probability that the whole
// sphere chain is enclosed, hence that verified clearance transfers to the
// true swept volume.
double compose_guarantee(double epsilon, int n_q);

// End-ball enclosure certifies enclosure of the convex hulls: if both true
// end balls lie inside the corresponding conformalized balls, every point
// of the true tapered capsule lies inside the conformalized capsule.
bool tapered_capsule_enclosure_check(const Ball& truth_a, const Ball& truth_b, const Ball& conf_a,
                                     const Ball& conf_b);

struct ScoreHistogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<int> counts;
};

ScoreHistogram score_histogram(const std::vector<double>& scores, int bins = 32);

struct CalibrationResult {
    Vec delta_per_joint;     // inflation for predicted spheres 1..n_q
    double epsilon_hat = 0.05;
    double rho = 0.05;
    int n_cal = 0;
    int nu = 0;              // floor((n_cal + 1) * epsilon_hat)
    double beta_cov = 0.0;   // dataset-conditioned coverage level
    std::vector<ScoreHistogram> histograms;  // one per predicted sphere
};

// Calibrates every predicted sphere from its score list (all lists must
// share one length n_cal >= 1).
CalibrationResult calibrate_joints(const std::vector<std::vector<double>>& scores_per_joint,
                                   double eps_hat, double rho = 0.05);

// JSON round-trip for calibration reports.
std::string calibration_to_json_text(const CalibrationResult& cal);
CalibrationResult calibration_from_json_text(const std::string& text);
void save_calibration(const CalibrationResult& cal, const std::string& path);
CalibrationResult load_calibration(const std::string& path);

}  // namespace reachguard
