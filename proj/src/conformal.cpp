#include "reachguard/conformal.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace reachguard {

double nonconformity(const Ball& truth, const Ball& pred) {
    return std::max((truth.center - pred.center).norm() + truth.radius - pred.radius, 0.0);
}

bool ball_encloses(const Ball& outer, const Ball& inner) {
    return (outer.center - inner.center).norm() + inner.radius <= outer.radius;
}

double calibrate(std::vector<double> scores, double eps_hat) {
    if (scores.empty()) throw std::invalid_argument("calibrate: empty score list");
    if (!(eps_hat > 0.0 && eps_hat < 1.0)) throw std::invalid_argument("calibrate: eps_hat in (0,1)");
    const auto n = static_cast<long>(scores.size());
    const long index = static_cast<long>(std::ceil((static_cast<double>(n) + 1.0) * (1.0 - eps_hat)));
    if (index > n) {
        std::fprintf(stderr,
                     "calibrate: warning: %ld scores cannot support eps_hat=%g "
                     "(need index %ld); returning +inf\n",
                     n, eps_hat, index);
        return std::numeric_limits<double>::infinity();
    }
    std::nth_element(scores.begin(), scores.begin() + (index - 1), scores.end());
    return scores[static_cast<std::size_t>(index - 1)];
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
namespace {
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 400;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("regularized_incomplete_beta: continued fraction did not converge");
}
}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("regularized_incomplete_beta: a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double beta_coverage(int n_cal, double eps_hat, double rho) {
    if (n_cal < 1) throw std::invalid_argument("beta_coverage: n_cal >= 1");
    if (!(eps_hat > 0.0 && eps_hat < 1.0)) throw std::invalid_argument("beta_coverage: eps_hat in (0,1)");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("beta_coverage: rho in (0,1)");
    const int nu = static_cast<int>(std::floor((n_cal + 1.0) * eps_hat));
    if (nu < 1)
        throw std::invalid_argument(
            "beta_coverage: eps_hat too small for this calibration size (floor((n+1) eps_hat) = 0)");
    const double a = static_cast<double>(n_cal) + 1.0 - nu;
    const double b = static_cast<double>(nu);
    // Bisection on the CDF; I_x(a,b) increases from 0 to 1 on [0,1].
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (regularized_incomplete_beta(a, b, mid) < rho)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

Ball conformalize(const Ball& pred, double delta) {
    if (delta < 0.0) throw std::invalid_argument("conformalize: delta >= 0");
    return Ball{pred.center, pred.radius + delta};
}

double compose_guarantee(double epsilon, int n_q) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("compose_guarantee: epsilon in [0,1)");
    if (n_q < 0) throw std::invalid_argument("compose_guarantee: n_q >= 0");
    return std::pow(1.0 - epsilon, n_q + 1);
}

bool tapered_capsule_enclosure_check(const Ball& truth_a, const Ball& truth_b, const Ball& conf_a,
                                     const Ball& conf_b) {
    return ball_encloses(conf_a, truth_a) && ball_encloses(conf_b, truth_b);
}

ScoreHistogram score_histogram(const std::vector<double>& scores, int bins) {
    if (bins < 1) throw std::invalid_argument("score_histogram: bins >= 1");
    ScoreHistogram hist;
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    if (scores.empty()) return hist;
    hist.lo = *std::min_element(scores.begin(), scores.end());
    hist.hi = *std::max_element(scores.begin(), scores.end());
    const double span = hist.hi - hist.lo;
    for (double s : scores) {
        int bin = span > 0.0 ? static_cast<int>((s - hist.lo) / span * bins) : 0;
        bin = std::clamp(bin, 0, bins - 1);
        ++hist.counts[static_cast<std::size_t>(bin)];
    }
    return hist;
}

CalibrationResult calibrate_joints(const std::vector<std::vector<double>>& scores_per_joint,
                                   double eps_hat, double rho) {
    if (scores_per_joint.empty()) throw std::invalid_argument("calibrate_joints: no joints");
    const std::size_t n_cal = scores_per_joint.front().size();
    if (n_cal == 0) throw std::invalid_argument("calibrate_joints: empty score lists");
    for (const auto& scores : scores_per_joint)
        if (scores.size() != n_cal)
            throw std::invalid_argument("calibrate_joints: score lists must share one length");

    CalibrationResult cal;
    cal.epsilon_hat = eps_hat;
    cal.rho = rho;
    cal.n_cal = static_cast<int>(n_cal);
    cal.nu = static_cast<int>(std::floor((static_cast<double>(n_cal) + 1.0) * eps_hat));
    cal.beta_cov = beta_coverage(cal.n_cal, eps_hat, rho);
    cal.delta_per_joint.resize(static_cast<int>(scores_per_joint.size()));
    for (std::size_t j = 0; j < scores_per_joint.size(); ++j) {
        cal.delta_per_joint[static_cast<int>(j)] = calibrate(scores_per_joint[j], eps_hat);
        cal.histograms.push_back(score_histogram(scores_per_joint[j]));
    }
    return cal;
}

// ------------------------------------------------------------------ JSON

std::string calibration_to_json_text(const CalibrationResult& cal) {
    nlohmann::json j;
    j["format"] = "calibration-v1";
    j["epsilon_hat"] = cal.epsilon_hat;
    j["rho"] = cal.rho;
    j["n_cal"] = cal.n_cal;
    j["nu"] = cal.nu;
    j["beta_coverage"] = cal.beta_cov;
    j["delta_per_joint"] = nlohmann::json::array();
    for (int i = 0; i < cal.delta_per_joint.size(); ++i) {
        const double d = cal.delta_per_joint[i];
        if (std::isfinite(d))
            j["delta_per_joint"].push_back(d);
        else
            j["delta_per_joint"].push_back("inf");  // unattainable guarantee marker
    }
    j["histograms"] = nlohmann::json::array();
    for (const auto& hist : cal.histograms)
        j["histograms"].push_back({{"lo", hist.lo}, {"hi", hist.hi}, {"counts", hist.counts}});
    return j.dump(2);
}

CalibrationResult calibration_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != std::string("calibration-v1"))
        throw std::runtime_error("calibration_from_json_text: unknown format tag");
    CalibrationResult cal;
    cal.epsilon_hat = j.at("epsilon_hat").get<double>();
    cal.rho = j.at("rho").get<double>();
    cal.n_cal = j.at("n_cal").get<int>();
    cal.nu = j.at("nu").get<int>();
    cal.beta_cov = j.at("beta_coverage").get<double>();
    const auto& deltas = j.at("delta_per_joint");
    cal.delta_per_joint.resize(static_cast<int>(deltas.size()));
    for (std::size_t i = 0; i < deltas.size(); ++i)
        cal.delta_per_joint[static_cast<int>(i)] =
            deltas[i].is_string() ? std::numeric_limits<double>::infinity() : deltas[i].get<double>();
    for (const auto& h : j.value("histograms", nlohmann::json::array())) {
        ScoreHistogram hist;
        hist.lo = h.at("lo").get<double>();
        hist.hi = h.at("hi").get<double>();
        hist.counts = h.at("counts").get<std::vector<int>>();
        cal.histograms.push_back(std::move(hist));
    }
    return cal;
}

void save_calibration(const CalibrationResult& cal, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_calibration: cannot open " + path);
    out << calibration_to_json_text(cal) << "\n";
}

CalibrationResult load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_calibration: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return calibration_from_json_text(text.str());
}

}  // namespace reachguard
