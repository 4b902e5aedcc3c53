#include "reachguard/dataset.hpp"

#include "reachguard/parallel.hpp"
#include "reachguard/rng.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace reachguard {

int dataset_input_dim(int n_q, int n_t, TimeEncoding enc) {
    return 3 * n_q + (enc == TimeEncoding::Scalar ? 1 : n_t);
}

Vec encode_input(const Vec& q0, const Vec& qd0, const Vec& k, int interval, int n_t,
                 TimeEncoding enc) {
    const int n_q = static_cast<int>(q0.size());
    if (qd0.size() != n_q || k.size() != n_q)
        throw std::invalid_argument("encode_input: dimension mismatch");
    if (interval < 1 || interval > n_t) throw std::invalid_argument("encode_input: interval out of range");
    Vec x(dataset_input_dim(n_q, n_t, enc));
    x.segment(0, n_q) = q0;
    x.segment(n_q, n_q) = qd0;
    x.segment(2 * n_q, n_q) = k;
    if (enc == TimeEncoding::Scalar) {
        x[3 * n_q] = (interval - 0.5) / n_t;
    } else {
        x.segment(3 * n_q, n_t).setZero();
        x[3 * n_q + interval - 1] = 1.0;
    }
    return x;
}

std::vector<SjoEntry> sjo_for_interval(const RobotModel& model, const TrajectoryFamily& fam,
                                       const TimePartition& part, int interval,
                                       const FkPzOptions& opts) {
    const auto pieces = time_pieces(fam, part);
    const TimePiece* found = nullptr;
    for (const auto& piece : pieces) {
        if (piece.interval != interval) continue;
        if (found != nullptr)
            throw std::invalid_argument(
                "sjo_for_interval: interval straddles the phase switch; align the partition "
                "with t_plan");
        found = &piece;
    }
    if (found == nullptr) throw std::invalid_argument("sjo_for_interval: interval out of range");
    const auto angles = q_pz(fam, *found);
    return sjo(model, fk_pz(model, angles, opts));
}

Dataset gen_dataset(const RobotModel& model, const TrajectoryFamily& base,
                    const TimePartition& part, int n, std::uint64_t seed, TimeEncoding enc) {
    if (n < 1) throw std::invalid_argument("gen_dataset: need n >= 1");
    validate(model);
    const int n_q = model.n_q();
    TrajectoryFamily probe = base;
    probe.q0 = Vec::Zero(n_q);
    probe.qd0 = Vec::Zero(n_q);
    validate(probe, part);

    Dataset ds;
    ds.n_q = n_q;
    ds.n_t = part.n_t;
    ds.encoding = enc;
    ds.seed = seed;
    ds.X.resize(dataset_input_dim(n_q, part.n_t, enc), n);
    ds.Y.resize(4 * (n_q + 1), n);
    ds.G.resize(3 * n_q * n_q, n);
    ds.intervals.assign(static_cast<std::size_t>(n), 0);

    parallel_for(n, [&](std::int64_t s) {
        Rng rng(seed, static_cast<std::uint64_t>(s));
        TrajectoryFamily fam = base;
        fam.q0.resize(n_q);
        fam.qd0.resize(n_q);
        Vec k(n_q);
        for (int j = 0; j < n_q; ++j) {
            fam.q0[j] = rng.uniform(model.joints[static_cast<std::size_t>(j)].q_lo,
                                    model.joints[static_cast<std::size_t>(j)].q_hi);
            fam.qd0[j] = rng.uniform(model.joints[static_cast<std::size_t>(j)].qd_lo,
                                     model.joints[static_cast<std::size_t>(j)].qd_hi);
            k[j] = rng.uniform(-1.0, 1.0);
        }
        const int interval = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(part.n_t)));
        const auto entries = sjo_for_interval(model, fam, part, interval);

        ds.X.col(s) = encode_input(fam.q0, fam.qd0, k, interval, part.n_t, enc);
        for (int j = 0; j <= n_q; ++j) {
            const Ball ball = slice_entry(entries[static_cast<std::size_t>(j)], k);
            ds.Y.col(s).segment(3 * j, 3) = ball.center;
            ds.Y(3 * (n_q + 1) + j, s) = ball.radius;
        }
        for (int j = 1; j <= n_q; ++j) {
            const auto [center, jac] = slice_entry_grad(entries[static_cast<std::size_t>(j)], k);
            (void)center;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < n_q; ++c)
                    ds.G((j - 1) * 3 * n_q + r * n_q + c, s) = jac(r, c);
        }
        ds.intervals[static_cast<std::size_t>(s)] = static_cast<std::int32_t>(interval);
    });
    return ds;
}

Mat center_targets(const Dataset& ds) {
    return ds.Y.middleRows(3, 3 * ds.n_q);
}

Mat radius_targets(const Dataset& ds) {
    return ds.Y.middleRows(3 * (ds.n_q + 1) + 1, ds.n_q);
}

// ------------------------------------------------------------- binary IO

namespace {
constexpr char kMagic[8] = {'R', 'G', 'D', 'A', 'T', '0', '0', '1'};

void write_i32(std::ofstream& out, std::int32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
std::int32_t read_i32(std::ifstream& in) {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
void write_mat(std::ofstream& out, const Mat& m) {
    for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) {
            const double v = m(r, c);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
}
void read_mat(std::ifstream& in, Mat& m) {
    for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) {
            double v = 0;
            in.read(reinterpret_cast<char*>(&v), 8);
            m(r, c) = v;
        }
}
}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
    out.write(kMagic, 8);
    write_i32(out, ds.n_q);
    write_i32(out, ds.n_t);
    write_i32(out, ds.encoding == TimeEncoding::Scalar ? 0 : 1);
    write_i32(out, ds.size());
    write_i32(out, static_cast<std::int32_t>(ds.X.rows()));
    write_i32(out, static_cast<std::int32_t>(ds.Y.rows()));
    write_i32(out, static_cast<std::int32_t>(ds.G.rows()));
    write_i32(out, 0);  // reserved
    out.write(reinterpret_cast<const char*>(&ds.seed), 8);
    write_mat(out, ds.X);
    write_mat(out, ds.Y);
    write_mat(out, ds.G);
    for (std::int32_t i : ds.intervals) write_i32(out, i);
    if (!out) throw std::runtime_error("save_dataset: write failure on " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_dataset: bad magic in " + path);
    Dataset ds;
    ds.n_q = read_i32(in);
    ds.n_t = read_i32(in);
    ds.encoding = read_i32(in) == 0 ? TimeEncoding::Scalar : TimeEncoding::OneHot;
    const std::int32_t n = read_i32(in);
    const std::int32_t x_rows = read_i32(in);
    const std::int32_t y_rows = read_i32(in);
    const std::int32_t g_rows = read_i32(in);
    read_i32(in);  // reserved
    in.read(reinterpret_cast<char*>(&ds.seed), 8);
    if (!in || ds.n_q < 1 || ds.n_t < 1 || n < 0 ||
        x_rows != dataset_input_dim(ds.n_q, ds.n_t, ds.encoding) || y_rows != 4 * (ds.n_q + 1) ||
        g_rows != 3 * ds.n_q * ds.n_q)
        throw std::runtime_error("load_dataset: corrupt header in " + path);
    ds.X.resize(x_rows, n);
    ds.Y.resize(y_rows, n);
    ds.G.resize(g_rows, n);
    read_mat(in, ds.X);
    read_mat(in, ds.Y);
    read_mat(in, ds.G);
    ds.intervals.assign(static_cast<std::size_t>(n), 0);
    for (auto& i : ds.intervals) i = read_i32(in);
    if (!in) throw std::runtime_error("load_dataset: truncated data in " + path);
    return ds;
}

// ----------------------------------------------------------- predictions

std::vector<Ball> predict_spheres(const Mlp& center_net, const Mlp& radius_net,
                                  const RobotModel& model, const Vec& x) {
    const int n_q = model.n_q();
    const Vec centers = center_net.forward(x);
    const Vec radii = radius_net.forward(x);
    if (centers.size() != 3 * n_q || radii.size() != n_q)
        throw std::invalid_argument("predict_spheres: network output dimension mismatch");
    std::vector<Ball> balls(static_cast<std::size_t>(n_q) + 1);
    balls[0].center.setZero();
    balls[0].radius = model.base_radius;
    for (int j = 1; j <= n_q; ++j) {
        balls[static_cast<std::size_t>(j)].center = centers.segment(3 * (j - 1), 3);
        balls[static_cast<std::size_t>(j)].radius = radii[j - 1];
    }
    return balls;
}

std::vector<Mat> predict_center_grad(const Mlp& grad_net, int n_q, const Vec& x) {
    const Vec flat = grad_net.forward(x);
    if (flat.size() != 3 * n_q * n_q)
        throw std::invalid_argument("predict_center_grad: network output dimension mismatch");
    std::vector<Mat> jacs(static_cast<std::size_t>(n_q));
    for (int j = 0; j < n_q; ++j) {
        Mat J(3, n_q);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < n_q; ++c) J(r, c) = flat[j * 3 * n_q + r * n_q + c];
        jacs[static_cast<std::size_t>(j)] = std::move(J);
    }
    return jacs;
}

}  // namespace reachguard
