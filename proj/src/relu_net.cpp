#include "reachguard/relu_net.hpp"

#include "reachguard/sdf.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace reachguard {

using nlohmann::json;

int ReluNetwork::output_dim() const {
    int dim = input_dim;
    for (const auto& layer : layers) {
        if (layer.kind == Layer::Kind::Affine)
            dim = static_cast<int>(layer.W.rows());
        else if (layer.kind == Layer::Kind::Norm2)
            dim = layer.groups;
    }
    return dim;
}

Vec eval_net(const ReluNetwork& net, const Vec& x) {
    if (x.size() != net.input_dim) throw std::invalid_argument("eval_net: input dimension mismatch");
    Vec v = x;
    for (const auto& layer : net.layers) {
        switch (layer.kind) {
            case Layer::Kind::Affine:
                if (layer.W.cols() != v.size())
                    throw std::invalid_argument("eval_net: affine layer shape mismatch");
                v = (layer.W * v + layer.b).eval();
                break;
            case Layer::Kind::Relu:
                v = v.cwiseMax(0.0);
                break;
            case Layer::Kind::Norm2: {
                if (v.size() != 2 * layer.groups)
                    throw std::invalid_argument("eval_net: norm tier expects paired inputs");
                Vec out(layer.groups);
                for (int g = 0; g < layer.groups; ++g)
                    out[g] = std::hypot(v[2 * g], v[2 * g + 1]);
                v = std::move(out);
                break;
            }
        }
    }
    return v;
}

NetSize measure(const ReluNetwork& net) {
    NetSize size;
    int current = net.input_dim;
    for (const auto& layer : net.layers) {
        if (layer.kind == Layer::Kind::Affine) {
            current = static_cast<int>(layer.W.rows());
        } else if (layer.kind == Layer::Kind::Relu) {
            size.relu_width = std::max(size.relu_width, current);
            size.relu_depth += 2;
        } else {
            size.norm_units += layer.groups;
            current = layer.groups;
        }
    }
    return size;
}

namespace {

// One tournament tier: adjacent pairs feed the 4-wide gadget, an odd
// leftover passes through as relu(x) - relu(-x).
void append_minmax_tier(ReluNetwork& net, int width, bool is_min) {
    const int pairs = width / 2;
    const int rem = width % 2;

    Layer pre;
    pre.kind = Layer::Kind::Affine;
    pre.W = Mat::Zero(4 * pairs + 2 * rem, width);
    pre.b = Vec::Zero(pre.W.rows());
    Layer post;
    post.kind = Layer::Kind::Affine;
    post.W = Mat::Zero(pairs + rem, pre.W.rows());
    post.b = Vec::Zero(pairs + rem);

    for (int p = 0; p < pairs; ++p) {
        const int xi = 2 * p, yi = 2 * p + 1, r0 = 4 * p;
        if (is_min) {
            // rows: x+y, x-y, -x+y, -x-y; combination (1/2)(r0) - (1/2)(r1+r2+r3)
            pre.W(r0 + 0, xi) = 1;  pre.W(r0 + 0, yi) = 1;
            pre.W(r0 + 1, xi) = 1;  pre.W(r0 + 1, yi) = -1;
            pre.W(r0 + 2, xi) = -1; pre.W(r0 + 2, yi) = 1;
            pre.W(r0 + 3, xi) = -1; pre.W(r0 + 3, yi) = -1;
            post.W(p, r0 + 0) = 0.5;
            post.W(p, r0 + 1) = -0.5;
            post.W(p, r0 + 2) = -0.5;
            post.W(p, r0 + 3) = -0.5;
        } else {
            // rows: x+y, -x-y, -x+y, x-y; combination (1/2)(r0 - r1 + r2 + r3)
            pre.W(r0 + 0, xi) = 1;  pre.W(r0 + 0, yi) = 1;
            pre.W(r0 + 1, xi) = -1; pre.W(r0 + 1, yi) = -1;
            pre.W(r0 + 2, xi) = -1; pre.W(r0 + 2, yi) = 1;
            pre.W(r0 + 3, xi) = 1;  pre.W(r0 + 3, yi) = -1;
            post.W(p, r0 + 0) = 0.5;
            post.W(p, r0 + 1) = -0.5;
            post.W(p, r0 + 2) = 0.5;
            post.W(p, r0 + 3) = 0.5;
        }
    }
    if (rem) {
        const int xi = width - 1, r0 = 4 * pairs;
        pre.W(r0 + 0, xi) = 1;
        pre.W(r0 + 1, xi) = -1;
        post.W(pairs, r0 + 0) = 1;
        post.W(pairs, r0 + 1) = -1;
    }

    net.layers.push_back(std::move(pre));
    net.layers.push_back(Layer{Layer::Kind::Relu, Mat(), Vec(), 0});
    net.layers.push_back(std::move(post));
}

ReluNetwork minmax_tree(int n, bool is_min) {
    if (n < 1) throw std::invalid_argument("minmax tree: need n >= 1");
    ReluNetwork net;
    net.input_dim = n;
    int width = n;
    while (width > 1) {
        append_minmax_tier(net, width, is_min);
        width = width / 2 + width % 2;
    }
    return net;
}

}  // namespace

ReluNetwork relu_min2() { return minmax_tree(2, true); }
ReluNetwork relu_max2() { return minmax_tree(2, false); }
ReluNetwork relu_min_tree(int n) { return minmax_tree(n, true); }
ReluNetwork relu_max_tree(int n) { return minmax_tree(n, false); }

CompiledSdfNet compile_sdf_net(const std::vector<Zonotope>& obstacles, const Mat& ego_generators) {
    if (obstacles.empty()) throw std::invalid_argument("compile_sdf_net: no obstacles");

    // Gather every buffered boundary segment and the per-obstacle halfspace
    // rows from the same vertex enumeration used by the direct evaluator.
    struct Seg {
        Eigen::Vector2d v1, v2;
    };
    std::vector<Seg> segs;
    std::vector<std::pair<Mat, Vec>> halfspaces;
    for (const auto& obs : obstacles) {
        for (const auto& [v1, v2] : buffered_segments_2d(obs, ego_generators)) {
            if ((v2 - v1).norm() < 1e-14)
                throw std::runtime_error("compile_sdf_net: degenerate boundary segment");
            segs.push_back({v1, v2});
        }
        halfspaces.push_back(buffered_halfspace_2d(obs, ego_generators));
    }
    const int N = static_cast<int>(segs.size());

    CompiledSdfNet out;
    out.total_segments = N;

    // ---- distance path ----
    ReluNetwork& dist = out.distance;
    dist.input_dim = 2;

    // Tier 1 (affine + ReLU + affine): projection parameters t_s and their
    // clamp t* = relu(t) - relu(t-1); the query point rides along as
    // relu(c) - relu(-c) so the next affine layer can form the offsets.
    Layer pre;
    pre.kind = Layer::Kind::Affine;
    pre.W = Mat::Zero(2 * N + 4, 2);
    pre.b = Vec::Zero(2 * N + 4);
    for (int s = 0; s < N; ++s) {
        const Eigen::Vector2d e = segs[static_cast<std::size_t>(s)].v2 - segs[static_cast<std::size_t>(s)].v1;
        const Eigen::Vector2d a = e / e.squaredNorm();
        const double b0 = -segs[static_cast<std::size_t>(s)].v1.dot(a);
        pre.W.row(2 * s) = a.transpose();
        pre.b[2 * s] = b0;
        pre.W.row(2 * s + 1) = a.transpose();
        pre.b[2 * s + 1] = b0 - 1.0;
    }
    pre.W(2 * N + 0, 0) = 1;
    pre.W(2 * N + 1, 1) = 1;
    pre.W(2 * N + 2, 0) = -1;
    pre.W(2 * N + 3, 1) = -1;
    dist.layers.push_back(std::move(pre));
    dist.layers.push_back(Layer{Layer::Kind::Relu, Mat(), Vec(), 0});

    // Offsets d_s = c - (v1_s + e_s t*_s), interleaved (x, y) pairs.
    Layer mid;
    mid.kind = Layer::Kind::Affine;
    mid.W = Mat::Zero(2 * N, 2 * N + 4);
    mid.b = Vec::Zero(2 * N);
    for (int s = 0; s < N; ++s) {
        const Eigen::Vector2d v1 = segs[static_cast<std::size_t>(s)].v1;
        const Eigen::Vector2d e = segs[static_cast<std::size_t>(s)].v2 - v1;
        for (int axis = 0; axis < 2; ++axis) {
            const int row = 2 * s + axis;
            mid.W(row, 2 * s) = -e[axis];      // -e * relu(t)
            mid.W(row, 2 * s + 1) = e[axis];   // +e * relu(t-1)
            mid.W(row, 2 * N + axis) = 1;      // +relu(c)
            mid.W(row, 2 * N + 2 + axis) = -1; // -relu(-c)
            mid.b[row] = -v1[axis];
        }
    }
    dist.layers.push_back(std::move(mid));
    dist.layers.push_back(Layer{Layer::Kind::Norm2, Mat(), Vec(), N});

    // Min tree over the N segment distances.
    const ReluNetwork tree = relu_min_tree(N);
    for (const auto& layer : tree.layers) dist.layers.push_back(layer);

    out.distance_size = measure(dist);

    // ---- sign path ----
    // Per obstacle: max over its halfspace slacks (negative iff the query is
    // inside that obstacle); then min over obstacles.
    ReluNetwork& ind = out.indicator;
    ind.input_dim = 2;
    int total_rows = 0;
    for (const auto& [A, b] : halfspaces) total_rows += static_cast<int>(A.rows());
    Layer slack;
    slack.kind = Layer::Kind::Affine;
    slack.W = Mat::Zero(total_rows, 2);
    slack.b = Vec::Zero(total_rows);
    int r = 0;
    for (const auto& [A, b] : halfspaces) {
        slack.W.block(r, 0, A.rows(), 2) = A;
        slack.b.segment(r, b.size()) = -b;
        r += static_cast<int>(A.rows());
    }
    ind.layers.push_back(std::move(slack));
    // Run each obstacle's max tree to completion in parallel tiers, then one
    // min tree across obstacles.  Tier construction needs uniform widths, so
    // obstacles reduce one after another via block-diagonal tiers.
    {
        // Simpler and still exact: a single max tree per obstacle evaluated
        // by stacking: we apply max trees sequentially using pass-through of
        // remaining values.  For the obstacle counts used here the widths
        // stay modest.
        std::vector<int> sizes;
        for (const auto& [A, b] : halfspaces) sizes.push_back(static_cast<int>(A.rows()));
        // Reduce every obstacle block pairwise in lockstep until each is one
        // value: each tier applies the max gadget within every block and
        // passes odd leftovers through.
        std::vector<int> widths = sizes;
        auto any_wide = [&]() {
            for (int w : widths)
                if (w > 1) return true;
            return false;
        };
        while (any_wide()) {
            int in_w = 0;
            for (int w : widths) in_w += w;
            Layer pre2;
            pre2.kind = Layer::Kind::Affine;
            Layer post2;
            post2.kind = Layer::Kind::Affine;
            // Count rows.
            int pre_rows = 0, post_rows = 0;
            for (int w : widths) {
                pre_rows += 4 * (w / 2) + 2 * (w % 2);
                post_rows += w / 2 + w % 2;
            }
            pre2.W = Mat::Zero(pre_rows, in_w);
            pre2.b = Vec::Zero(pre_rows);
            post2.W = Mat::Zero(post_rows, pre_rows);
            post2.b = Vec::Zero(post_rows);
            int in_off = 0, pre_off = 0, post_off = 0;
            for (std::size_t bi = 0; bi < widths.size(); ++bi) {
                const int w = widths[bi];
                const int pairs = w / 2, rem = w % 2;
                for (int p = 0; p < pairs; ++p) {
                    const int xi = in_off + 2 * p, yi = xi + 1, r0 = pre_off + 4 * p;
                    pre2.W(r0 + 0, xi) = 1;  pre2.W(r0 + 0, yi) = 1;
                    pre2.W(r0 + 1, xi) = -1; pre2.W(r0 + 1, yi) = -1;
                    pre2.W(r0 + 2, xi) = -1; pre2.W(r0 + 2, yi) = 1;
                    pre2.W(r0 + 3, xi) = 1;  pre2.W(r0 + 3, yi) = -1;
                    post2.W(post_off + p, r0 + 0) = 0.5;
                    post2.W(post_off + p, r0 + 1) = -0.5;
                    post2.W(post_off + p, r0 + 2) = 0.5;
                    post2.W(post_off + p, r0 + 3) = 0.5;
                }
                if (rem) {
                    const int xi = in_off + w - 1, r0 = pre_off + 4 * pairs;
                    pre2.W(r0 + 0, xi) = 1;
                    pre2.W(r0 + 1, xi) = -1;
                    post2.W(post_off + pairs, r0 + 0) = 1;
                    post2.W(post_off + pairs, r0 + 1) = -1;
                }
                in_off += w;
                pre_off += 4 * pairs + 2 * rem;
                post_off += pairs + rem;
                widths[bi] = pairs + rem;
            }
            ind.layers.push_back(std::move(pre2));
            ind.layers.push_back(Layer{Layer::Kind::Relu, Mat(), Vec(), 0});
            ind.layers.push_back(std::move(post2));
        }
        const ReluNetwork min_over = relu_min_tree(static_cast<int>(widths.size()));
        for (const auto& layer : min_over.layers) ind.layers.push_back(layer);
    }
    return out;
}

double eval_compiled_sdf(const CompiledSdfNet& net, const Eigen::Vector2d& query) {
    Vec x(2);
    x << query.x(), query.y();
    const double dist = eval_net(net.distance, x)[0];
    const double indicator = eval_net(net.indicator, x)[0];
    return indicator <= 0.0 ? -dist : dist;
}

// ------------------------------------------------------------------ JSON IO

std::string network_to_json_text(const ReluNetwork& net) {
    json doc;
    doc["format"] = "relu-network-v1";
    doc["input_dim"] = net.input_dim;
    doc["layers"] = json::array();
    for (const auto& layer : net.layers) {
        json item;
        switch (layer.kind) {
            case Layer::Kind::Affine: {
                item["kind"] = "affine";
                item["rows"] = layer.W.rows();
                item["cols"] = layer.W.cols();
                std::vector<double> w;
                w.reserve(static_cast<std::size_t>(layer.W.size()));
                for (int r = 0; r < layer.W.rows(); ++r)
                    for (int c = 0; c < layer.W.cols(); ++c) w.push_back(layer.W(r, c));
                item["weights"] = w;
                item["bias"] = std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size());
                break;
            }
            case Layer::Kind::Relu:
                item["kind"] = "relu";
                break;
            case Layer::Kind::Norm2:
                item["kind"] = "norm2";
                item["groups"] = layer.groups;
                break;
        }
        doc["layers"].push_back(std::move(item));
    }
    return doc.dump();
}

ReluNetwork network_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("network json: parse failure: ") + e.what());
    }
    if (doc.value("format", "") != "relu-network-v1")
        throw std::invalid_argument("network json: unknown format tag");
    ReluNetwork net;
    net.input_dim = doc.at("input_dim").get<int>();
    for (const auto& item : doc.at("layers")) {
        Layer layer;
        const std::string kind = item.at("kind").get<std::string>();
        if (kind == "affine") {
            layer.kind = Layer::Kind::Affine;
            const int rows = item.at("rows").get<int>();
            const int cols = item.at("cols").get<int>();
            const auto w = item.at("weights").get<std::vector<double>>();
            const auto b = item.at("bias").get<std::vector<double>>();
            if (static_cast<int>(w.size()) != rows * cols || static_cast<int>(b.size()) != rows)
                throw std::invalid_argument("network json: affine layer size mismatch");
            layer.W.resize(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) layer.W(r, c) = w[static_cast<std::size_t>(r * cols + c)];
            layer.b = Eigen::Map<const Vec>(b.data(), rows);
        } else if (kind == "relu") {
            layer.kind = Layer::Kind::Relu;
        } else if (kind == "norm2") {
            layer.kind = Layer::Kind::Norm2;
            layer.groups = item.at("groups").get<int>();
        } else {
            throw std::invalid_argument("network json: unknown layer kind " + kind);
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

void save_network(const ReluNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_network: cannot open " + path);
    out << network_to_json_text(net) << "\n";
}

ReluNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_network: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return network_from_json_text(ss.str());
}

}  // namespace reachguard
