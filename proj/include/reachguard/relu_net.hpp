#pragma once

// Exact piecewise-linear network encodings.  min/max of two numbers is a
// width-4 ReLU gadget with fixed +-1 / +-1/2 weights; trees of gadgets give
// min/max of n inputs within width 4*ceil(n/2) and depth 2*ceil(log2 n)
// (counting each ReLU tier as depth 2: its hidden ReLU layer plus the affine
// combination).  A compiled planar signed-distance network evaluates the
// buffered-obstacle boundary distance exactly: one affine layer forms the
// edge projection parameters, a ReLU tier clamps them to [0,1], an affine
// layer forms the offset vectors, an explicit Norm2 tier takes their
// lengths (a Euclidean norm is not ReLU-representable, so this tier is
// counted separately), and a ReLU min tree selects the closest edge.  The
// inside/outside sign comes from a parallel halfspace-indicator network and
// flips the distance outside the ReLU tiers.

#include "reachguard/polyzonotope.hpp"

#include <string>
#include <vector>

namespace reachguard {

struct Layer {
    enum class Kind { Affine, Relu, Norm2 } kind = Kind::Affine;
    // Affine: y = W x + b.
    Mat W;
    Vec b;
    // Norm2: input is `groups` consecutive pairs; output i = ||(x_{2i}, x_{2i+1})||.
    int groups = 0;
};

struct ReluNetwork {
    int input_dim = 0;
    std::vector<Layer> layers;

    int output_dim() const;
};

Vec eval_net(const ReluNetwork& net, const Vec& x);

// Measured size of the ReLU part: width is the widest ReLU tier, depth is
// 2 x (number of ReLU tiers).  Norm2 tiers are reported separately.
struct NetSize {
    int relu_width = 0;
    int relu_depth = 0;
    int norm_units = 0;
};
NetSize measure(const ReluNetwork& net);

// Two-input gadgets (exact; weights fixed by construction).
ReluNetwork relu_min2();
ReluNetwork relu_max2();

// n-input tournament trees (exact for every input).
ReluNetwork relu_min_tree(int n);
ReluNetwork relu_max_tree(int n);

// Compiled planar signed distance to a union of buffered obstacles.
struct CompiledSdfNet {
    ReluNetwork distance;   // c -> min boundary distance (non-negative)
    ReluNetwork indicator;  // c -> min_j max_i (A_{j,i} c - b_{j,i}); <= 0 iff inside some obstacle
    int total_segments = 0;
    NetSize distance_size;
};

CompiledSdfNet compile_sdf_net(const std::vector<Zonotope>& obstacles, const Mat& ego_generators);

// sign(indicator) * distance; matches the direct evaluation to rounding.
double eval_compiled_sdf(const CompiledSdfNet& net, const Eigen::Vector2d& query);

// JSON round-trip of a network (layer kinds, shapes, row-major weights).
std::string network_to_json_text(const ReluNetwork& net);
ReluNetwork network_from_json_text(const std::string& text);
void save_network(const ReluNetwork& net, const std::string& path);
ReluNetwork load_network(const std::string& path);

}  // namespace reachguard
