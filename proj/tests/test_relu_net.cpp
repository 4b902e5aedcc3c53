// Piecewise-linear network encodings: the min/max gadgets must be exact (not
// approximate) for every input, the tournament trees must respect the
// advertised width/depth budget, and the compiled planar distance network
// must reproduce the direct geometric evaluation to rounding.
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "reachguard/relu_net.hpp"
#include "reachguard/rng.hpp"
#include "reachguard/sdf.hpp"
#include "reachguard/world.hpp"

using namespace reachguard;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Zonotope square(double cx, double cy, double half) {
    Zonotope z;
    z.center = vec2(cx, cy);
    z.generators = Mat::Zero(2, 2);
    z.generators(0, 0) = half;
    z.generators(1, 1) = half;
    return z;
}

Zonotope random_obstacle_2d(Rng& rng, int m) {
    Zonotope z;
    z.center = vec2(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    z.generators = Mat(2, m);
    for (int j = 0; j < m; ++j) {
        z.generators(0, j) = rng.uniform(-0.6, 0.6);
        z.generators(1, j) = rng.uniform(-0.6, 0.6);
    }
    return z;
}

int ceil_log2(int n) {
    int d = 0;
    int v = 1;
    while (v < n) {
        v *= 2;
        ++d;
    }
    return d;
}

}  // namespace

TEST_CASE("two-input min and max gadgets are exact") {
    const auto mn = relu_min2();
    const auto mx = relu_max2();
    REQUIRE(mn.input_dim == 2);
    REQUIRE(mn.output_dim() == 1);

    // Hand-picked cases including ties and signs.
    const double cases[][2] = {{1.0, 2.0}, {2.0, 1.0}, {-3.0, 5.0}, {-1.0, -4.0},
                               {0.0, 0.0},  {7.5, 7.5}, {1e-12, -1e-12}};
    for (const auto& c : cases) {
        CHECK(eval_net(mn, vec2(c[0], c[1]))(0) == std::min(c[0], c[1]));
        CHECK(eval_net(mx, vec2(c[0], c[1]))(0) == std::max(c[0], c[1]));
    }

    // The gadget identity min(a,b) = (a+b-|a-b|)/2 is exact in floating
    // point for these weights; demand zero error on random pairs.
    Rng rng(81, 1);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double a = rng.uniform(-50.0, 50.0);
        const double b = rng.uniform(-50.0, 50.0);
        worst = std::max(worst, std::abs(eval_net(mn, vec2(a, b))(0) - std::min(a, b)));
        worst = std::max(worst, std::abs(eval_net(mx, vec2(a, b))(0) - std::max(a, b)));
    }
    CHECK(worst <= 1e-12);

    // Measured size: one ReLU tier of width 4.
    const auto size = measure(mn);
    CHECK(size.relu_width == 4);
    CHECK(size.relu_depth == 2);
    CHECK(size.norm_units == 0);
}

TEST_CASE("tournament trees compute min/max of n inputs") {
    Rng rng(82, 1);
    for (int n : {1, 2, 3, 4, 5, 8, 13, 32}) {
        const auto mn = relu_min_tree(n);
        const auto mx = relu_max_tree(n);
        REQUIRE(mn.input_dim == n);
        REQUIRE(mn.output_dim() == 1);
        for (int rep = 0; rep < 200; ++rep) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x(i) = rng.uniform(-20.0, 20.0);
            CHECK(eval_net(mn, x)(0) == doctest::Approx(x.minCoeff()).epsilon(1e-14));
            CHECK(eval_net(mx, x)(0) == doctest::Approx(x.maxCoeff()).epsilon(1e-14));
        }
    }

    // Spot value from a fixed vector.
    Vec x(4);
    x << 7.0, 2.0, 9.0, 5.0;
    CHECK(eval_net(relu_min_tree(4), x)(0) == 2.0);
    CHECK(eval_net(relu_max_tree(4), x)(0) == 9.0);
}

TEST_CASE("tree sizes satisfy the width and depth bounds") {
    for (int n = 1; n <= 64; ++n) {
        const auto size = measure(relu_min_tree(n));
        const int width_bound = 4 * ((n + 1) / 2);
        const int depth_bound = 2 * ceil_log2(std::max(n, 2));
        if (n >= 2) {
            CHECK(size.relu_width <= width_bound);
            CHECK(size.relu_depth <= depth_bound);
            CHECK(size.relu_depth >= 2);
        } else {
            CHECK(size.relu_depth == 0);  // identity, no ReLU tier
        }
    }
    // Exact values for n = 4: two tiers, first tier handles two pairs.
    const auto s4 = measure(relu_min_tree(4));
    CHECK(s4.relu_width == 8);
    CHECK(s4.relu_depth == 4);
}

TEST_CASE("compiled planar network matches direct evaluation on one square") {
    const Zonotope obs = square(0.0, 0.0, 1.0);
    const Mat no_ego = Mat::Zero(2, 0);
    const auto net = compile_sdf_net({obs}, no_ego);
    // A two-generator box buffered by nothing has 4 boundary segments.
    CHECK(net.total_segments == 4);

    Zonotope ego;
    ego.generators = Mat::Zero(2, 0);
    Rng rng(83, 1);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Vector2d q(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
        ego.center = vec2(q.x(), q.y());
        const double direct = signed_distance_2d(ego, {obs});
        const double compiled = eval_compiled_sdf(net, q);
        CHECK(std::abs(direct - compiled) <= 1e-9);
    }
    // Known values.
    CHECK(eval_compiled_sdf(net, {3.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eval_compiled_sdf(net, {0.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("compiled network is translation equivariant") {
    Rng rng(84, 1);
    const Zonotope obs = random_obstacle_2d(rng, 3);
    Mat ego(2, 1);
    ego << 0.2, -0.1;
    const auto net = compile_sdf_net({obs}, ego);

    Zonotope shifted = obs;
    shifted.center = obs.center + vec2(1.7, -2.3);
    const auto net_shifted = compile_sdf_net({shifted}, ego);

    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector2d q(rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0));
        const double a = eval_compiled_sdf(net, q);
        const double b = eval_compiled_sdf(net_shifted, q + Eigen::Vector2d(1.7, -2.3));
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("compiled network equals direct evaluation across obstacle counts") {
    // Segment totals 4, 8, 24: one bare box, two bare boxes, and two
    // three-generator obstacles buffered by three ego generators
    // (2*(3+3)=12 segments each).
    Rng rng(85, 1);

    struct Scene {
        std::vector<Zonotope> obstacles;
        Mat ego_gens;
        int expected_segments = 0;
    };
    std::vector<Scene> scenes;
    {
        Scene s;
        s.obstacles = {square(0.0, 0.0, 1.0)};
        s.ego_gens = Mat::Zero(2, 0);
        s.expected_segments = 4;
        scenes.push_back(s);
    }
    {
        Scene s;
        s.obstacles = {square(-1.5, 0.0, 0.5), square(1.5, 0.5, 0.7)};
        s.ego_gens = Mat::Zero(2, 0);
        s.expected_segments = 8;
        scenes.push_back(s);
    }
    {
        Scene s;
        s.obstacles = {random_obstacle_2d(rng, 3), random_obstacle_2d(rng, 3)};
        Mat ego(2, 3);
        ego << 0.15, -0.05, 0.08, 0.04, 0.12, -0.1;
        s.ego_gens = ego;
        s.expected_segments = 24;
        scenes.push_back(s);
    }

    for (const auto& scene : scenes) {
        const auto net = compile_sdf_net(scene.obstacles, scene.ego_gens);
        CHECK(net.total_segments == scene.expected_segments);

        // Size bounds from the construction: the distance net's widest ReLU
        // tier is at most 4*ceil(N/2) + 8 and its depth at most
        // 2*floor(log2 N) + 4.
        const int N = net.total_segments;
        CHECK(net.distance_size.relu_width <= 4 * ((N + 1) / 2) + 8);
        CHECK(net.distance_size.relu_depth <=
              2 * static_cast<int>(std::floor(std::log2(static_cast<double>(N)))) + 4);
        CHECK(net.distance_size.norm_units == N);

        Zonotope ego;
        ego.generators = scene.ego_gens;
        double worst = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const Eigen::Vector2d q(rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0));
            ego.center = vec2(q.x(), q.y());
            const double direct = signed_distance_2d(ego, scene.obstacles);
            const double compiled = eval_compiled_sdf(net, q);
            worst = std::max(worst, std::abs(direct - compiled));
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("distance head of the compiled network is piecewise linear") {
    // Along a segment that stays in one linear region, the network output
    // must be exactly affine; sample a short chord far from the obstacle.
    const auto net = compile_sdf_net({square(0.0, 0.0, 1.0)}, Mat::Zero(2, 0));
    const Eigen::Vector2d a(2.5, 0.3), b(2.6, 0.3);
    const double fa = eval_compiled_sdf(net, a);
    const double fb = eval_compiled_sdf(net, b);
    for (int i = 1; i < 10; ++i) {
        const double t = i / 10.0;
        const Eigen::Vector2d p = (1 - t) * a + t * b;
        // Distance to the face x = 1 is linear in x here.
        CHECK(eval_compiled_sdf(net, p) == doctest::Approx((1 - t) * fa + t * fb).epsilon(1e-12));
    }
}

TEST_CASE("network JSON round-trip preserves evaluation") {
    Rng rng(86, 1);
    const auto net = relu_min_tree(5);
    const std::string text = network_to_json_text(net);
    const auto restored = network_from_json_text(text);
    REQUIRE(restored.input_dim == net.input_dim);
    REQUIRE(restored.layers.size() == net.layers.size());
    for (int rep = 0; rep < 100; ++rep) {
        Vec x(5);
        for (int i = 0; i < 5; ++i) x(i) = rng.uniform(-10.0, 10.0);
        CHECK(eval_net(restored, x)(0) == eval_net(net, x)(0));
    }

    // File round-trip, including a Norm2 tier from a compiled net.
    const auto compiled = compile_sdf_net({square(0.5, -0.25, 0.75)}, Mat::Zero(2, 0));
    const std::string path = "test_relu_roundtrip.json";
    save_network(compiled.distance, path);
    const auto loaded = load_network(path);
    std::remove(path.c_str());
    for (int rep = 0; rep < 100; ++rep) {
        Vec x(2);
        x << rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0);
        CHECK(eval_net(loaded, x)(0) == eval_net(compiled.distance, x)(0));
    }
}
