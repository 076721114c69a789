#include <gtest/gtest.h>

#include <cmath>
#include <queue>
#include <random>

#include "qpfactor/circle.hpp"
#include "qpfactor/circular.hpp"
#include "qpfactor/error.hpp"

using namespace qpf;

namespace {

struct Graph {
    std::size_t n = 0;
    std::vector<OrientedEdge> edges;
    std::vector<double> z;
};

// Random spanning tree plus `extra` chords, random orientations and integer values in [-3, 3].
Graph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t extra) {
    Graph g;
    g.n = n;
    std::uniform_int_distribution<int> val(-3, 3), coin(0, 1);
    auto add = [&](std::uint32_t a, std::uint32_t b) {
        if (coin(rng)) std::swap(a, b);
        g.edges.push_back({a, b});
        g.z.push_back(val(rng));
    };
    for (std::uint32_t v = 1; v < n; ++v) add(std::uniform_int_distribution<std::uint32_t>(0, v - 1)(rng), v);
    std::uniform_int_distribution<std::uint32_t> any(0, static_cast<std::uint32_t>(n - 1));
    for (std::size_t k = 0; k < extra; ++k) {
        const auto a = any(rng), b = any(rng);
        if (a != b) add(a, b);
    }
    return g;
}

// Oriented edge sequence of the fundamental cycle closed by chord `c`, as (edge, sign) pairs.
std::vector<std::pair<std::size_t, int>> fundamental_cycle(const Graph& g, std::size_t tree_edges,
                                                           std::size_t c) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(g.n);  // (nbr, edge)
    for (std::size_t e = 0; e < tree_edges; ++e) {
        adj[g.edges[e].from].push_back({g.edges[e].to, e});
        adj[g.edges[e].to].push_back({g.edges[e].from, e});
    }
    // path in the tree from chord.to back to chord.from
    const std::size_t start = g.edges[c].to, goal = g.edges[c].from;
    std::vector<std::size_t> via(g.n, SIZE_MAX), prev(g.n, SIZE_MAX);
    std::queue<std::size_t> q;
    q.push(start);
    prev[start] = start;
    while (!q.empty()) {
        const auto v = q.front();
        q.pop();
        for (auto [w, e] : adj[v])
            if (prev[w] == SIZE_MAX) {
                prev[w] = v;
                via[w] = e;
                q.push(w);
            }
    }
    std::vector<std::pair<std::size_t, int>> cycle{{c, 1}};
    for (std::size_t v = goal; v != start; v = prev[v]) {
        // walking start -> goal means traversing prev[v] -> v
        const auto e = via[v];
        cycle.push_back({e, g.edges[e].from == prev[v] ? 1 : -1});
    }
    return cycle;
}

}  // namespace

TEST(Lift, RepresentativeConvention) {
    EXPECT_EQ(lift_value(0, 47), 0);
    EXPECT_EQ(lift_value(46, 47), -1);
    EXPECT_EQ(lift_value(23, 47), 23);
    EXPECT_EQ(lift_value(24, 47), -23);
    EXPECT_EQ(lift_value(1, 2), 1);
}

TEST(Lift, ClosedCocycleLiftsAndOpenOneFails) {
    const auto f = rips_filtration(DistanceMatrix(3, {0, 1, 1, 1, 0, 1, 1, 1, 0}), 2.0);
    Cocycle ok;
    ok.scale = 1.0;
    ok.entries = {{0, 1, 46}, {0, 2, 45}, {1, 2, 46}};  // -1, -2, -1 over Z
    const auto lifted = lift_to_integers(ok, 47, f);
    EXPECT_EQ(lifted.values, (std::vector<std::int64_t>{-1, -2, -1}));

    Cocycle wraps;  // closed mod 3 only
    wraps.scale = 1.0;
    wraps.entries = {{0, 1, 1}, {0, 2, 2}, {1, 2, 1}};
    try {
        lift_to_integers(wraps, 3, f);
        ADD_FAILURE() << "expected lift-failure";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::LiftFailure);
    }
}

TEST(Smooth, ZeroCocycle) {
    const std::vector<OrientedEdge> edges{{0, 1}, {1, 2}, {2, 0}, {2, 3}};
    const auto r = harmonic_smooth(edges, std::vector<double>(4, 0.0), 4);
    for (double v : r.f) EXPECT_EQ(v, 0.0);
    for (double w : r.residual) EXPECT_EQ(w, 0.0);
}

TEST(Smooth, FourCycle) {
    const std::vector<OrientedEdge> edges{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    const auto r = harmonic_smooth(edges, {0, 0, 0, 1}, 4);
    const double f[] = {0.0, -0.25, -0.5, -0.75};
    for (int v = 0; v < 4; ++v) EXPECT_NEAR(r.f[v], f[v], 1e-12);
    for (double w : r.residual) EXPECT_NEAR(w, 0.25, 1e-12);
    EXPECT_LE(r.normal_residual, 1e-8);
}

TEST(Smooth, TreesFitExactly) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_graph(rng, 2 + trial * 9, 0);
        const auto r = harmonic_smooth(g.edges, g.z, g.n);
        EXPECT_EQ(r.f[0], 0.0);
        for (double w : r.residual) EXPECT_NEAR(w, 0.0, 1e-9);
    }
}

TEST(Smooth, NormalResidualOnRandomGraphs) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial) * 6;
        const auto g = random_graph(rng, n, 2 * n);
        const auto r = harmonic_smooth(g.edges, g.z, g.n);
        EXPECT_LE(r.normal_residual, 1e-8);
        // independent check of the gradient of the objective
        std::vector<double> grad(n, 0.0);
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            grad[g.edges[e].to] += r.residual[e];
            grad[g.edges[e].from] -= r.residual[e];
        }
        for (std::size_t v = 1; v < n; ++v) EXPECT_NEAR(grad[v], 0.0, 1e-8);
    }
}

TEST(Smooth, CycleSumsAreTheCocycleSums) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 20 + static_cast<std::size_t>(trial) * 10;
        const auto g = random_graph(rng, n, n);
        const auto r = harmonic_smooth(g.edges, g.z, g.n);
        for (std::size_t c = n - 1; c < g.edges.size(); ++c) {
            double sw = 0.0, sz = 0.0;
            for (auto [e, sign] : fundamental_cycle(g, n - 1, c)) {
                sw += sign * r.residual[e];
                sz += sign * g.z[e];
            }
            EXPECT_NEAR(sw, sz, 1e-8);
            EXPECT_NEAR(sw, std::round(sw), 1e-8);
        }
    }
}

TEST(Smooth, Errors) {
    EXPECT_THROW(harmonic_smooth({{0, 1}, {2, 3}}, {1, 1}, 4), Error);
    EXPECT_THROW(harmonic_smooth({{0, 1}}, {1, 1}, 2), Error);
    EXPECT_THROW(harmonic_smooth({{0, 0}}, {1}, 2), Error);
    EXPECT_THROW(harmonic_smooth({{0, 5}}, {1}, 2), Error);
}

TEST(Components, LabelsByLowestVertex) {
    const auto c = graph_components({{3, 4}, {0, 2}}, 5);
    EXPECT_EQ(c, (std::vector<std::size_t>{0, 1, 0, 2, 2}));
}

TEST(AssignPhase, Examples) {
    const std::vector<double> f{0.0, 0.4, 1.25, -0.25};
    auto all = assign_phase(f, {0, 1, 2, 3}, 1.0);
    EXPECT_EQ(all.theta, (std::vector<double>{0.0, 0.4, 0.25, 0.75}));

    auto single = assign_phase({0.0}, {0, 0, 0}, 1.0);
    EXPECT_EQ(single.theta, (std::vector<double>{0.0, 0.0, 0.0}));

    auto alt = assign_phase({0.0, 0.4}, {0, 1, 0, 1, 0}, 1.0);
    EXPECT_EQ(alt.theta, (std::vector<double>{0.0, 0.4, 0.0, 0.4, 0.0}));
}

TEST(AssignPhase, NearestLandmarkAndCoverage) {
    PointCloud c;
    c.dim = 1;
    c.coords = {0.0, 0.4, 0.5, 0.6, 1.0};
    c.source_index = {0, 1, 2, 3, 4};
    // landmarks at 0.0 and 1.0; the midpoint ties to the first listed landmark
    EXPECT_EQ(nearest_landmarks(c, {0, 4}, 1.0), (std::vector<std::size_t>{0, 0, 0, 1, 1}));
    EXPECT_EQ(nearest_landmarks(c, {4, 0}, 1.0), (std::vector<std::size_t>{1, 1, 0, 0, 0}));
    try {
        nearest_landmarks(c, {0}, 0.5);
        ADD_FAILURE() << "expected coverage-error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::CoverageError);
    }
}

TEST(Winding, Examples) {
    std::vector<double> theta;
    for (int i = 0; i <= 30; ++i) theta.push_back(mod1(i / 10.0));
    EXPECT_NEAR(winding(theta), 3.0, 1e-12);
    EXPECT_EQ(winding(std::vector<double>(10, 0.3)), 0.0);
    std::vector<double> rev(theta.rbegin(), theta.rend());
    EXPECT_NEAR(winding(rev), -3.0, 1e-12);
}

TEST(Winding, AntisymmetryAndReflection) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> step(-0.45, 0.45);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> theta{0.1};
        for (int i = 0; i < 100; ++i) theta.push_back(mod1(theta.back() + step(rng)));
        std::vector<double> rev(theta.rbegin(), theta.rend()), refl;
        for (double t : theta) refl.push_back(mod1(1.0 - t));
        EXPECT_NEAR(winding(theta) + winding(rev), 0.0, 1e-9);
        EXPECT_NEAR(winding(refl), -winding(theta), 1e-9);
    }
}

TEST(Winding, GaugeShiftLeavesWindingAndResidualsAlone) {
    std::mt19937_64 rng(41);
    const auto g = random_graph(rng, 30, 30);
    const auto r = harmonic_smooth(g.edges, g.z, g.n);
    std::vector<std::size_t> order(g.n);
    for (std::size_t v = 0; v < g.n; ++v) order[v] = v;
    const auto a = assign_phase(r.f, order, 1.0);
    auto shifted = r.f;
    for (double& v : shifted) v += 0.37;
    const auto b = assign_phase(shifted, order, 1.0);
    EXPECT_NEAR(winding(a.theta), winding(b.theta), 1e-9);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const double wb = g.z[e] - (shifted[g.edges[e].to] - shifted[g.edges[e].from]);
        EXPECT_NEAR(wb, r.residual[e], 1e-12);
    }
}
