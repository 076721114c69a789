// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>
#include <string>

#include "naive_persistence.hpp"
#include "qpfactor/circle.hpp"
#include "qpfactor/circular.hpp"
#include "qpfactor/factorize.hpp"
#include "qpfactor/persistence.hpp"
#include "qpfactor/signal.hpp"
#include "qpfactor/universality.hpp"

using namespace qpf;

namespace {

// pinned tolerances
constexpr double kWindingTol1 = 0.3;
constexpr double kPeriodLo1 = 0.98, kPeriodHi1 = 1.02;
constexpr double kResidual = 0.05;
constexpr double kPeriodLo2 = 1.96, kPeriodHi2 = 2.04;
constexpr double kPeriodOneResidual = 0.2;
constexpr double kChirpPhaseRms = 0.05;
constexpr double kArctanWinding = 1.0;
constexpr double kJoinWindingLo = 5.5, kJoinWindingHi = 6.5;
constexpr std::size_t kJoinClassesLo = 55, kJoinClassesHi = 60;
constexpr double kHexagonTol = 1e-9;
constexpr double kNormalResidual = 1e-8;
constexpr double kTreeResidual = 1e-9;
constexpr double kCycleSum = 1e-8;
constexpr double kRefineTol = 1.0 / 240;

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail, double seconds) {
    if (!ok) ++failures;
    std::printf("%s [%d] %s: %s (%.1fs)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> values_at(const SampledSignal& s, const std::vector<std::size_t>& idx) {
    std::vector<double> v;
    for (auto i : idx)
        for (double c : s.value(i)) v.push_back(c);
    return v;
}

std::vector<double> domain_at(const SampledSignal& s, const std::vector<std::size_t>& idx) {
    std::vector<double> x;
    for (auto i : idx) x.push_back(s.x(i));
    return x;
}

// Circular rms of theta against reference after the best rotation, over both orientations.
double aligned_phase_rms(const std::vector<double>& theta, const std::vector<double>& ref) {
    double best = 1.0;
    for (int sign : {1, -1}) {
        double c = 0.0, s = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double d = 2 * std::numbers::pi * (mod1(sign * theta[i]) - ref[i]);
            c += std::cos(d);
            s += std::sin(d);
        }
        const double shift = std::atan2(s, c) / (2 * std::numbers::pi);
        double acc = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double e = wrap_half(mod1(sign * theta[i]) - ref[i] - shift);
            acc += e * e;
        }
        best = std::min(best, std::sqrt(acc / static_cast<double>(theta.size())));
    }
    return best;
}

void periodic_baseline() {
    Timer t;
    const auto s = gen_sine(600, 0.0, 6.0);
    const auto fz = factorize(s, {});
    const bool circle = fz.phase_class == PhaseClass::Circle;
    const double T = fz.period_estimate.value_or(NAN);
    const bool ok = circle && std::abs(fz.winding - 6.0) <= kWindingTol1 && T >= kPeriodLo1 && T <= kPeriodHi1 &&
                    fz.residual_rms < kResidual;
    report(1, ok, "periodic baseline",
           std::string(phase_class_name(fz.phase_class)) + fmt(" winding=%.4f", fz.winding) + fmt(" T=%.4f", T) +
               fmt(" rms=%.4f", fz.residual_rms),
           t.seconds());
}

void universality_fixture() {
    Timer t;
    const auto s = gen_modulated_periodic(601, 0.0, 6.0);
    FactorizeConfig c;
    c.offsets = std::vector<double>{0.35, 0.75, 1.15};
    c.landmarks = 300;
    const auto fz = factorize(s, c);
    const double T = fz.period_estimate.value_or(NAN);
    bool inj = false, period_one_bad = false;
    double rms1 = NAN;
    if (fz.phase_class == PhaseClass::Circle) {
        const auto x = domain_at(s, fz.samples);
        inj = injectivity_windows(fz.theta, x, 2.0, 1.0 / (4.0 * 64), 3 * s.step()).pass;
        std::vector<double> doubled;
        for (double th : fz.theta) doubled.push_back(mod1(2 * th));
        const auto m = build_U(doubled, values_at(s, fz.samples), 1, 64);
        rms1 = residual(s, m, doubled, fz.samples).rms;
        period_one_bad = rms1 > kPeriodOneResidual;
    }
    const bool ok = T >= kPeriodLo2 && T <= kPeriodHi2 && inj && period_one_bad;
    report(2, ok, "universality fixture",
           std::string(phase_class_name(fz.phase_class)) + fmt(" T=%.4f", T) +
               " injective@2=" + (inj ? "yes" : "no") + fmt(" period-1 rms=%.4f", rms1),
           t.seconds());
}

void chirp() {
    Timer t;
    const auto s = gen_chirp_recip(2000, 0.05, 0.5);
    const auto fz = factorize(s, {});
    std::string detail = std::string(phase_class_name(fz.phase_class)) + fmt(" rms=%.4f", fz.residual_rms);
    bool ok = false;
    if (fz.phase_class == PhaseClass::Circle) {
        std::vector<double> ref;
        for (auto i : fz.samples) ref.push_back(mod1(1.0 / (2 * std::numbers::pi * s.x(i))));
        const double prms = aligned_phase_rms(fz.theta, ref);
        detail += fmt(" phase rms=%.4f", prms);
        ok = prms < kChirpPhaseRms && fz.residual_rms < kResidual;
    } else if (fz.phase_class == PhaseClass::Interval) {
        for (const auto& w : fz.warnings)
            if (w.find("interval phase space") != std::string::npos &&
                w.find("real line is the phase space") != std::string::npos)
                ok = true;
        detail += ok ? " interval warning emitted" : " interval warning missing";
    }
    report(3, ok, "chirp", detail, t.seconds());
}

void degenerate_classes() {
    Timer t;
    const auto point = factorize(gen_constant(200, 0.0, 1.0, 0.3), {}).phase_class;
    const auto interval = factorize(gen_linear(200, 0.0, 1.0), {}).phase_class;
    const auto arctan = factorize(gen_arctan_circle(2000, -20.0, 20.0), {});
    const bool ok = point == PhaseClass::Point && interval == PhaseClass::Interval &&
                    std::abs(arctan.winding) < kArctanWinding;
    report(4, ok, "degenerate classes",
           std::string("constant=") + std::string(phase_class_name(point)) +
               " linear=" + std::string(phase_class_name(interval)) + " arctan=" +
               std::string(phase_class_name(arctan.phase_class)) + fmt(" |winding|=%.4f", std::abs(arctan.winding)),
           t.seconds());
}

void join_fixture() {
    Timer t;
    // step 6/599 keeps samples off the shared bin edges at multiples of 0.1
    const auto x = uniform_grid(600, 0.0, 6.0);
    std::vector<double> t1, t2;
    for (double v : x) {
        t1.push_back(mod1(v / 2));
        t2.push_back(mod1(v / 3));
    }
    const auto q = join(t1, t2, 60);
    const bool ok = q.winding_estimate >= kJoinWindingLo && q.winding_estimate <= kJoinWindingHi &&
                    q.class_count >= kJoinClassesLo && q.class_count <= kJoinClassesHi;
    report(5, ok, "join",
           fmt("winding=%.4f", q.winding_estimate) + fmt(" classes=%.0f", static_cast<double>(q.class_count)) +
               fmt(" cycle_rank=%.0f", static_cast<double>(q.cycle_rank)),
           t.seconds());
}

PointCloud cloud_of(std::size_t dim, std::vector<double> coords) {
    PointCloud c;
    c.dim = dim;
    c.source_index.resize(coords.size() / dim);
    for (std::size_t i = 0; i < c.source_index.size(); ++i) c.source_index[i] = i;
    c.coords = std::move(coords);
    return c;
}

naive::Bars sorted_bars(const std::vector<Bar>& bars) {
    naive::Bars out;
    for (const auto& b : bars) out.emplace_back(b.birth, b.death);
    std::sort(out.begin(), out.end());
    return out;
}

void persistence_oracle() {
    Timer t;
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::size_t> size(3, 30), dims(2, 3);
    std::uniform_real_distribution<double> coord(-1.0, 1.0), frac(0.3, 1.0);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = size(rng), d = dims(rng);
        std::vector<double> xs(n * d);
        for (double& v : xs) v = coord(rng);
        const auto dist = DistanceMatrix::from_cloud(cloud_of(d, xs));
        const double rmax = frac(rng) * dist.diameter();
        const auto code = compute_persistence(rips_filtration(dist, rmax), 47);
        const auto oracle = naive::persistence(
            static_cast<int>(n), [&](int i, int j) { return dist(i, j); }, rmax, 47);
        if (sorted_bars(code.h0) != oracle.h0 || sorted_bars(code.h1) != oracle.h1) ++mismatches;
    }
    const auto square = compute_persistence(
        rips_filtration(DistanceMatrix::from_cloud(cloud_of(2, {0, 0, 1, 0, 1, 1, 0, 1})), 2.0));
    const bool square_ok = square.h1.size() == 1 && square.h1[0].birth == 1.0 && square.h1[0].death == std::sqrt(2.0);
    const double side = 0.7;
    std::vector<double> hex;
    for (int k = 0; k < 6; ++k) {
        hex.push_back(side * std::cos(k * std::numbers::pi / 3));
        hex.push_back(side * std::sin(k * std::numbers::pi / 3));
    }
    const auto h = compute_persistence(rips_filtration(DistanceMatrix::from_cloud(cloud_of(2, hex)), 3 * side));
    const bool hex_ok = h.h1.size() == 1 && std::abs(h.h1[0].birth - side) <= kHexagonTol &&
                        std::abs(h.h1[0].death - side * std::sqrt(3.0)) <= kHexagonTol;
    report(6, mismatches == 0 && square_ok && hex_ok, "persistence oracle",
           fmt("mismatches=%.0f/50", static_cast<double>(mismatches)) + " square=" + (square_ok ? "exact" : "wrong") +
               " hexagon=" + (hex_ok ? "ok" : "wrong"),
           t.seconds());
}

struct Graph {
    std::size_t n = 0;
    std::vector<OrientedEdge> edges;
    std::vector<double> z;
};

Graph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t chords) {
    Graph g;
    g.n = n;
    std::uniform_int_distribution<int> val(-5, 5), coin(0, 1);
    auto add = [&](std::uint32_t a, std::uint32_t b) {
        if (coin(rng)) std::swap(a, b);
        g.edges.push_back({a, b});
        g.z.push_back(val(rng));
    };
    for (std::uint32_t v = 1; v < n; ++v) add(std::uniform_int_distribution<std::uint32_t>(0, v - 1)(rng), v);
    std::uniform_int_distribution<std::uint32_t> any(0, static_cast<std::uint32_t>(n - 1));
    while (g.edges.size() < n - 1 + chords) {
        const auto a = any(rng), b = any(rng);
        if (a != b) add(a, b);
    }
    return g;
}

// Sums of w and z around the cycle closed by chord c over the spanning tree (first n-1 edges).
std::pair<double, double> cycle_sums(const Graph& g, const std::vector<double>& w, std::size_t c) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(g.n);
    for (std::size_t e = 0; e + 1 < g.n; ++e) {
        adj[g.edges[e].from].push_back({g.edges[e].to, e});
        adj[g.edges[e].to].push_back({g.edges[e].from, e});
    }
    const std::size_t start = g.edges[c].to, goal = g.edges[c].from;
    std::vector<std::size_t> prev(g.n, SIZE_MAX), via(g.n, 0);
    prev[start] = start;
    std::queue<std::size_t> q;
    q.push(start);
    while (!q.empty()) {
        const auto v = q.front();
        q.pop();
        for (auto [u, e] : adj[v])
            if (prev[u] == SIZE_MAX) {
                prev[u] = v;
                via[u] = e;
                q.push(u);
            }
    }
    double sw = w[c], sz = g.z[c];
    for (std::size_t v = goal; v != start; v = prev[v]) {
        const auto e = via[v];
        const double sign = g.edges[e].from == prev[v] ? 1.0 : -1.0;
        sw += sign * w[e];
        sz += sign * g.z[e];
    }
    return {sw, sz};
}

void smoothing() {
    Timer t;
    std::mt19937_64 rng(7);
    double worst_normal = 0.0, worst_tree = 0.0, worst_cycle = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10 + static_cast<std::size_t>(trial) * 10;
        const auto g = random_graph(rng, n, n / 2 + 1);
        const auto r = harmonic_smooth(g.edges, g.z, g.n);
        worst_normal = std::max(worst_normal, r.normal_residual);
        const auto tree = random_graph(rng, n, 0);
        for (double w : harmonic_smooth(tree.edges, tree.z, tree.n).residual)
            worst_tree = std::max(worst_tree, std::abs(w));
    }
    std::size_t cycles = 0;
    while (cycles < 100) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 200)(rng);
        const auto g = random_graph(rng, n, 5);
        const auto r = harmonic_smooth(g.edges, g.z, g.n);
        for (std::size_t c = n - 1; c < g.edges.size() && cycles < 100; ++c, ++cycles) {
            const auto [sw, sz] = cycle_sums(g, r.residual, c);
            worst_cycle = std::max(worst_cycle, std::abs(sw - sz));
        }
    }
    const bool ok = worst_normal <= kNormalResidual && worst_tree <= kTreeResidual && worst_cycle <= kCycleSum;
    report(7, ok, "smoothing",
           fmt("max normal residual=%.2e", worst_normal) + fmt(" max tree residual=%.2e", worst_tree) +
               fmt(" max |sum w - sum z| over 100 cycles=%.2e", worst_cycle),
           t.seconds());
}

void gauge_refinement() {
    Timer t;
    const auto s = gen_sine(600, 0.0, 6.0);
    const auto fz = factorize(s, {});
    std::vector<double> rot, refl;
    for (double th : fz.theta) {
        rot.push_back(mod1(th + 0.3));
        refl.push_back(mod1(1.0 - th));
    }
    const double tol = 1.0 / (4.0 * 64);
    const bool eq = equivalent(fz.theta, rot, tol) && equivalent(fz.theta, refl, tol);

    const auto x = uniform_grid(201, 0.0, 2.0);
    std::vector<double> half, full, half_f, full_f;
    for (double v : x) {
        half.push_back(mod1(v / 2));
        full.push_back(mod1(v));
        half_f.push_back(mod1(1.0 - half.back()));
        full_f.push_back(mod1(1.0 - full.back()));
    }
    const bool fwd = refines(half, full, kRefineTol).holds, back = refines(full, half, kRefineTol).holds;
    const bool stable = refines(half_f, full, kRefineTol).holds == fwd &&
                        refines(half, full_f, kRefineTol).holds == fwd &&
                        refines(full_f, half, kRefineTol).holds == back &&
                        refines(full, half_f, kRefineTol).holds == back &&
                        equivalent(refl, rot, tol) == eq;
    report(8, eq && fwd && !back && stable, "gauge and refinement",
           std::string("equivalent(rot,refl)=") + (eq ? "true" : "false") +
               " half->full=" + (fwd ? "true" : "false") + " full->half=" + (back ? "true" : "false") +
               " flip-stable=" + (stable ? "yes" : "no"),
           t.seconds());
}

}  // namespace

int main() {
    const std::pair<void (*)(), const char*> steps[] = {
        {periodic_baseline, "periodic baseline"}, {universality_fixture, "universality fixture"},
        {chirp, "chirp"},                         {degenerate_classes, "degenerate classes"},
        {join_fixture, "join"},                   {persistence_oracle, "persistence oracle"},
        {smoothing, "smoothing"},                 {gauge_refinement, "gauge and refinement"},
    };
    int id = 1;
    for (const auto& [fn, name] : steps) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, name, std::string("threw ") + e.what(), 0.0);
        }
        ++id;
    }
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
