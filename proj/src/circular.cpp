#include "qpfactor/circular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "qpfactor/circle.hpp"
#include "qpfactor/error.hpp"
#include "qpfactor/union_find.hpp"

namespace qpf {

std::int64_t lift_value(std::uint32_t v, int prime) {
    const auto p = static_cast<std::int64_t>(prime);
    const auto x = static_cast<std::int64_t>(v) % p;
    return 2 * x > p ? x - p : x;
}

IntegerCocycle lift_to_integers(const Cocycle& cocycle, int prime, const Filtration& filtration) {
    require(is_prime(prime), "coefficient modulus must be prime");
    IntegerCocycle out;
    out.scale = cocycle.scale;
    std::unordered_map<std::uint64_t, std::int64_t> value;
    for (const auto& e : cocycle.entries) {
        const auto z = lift_value(e.value, prime);
        if (z == 0) continue;
        out.edges.push_back({e.u, e.v});
        out.values.push_back(z);
        value[(static_cast<std::uint64_t>(e.u) << 32) | e.v] = z;
    }
    auto at = [&](std::uint32_t u, std::uint32_t v) -> std::int64_t {
        auto it = value.find((static_cast<std::uint64_t>(u) << 32) | v);
        return it == value.end() ? 0 : it->second;
    };
    for (const auto& s : filtration.simplices) {
        if (s.dim != 2 || s.diameter > cocycle.scale) continue;
        const auto& t = s.vertices;
        if (at(t[1], t[2]) - at(t[0], t[2]) + at(t[0], t[1]) != 0)
            fail(ErrorKind::LiftFailure, "lifted cocycle is not closed on triangle (" +
                                             std::to_string(t[0]) + "," + std::to_string(t[1]) + "," +
                                             std::to_string(t[2]) + "); try a larger prime");
    }
    return out;
}

std::vector<std::size_t> graph_components(const std::vector<OrientedEdge>& edges,
                                          std::size_t vertex_count) {
    UnionFind<std::size_t> uf(vertex_count);
    for (const auto& e : edges) uf.merge(e.from, e.to);
    std::vector<std::size_t> label(vertex_count), root_label(vertex_count, vertex_count);
    std::size_t next = 0;
    for (std::size_t v = 0; v < vertex_count; ++v) {
        const std::size_t r = uf.find(v);
        if (root_label[r] == vertex_count) root_label[r] = next++;
        label[v] = root_label[r];
    }
    return label;
}

SmoothResult harmonic_smooth(const std::vector<OrientedEdge>& edges, const std::vector<double>& z,
                             std::size_t vertex_count, double tol) {
    require(edges.size() == z.size(), "one cocycle value per edge required");
    require(vertex_count >= 1, "graph needs at least one vertex");
    for (const auto& e : edges)
        require(e.from < vertex_count && e.to < vertex_count && e.from != e.to, "bad edge endpoint");
    const auto comp = graph_components(edges, vertex_count);
    require(std::all_of(comp.begin(), comp.end(), [](std::size_t c) { return c == 0; }),
            "harmonic smoothing needs a connected graph");

    const std::size_t n = vertex_count;
    std::vector<double> degree(n, 0.0), rhs(n, 0.0);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        degree[edges[k].from] += 1.0;
        degree[edges[k].to] += 1.0;
        rhs[edges[k].to] += z[k];
        rhs[edges[k].from] -= z[k];
    }
    // Laplacian restricted to non-anchor vertices (anchor = 0 held at zero).
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t v = 0; v < n; ++v) y[v] = degree[v] * x[v];
        for (const auto& e : edges) {
            y[e.from] -= x[e.to];
            y[e.to] -= x[e.from];
        }
        y[0] = 0.0;
    };
    auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 1; i < n; ++i) s += a[i] * b[i];
        return s;
    };

    // Jacobi-preconditioned conjugate gradients.
    std::vector<double> f(n, 0.0), r = rhs, zr(n, 0.0), dir(n, 0.0), q(n, 0.0);
    r[0] = 0.0;
    const double stop = tol;
    for (std::size_t i = 1; i < n; ++i) zr[i] = r[i] / degree[i];
    dir = zr;
    double rz = dot(r, zr);
    std::size_t it = 0;
    const std::size_t max_it = 10 * n;
    while (it < max_it && std::sqrt(dot(r, r)) > stop) {
        apply(dir, q);
        const double alpha = rz / dot(dir, q);
        for (std::size_t i = 1; i < n; ++i) {
            f[i] += alpha * dir[i];
            r[i] -= alpha * q[i];
        }
        for (std::size_t i = 1; i < n; ++i) zr[i] = r[i] / degree[i];
        const double rz_next = dot(r, zr);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 1; i < n; ++i) dir[i] = zr[i] + beta * dir[i];
        ++it;
    }

    SmoothResult res;
    res.f = std::move(f);
    res.iterations = it;
    res.residual.resize(edges.size());
    std::vector<double> grad(n, 0.0);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& e = edges[k];
        const double w = z[k] - (res.f[e.to] - res.f[e.from]);
        res.residual[k] = w;
        grad[e.to] += w;
        grad[e.from] -= w;
    }
    for (double g : grad) res.normal_residual = std::max(res.normal_residual, std::abs(g));
    return res;
}

std::vector<std::size_t> nearest_landmarks(const PointCloud& cloud,
                                           const std::vector<std::size_t>& landmarks,
                                           double max_distance) {
    require(!landmarks.empty(), "at least one landmark required");
    std::vector<std::size_t> out(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t l = 0; l < landmarks.size(); ++l) {
            const double d = distance(cloud.point(i), cloud.point(landmarks[l]));
            if (d < best) {
                best = d;
                arg = l;
            }
        }
        if (best > max_distance)
            fail(ErrorKind::CoverageError, "sample " + std::to_string(cloud.source_index[i]) +
                                               " is farther than the working scale from every landmark");
        out[i] = arg;
    }
    return out;
}

PhaseAssignment assign_phase(const std::vector<double>& f, const std::vector<std::size_t>& vertex_of_sample,
                             double scale, Gauge gauge) {
    PhaseAssignment pa;
    pa.scale = scale;
    pa.gauge = gauge;
    pa.theta.reserve(vertex_of_sample.size());
    for (std::size_t v : vertex_of_sample) {
        require(v < f.size(), "sample mapped to unknown vertex");
        pa.theta.push_back(mod1(f[v]));
    }
    return pa;
}

double winding(const std::vector<double>& theta) {
    double total = 0.0;
    for (std::size_t i = 1; i < theta.size(); ++i) total += wrap_half(theta[i] - theta[i - 1]);
    return total;
}

}  // namespace qpf
