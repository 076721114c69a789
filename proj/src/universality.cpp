#include "qpfactor/universality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qpfactor/circle.hpp"
#include "qpfactor/circular.hpp"
#include "qpfactor/error.hpp"
#include "qpfactor/union_find.hpp"

namespace qpf {

RefinementResult refines(const std::vector<double>& theta_from, const std::vector<double>& theta_to,
                         double tol, double lipschitz) {
    require(theta_from.size() == theta_to.size(), "phase sequences must have the same length");
    require(tol > 0.0, "refinement tolerance must be positive");
    require(lipschitz >= 1.0, "Lipschitz slack must be at least 1");
    const std::size_t n = theta_from.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (circdist(theta_from[i], theta_from[j]) < tol &&
                !(circdist(theta_to[i], theta_to[j]) < lipschitz * tol))
                return {false, std::make_pair(i, j)};
    return {};
}

bool equivalent(const std::vector<double>& theta_a, const std::vector<double>& theta_b, double tol) {
    return refines(theta_a, theta_b, tol, 2.0).holds && refines(theta_b, theta_a, tol, 2.0).holds;
}

std::size_t phase_bin(double theta, std::size_t bins) {
    return std::min(static_cast<std::size_t>(mod1(theta) * static_cast<double>(bins)), bins - 1);
}

QuotientPartition join(const std::vector<double>& theta1, const std::vector<double>& theta2,
                       std::size_t bins) {
    require(theta1.size() == theta2.size(), "phase sequences must have the same length");
    require(bins >= 2, "join needs at least 2 bins per factor");
    const std::size_t n = theta1.size();
    QuotientPartition q;
    if (n == 0) return q;

    UnionFind<std::size_t> uf(2 * bins);
    for (std::size_t i = 0; i < n; ++i) uf.merge(phase_bin(theta1[i], bins), bins + phase_bin(theta2[i], bins));

    std::map<std::size_t, std::size_t> root_label;
    q.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = uf.find(phase_bin(theta1[i], bins));
        auto [it, inserted] = root_label.emplace(r, root_label.size());
        q.labels[i] = it->second;
    }
    q.class_count = root_label.size();

    // Quotient graph from domain-consecutive samples; net traversals per edge.
    std::map<std::pair<std::size_t, std::size_t>, long long> net;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t a = q.labels[i - 1], b = q.labels[i];
        if (a == b) continue;
        net[{std::min(a, b), std::max(a, b)}] += a < b ? 1 : -1;
    }
    for (const auto& [e, _] : net) q.quotient_edges.push_back(e);

    std::vector<OrientedEdge> edges;
    for (const auto& [a, b] : q.quotient_edges)
        edges.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
    const auto comp = graph_components(edges, q.class_count);
    const std::size_t ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
    q.cycle_rank = q.quotient_edges.size() + ncomp - q.class_count;
    q.class_phase.assign(q.class_count, 0.0);
    if (q.cycle_rank == 0) return q;

    // Spanning forest by union-find in edge order; among the remaining (cycle-closing) edges,
    // the one the sample path crosses most often on net carries a unit cocycle.
    UnionFind<std::size_t> forest(q.class_count);
    std::size_t chosen = edges.size();
    long long best = -1;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (forest.merge(edges[k].from, edges[k].to)) continue;
        const long long crossings = std::llabs(net[q.quotient_edges[k]]);
        if (crossings > best) {
            best = crossings;
            chosen = k;
        }
    }
    if (best <= 0) return q;

    // Smooth the unit cocycle on the component containing the chosen edge.
    const std::size_t c = comp[edges[chosen].from];
    std::vector<std::size_t> local(q.class_count, 0), members;
    for (std::size_t v = 0; v < q.class_count; ++v)
        if (comp[v] == c) {
            local[v] = members.size();
            members.push_back(v);
        }
    std::vector<OrientedEdge> ce;
    std::vector<double> z;
    for (std::size_t k = 0; k < edges.size(); ++k)
        if (comp[edges[k].from] == c) {
            ce.push_back({static_cast<std::uint32_t>(local[edges[k].from]),
                          static_cast<std::uint32_t>(local[edges[k].to])});
            z.push_back(k == chosen ? 1.0 : 0.0);
        }
    const SmoothResult sr = harmonic_smooth(ce, z, members.size());
    std::vector<double> seq(n);
    for (int sign : {1, -1}) {
        for (std::size_t i = 0; i < members.size(); ++i) q.class_phase[members[i]] = mod1(sign * sr.f[i]);
        for (std::size_t i = 0; i < n; ++i) seq[i] = q.class_phase[q.labels[i]];
        q.winding_estimate = winding(seq);
        if (q.winding_estimate >= 0.0) break;  // orientation gauge: nonnegative winding
    }
    return q;
}

}  // namespace qpf
