#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qpfactor/embedding.hpp"
#include "qpfactor/persistence.hpp"

namespace qpf {

struct OrientedEdge {
    std::uint32_t from = 0, to = 0;
};

/// Integer-valued 1-cochain on oriented edges.
struct IntegerCocycle {
    std::vector<OrientedEdge> edges;
    std::vector<std::int64_t> values;
    double scale = 0.0;
};

/// Symmetric representative of v in Z/p, in (-p/2, p/2).
std::int64_t lift_value(std::uint32_t v, int prime);

/// Lifts a Z/p cocycle to Z and checks the cocycle condition over Z on every triangle of
/// `filtration` at the cocycle's scale; throws lift-failure otherwise.
IntegerCocycle lift_to_integers(const Cocycle& cocycle, int prime, const Filtration& filtration);

struct SmoothResult {
    std::vector<double> f;         // per vertex, f(anchor) = 0
    std::vector<double> residual;  // per edge: z - (f_to - f_from)
    std::size_t iterations = 0;
    double normal_residual = 0.0;  // max-norm of the Laplacian gradient
};

/// Least-squares fit of f to z: minimises sum (z_e - (f_to - f_from))^2 with f(anchor) = 0,
/// anchor = vertex 0, by conjugate gradients on the graph Laplacian. The graph on
/// `vertex_count` vertices must be connected; throws invalid-argument otherwise.
SmoothResult harmonic_smooth(const std::vector<OrientedEdge>& edges, const std::vector<double>& z,
                             std::size_t vertex_count, double tol = 1e-10);

/// Connected component label per vertex; labels are numbered by lowest member vertex.
std::vector<std::size_t> graph_components(const std::vector<OrientedEdge>& edges,
                                          std::size_t vertex_count);

struct Gauge {
    std::size_t anchor = 0;  // landmark vertex pinned to phase 0
    int sign = 1;            // +1 as computed, -1 when the cocycle was negated
};

struct PhaseAssignment {
    std::vector<double> theta;  // in [0, 1), one per assigned sample
    double scale = 0.0;
    Gauge gauge;
};

/// Nearest landmark (Euclidean, ties to the lower landmark position) for every cloud point.
/// Throws coverage-error when a point is farther than `max_distance` from all landmarks.
std::vector<std::size_t> nearest_landmarks(const PointCloud& cloud,
                                           const std::vector<std::size_t>& landmarks,
                                           double max_distance);

/// theta_i = f(vertex of sample i) mod 1.
PhaseAssignment assign_phase(const std::vector<double>& f, const std::vector<std::size_t>& vertex_of_sample,
                             double scale, Gauge gauge = {});

/// Sum of increments wrapped into (-1/2, 1/2].
double winding(const std::vector<double>& theta);

}  // namespace qpf
