#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "qpfactor/factorize.hpp"

namespace qpf {

struct RefinementResult {
    bool holds = true;
    std::optional<std::pair<std::size_t, std::size_t>> witness;  // first failing pair (i < j)
};

/// Discrete form of "phi_to factors through phi_from": whenever two samples share a
/// `from` phase to within tol, their `to` phases agree to within K * tol. This is a
/// Lipschitz-K proxy for the factoring map at resolution tol, not a smoothness claim.
RefinementResult refines(const std::vector<double>& theta_from, const std::vector<double>& theta_to,
                         double tol, double lipschitz = 2.0);

/// Mutual refinement at Lipschitz slack 2.
bool equivalent(const std::vector<double>& theta_a, const std::vector<double>& theta_b, double tol);

/// Discrete quotient (C1 + C2)/~ of two phase maps sampled on the same points.
struct QuotientPartition {
    std::vector<std::size_t> labels;  // per sample, numbered by first appearance
    std::size_t class_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> quotient_edges;  // a < b, sorted
    std::size_t cycle_rank = 0;
    double winding_estimate = 0.0;
    std::vector<double> class_phase;  // circular coordinate of each class
};

/// Quantises both phases into `bins` circular bins, unions bin1(i) with bin2(i) for every
/// sample and labels samples by component. The quotient graph joins the classes of
/// domain-consecutive samples; the winding estimate is the winding of a circular coordinate
/// on that graph along the sample order.
QuotientPartition join(const std::vector<double>& theta1, const std::vector<double>& theta2,
                       std::size_t bins = 60);

std::size_t phase_bin(double theta, std::size_t bins);

}  // namespace qpf
