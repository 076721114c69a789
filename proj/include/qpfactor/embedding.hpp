#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "qpfactor/signal.hpp"

namespace qpf {

/// Points in R^d, each tagged with the index of the sample it was built from.
struct PointCloud {
    std::size_t dim = 0;
    std::vector<double> coords;              // size() * dim, row-major
    std::vector<std::size_t> source_index;   // strictly increasing

    std::size_t size() const { return source_index.size(); }
    std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
};

double distance(std::span<const double> a, std::span<const double> b);

/// Positive, strictly increasing delay offsets in domain units.
class OffsetSet {
public:
    explicit OffsetSet(std::vector<double> offsets);
    /// Offsets given as whole numbers of grid steps.
    static OffsetSet from_steps(const std::vector<std::size_t>& steps, double step);

    const std::vector<double>& offsets() const { return offsets_; }
    std::size_t size() const { return offsets_.size(); }
    double largest() const { return offsets_.back(); }

private:
    std::vector<double> offsets_;
};

/// phi(x) = (u(x), u(x + v_1), ..., u(x + v_k)); circle values enter as (cos, sin) pairs.
/// Throws invalid-argument when an offset is not a whole multiple of the grid step and
/// empty-embedding when no base sample has all of its delayed partners in the domain.
PointCloud delay_embed(const SampledSignal& signal, const OffsetSet& offsets);

/// Same as delay_embed with the delays pointing backwards: (u(x), u(x - v_1), ..., u(x - v_k)).
PointCloud delay_embed_backward(const SampledSignal& signal, const OffsetSet& offsets);

/// Number of delays for which a generic delay map of an n-dimensional domain is an immersion.
int takens_dimension(int domain_dim);

/// (u, u', ..., u^(order)) from central differences; samples lacking a full stencil are dropped.
PointCloud derivative_embed(const SampledSignal& signal, int order);

/// Greedy farthest-point (maxmin) selection starting from `seed`. Ties go to the lowest index.
std::vector<std::size_t> maxmin_landmarks(const PointCloud& cloud, std::size_t count,
                                          std::size_t seed = 0);

/// Default delays: k = takens_dimension(1) offsets at multiples of a base lag taken from the
/// first zero crossing of the mean-removed autocorrelation.
OffsetSet default_offsets(const SampledSignal& signal);

/// First lag (in grid steps) where the mean-removed autocorrelation drops to zero or below.
std::size_t autocorrelation_zero_lag(const SampledSignal& signal);

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace qpf
