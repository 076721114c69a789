#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qpfactor/embedding.hpp"

namespace qpf {

/// Dense symmetric matrix of pairwise distances.
class DistanceMatrix {
public:
    /// Validates symmetry, zero diagonal and nonnegativity.
    DistanceMatrix(std::size_t n, std::vector<double> entries);
    /// Distances between the selected points of a cloud (all points when `subset` is empty).
    static DistanceMatrix from_cloud(const PointCloud& cloud,
                                     std::span<const std::size_t> subset = {});

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    double diameter() const;

private:
    std::size_t n_;
    std::vector<double> d_;
};

struct Simplex {
    std::array<std::uint32_t, 4> vertices{};  // sorted ascending, first dim+1 used
    std::uint8_t dim = 0;
    double diameter = 0.0;

    std::span<const std::uint32_t> verts() const { return {vertices.data(), dim + 1u}; }
};

/// Simplices sorted by (diameter, dimension, lexicographic vertices).
struct Filtration {
    std::size_t vertex_count = 0;
    double rmax = 0.0;
    std::vector<Simplex> simplices;
};

/// Vietoris-Rips complex up to dimension `maxdim` (0..3), truncated at rmax.
Filtration rips_filtration(const DistanceMatrix& dist, double rmax, int maxdim = 2);

bool filtration_less(const Simplex& a, const Simplex& b);

struct CocycleEntry {
    std::uint32_t u = 0, v = 0;  // u < v; value is the cochain on the edge oriented u -> v
    std::uint32_t value = 0;     // in Z/p
};

struct Cocycle {
    std::vector<CocycleEntry> entries;  // sorted by (u, v), zero values omitted
    double scale = 0.0;                 // filtration radius the cocycle is valid at
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Bar {
    int dim = 0;
    double birth = 0.0;
    double death = kInfinity;
    Cocycle cocycle;  // H1 only

    bool infinite() const { return death == kInfinity; }
    double persistence() const { return death - birth; }
};

struct Barcode {
    int prime = 47;
    double rmax = 0.0;
    std::vector<Bar> h0;  // by death, infinite bars last
    std::vector<Bar> h1;  // by birth simplex in filtration order
};

bool is_prime(int p);

/// Persistent cohomology in degrees 0 and 1 with Z/p coefficients. Degree 1 reduces the
/// coboundary matrix column by column in reverse filtration order, skipping columns cleared
/// by the degree-0 pairing. Every H1 bar carries a representative cocycle valid at the bar
/// midpoint (finite bars) or at rmax (infinite bars). Zero-length bars are not reported.
Barcode compute_persistence(const Filtration& filtration, int prime = 47);

/// Index into `barcode.h1` of the most persistent bar (infinite beats finite, then smaller birth).
std::optional<std::size_t> dominant_h1(const Barcode& barcode);

/// Triangles whose coboundary value does not vanish, restricted to diameter <= scale.
std::size_t cocycle_violations(const Cocycle& cocycle, const Filtration& filtration, int prime);

void save_barcode_csv(const Barcode& barcode, const std::filesystem::path& path);
void save_cocycle_csv(const Cocycle& cocycle, const std::filesystem::path& path);

}  // namespace qpf
