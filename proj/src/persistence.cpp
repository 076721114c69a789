#include "qpfactor/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "qpfactor/error.hpp"
#include "qpfactor/union_find.hpp"

namespace qpf {

namespace {

// Sparse column over Z/p: (row, coefficient) sorted by row.
struct Entry {
    std::uint32_t row;
    std::uint32_t coef;
};
using Column = std::vector<Entry>;

// a - factor * b
Column axpy(const Column& a, const Column& b, std::uint64_t factor, std::uint32_t p) {
    Column out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    auto scaled = [&](std::uint32_t c) {
        return static_cast<std::uint32_t>((p - (factor * c) % p) % p);
    };
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].row < b[j].row)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].row < a[i].row) {
            if (auto c = scaled(b[j].coef)) out.push_back({b[j].row, c});
            ++j;
        } else {
            if (auto c = (a[i].coef + scaled(b[j].coef)) % p) out.push_back({a[i].row, c});
            ++i;
            ++j;
        }
    }
    return out;
}

std::vector<std::uint32_t> inverse_table(std::uint32_t p) {
    std::vector<std::uint32_t> inv(p, 0);
    inv[1] = 1;
    for (std::uint32_t a = 2; a < p; ++a)
        inv[a] = static_cast<std::uint32_t>(p - (static_cast<std::uint64_t>(p / a) * inv[p % a]) % p);
    return inv;
}

std::uint64_t edge_key(std::uint32_t u, std::uint32_t v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

std::uint64_t triangle_key(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint64_t n) {
    return (static_cast<std::uint64_t>(a) * n + b) * n + c;
}

}  // namespace

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), d_(std::move(entries)) {
    require(d_.size() == n_ * n_, "distance matrix has wrong size");
    for (std::size_t i = 0; i < n_; ++i) {
        require((*this)(i, i) == 0.0, "distance matrix diagonal must be zero");
        for (std::size_t j = i + 1; j < n_; ++j) {
            require((*this)(i, j) == (*this)(j, i), "distance matrix must be symmetric");
            require((*this)(i, j) >= 0.0, "distances must be nonnegative");
        }
    }
}

DistanceMatrix DistanceMatrix::from_cloud(const PointCloud& cloud, std::span<const std::size_t> subset) {
    std::vector<std::size_t> all;
    if (subset.empty()) {
        all.resize(cloud.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        subset = all;
    }
    const std::size_t n = subset.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d[i * n + j] = d[j * n + i] = distance(cloud.point(subset[i]), cloud.point(subset[j]));
    return DistanceMatrix(n, std::move(d));
}

double DistanceMatrix::diameter() const { return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end()); }

bool filtration_less(const Simplex& a, const Simplex& b) {
    if (a.diameter != b.diameter) return a.diameter < b.diameter;
    if (a.dim != b.dim) return a.dim < b.dim;
    return std::lexicographical_compare(a.vertices.begin(), a.vertices.begin() + a.dim + 1,
                                        b.vertices.begin(), b.vertices.begin() + b.dim + 1);
}

Filtration rips_filtration(const DistanceMatrix& dist, double rmax, int maxdim) {
    require(maxdim >= 0 && maxdim <= 3, "rips maxdim must be in 0..3");
    require(rmax >= 0.0, "rmax must be nonnegative");
    const auto n = static_cast<std::uint32_t>(dist.size());
    Filtration f;
    f.vertex_count = n;
    f.rmax = rmax;

    std::vector<std::vector<std::uint32_t>> up(n);  // neighbours with larger index
    for (std::uint32_t v = 0; v < n; ++v) {
        f.simplices.push_back({{v, 0, 0, 0}, 0, 0.0});
        for (std::uint32_t w = v + 1; w < n; ++w)
            if (dist(v, w) <= rmax) up[v].push_back(w);
    }
    if (maxdim >= 1) {
        std::vector<std::uint32_t> common, common2;
        for (std::uint32_t a = 0; a < n; ++a) {
            for (std::uint32_t b : up[a]) {
                const double dab = dist(a, b);
                f.simplices.push_back({{a, b, 0, 0}, 1, dab});
                if (maxdim < 2) continue;
                common.clear();
                std::set_intersection(up[a].begin(), up[a].end(), up[b].begin(), up[b].end(),
                                      std::back_inserter(common));
                for (std::uint32_t c : common) {
                    const double dabc = std::max({dab, dist(a, c), dist(b, c)});
                    f.simplices.push_back({{a, b, c, 0}, 2, dabc});
                    if (maxdim < 3) continue;
                    common2.clear();
                    std::set_intersection(common.begin(), common.end(), up[c].begin(), up[c].end(),
                                          std::back_inserter(common2));
                    for (std::uint32_t e : common2)
                        f.simplices.push_back(
                            {{a, b, c, e}, 3, std::max({dabc, dist(a, e), dist(b, e), dist(c, e)})});
                }
            }
        }
    }
    std::sort(f.simplices.begin(), f.simplices.end(), filtration_less);
    return f;
}

bool is_prime(int p) {
    if (p < 2) return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

Barcode compute_persistence(const Filtration& filtration, int prime) {
    require(is_prime(prime), "coefficient modulus " + std::to_string(prime) + " is not prime");
    const auto p = static_cast<std::uint32_t>(prime);
    const auto n = static_cast<std::uint32_t>(filtration.vertex_count);
    const auto inv = inverse_table(p);

    std::vector<const Simplex*> edges, triangles;
    for (const auto& s : filtration.simplices) {
        if (s.dim == 1) edges.push_back(&s);
        else if (s.dim == 2) triangles.push_back(&s);
    }

    std::unordered_map<std::uint64_t, std::uint32_t> tri_rank;
    tri_rank.reserve(triangles.size());
    for (std::uint32_t r = 0; r < triangles.size(); ++r) {
        const auto& v = triangles[r]->vertices;
        tri_rank.emplace(triangle_key(v[0], v[1], v[2], n), r);
    }
    std::vector<std::vector<std::uint32_t>> nbr(n);
    for (const auto* e : edges) {
        nbr[e->vertices[0]].push_back(e->vertices[1]);
        nbr[e->vertices[1]].push_back(e->vertices[0]);
    }
    for (auto& l : nbr) std::sort(l.begin(), l.end());

    Barcode code;
    code.prime = prime;
    code.rmax = filtration.rmax;

    // Degree 0 by union-find; merging edges are exactly the columns cleared in degree 1.
    std::vector<bool> cleared(edges.size(), false);
    {
        UnionFind<std::uint32_t> uf(n);
        for (std::size_t r = 0; r < edges.size(); ++r) {
            const auto u = edges[r]->vertices[0], v = edges[r]->vertices[1];
            if (uf.find(u) == uf.find(v)) continue;
            uf.merge(u, v);
            cleared[r] = true;
            if (edges[r]->diameter > 0.0) code.h0.push_back({0, 0.0, edges[r]->diameter, {}});
        }
        for (std::uint32_t v = 0; v < n; ++v)
            if (uf.find(v) == v) code.h0.push_back({0, 0.0, kInfinity, {}});
    }

    // Degree 1: coboundary columns of edges, processed in reverse filtration order.
    constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> pivot_owner(triangles.size(), kNone);
    std::unordered_map<std::uint32_t, std::pair<Column, Column>> reduced;  // edge -> (R, V)
    struct Found {
        std::uint32_t edge;
        double death;
        Column v;
    };
    std::vector<Found> found;
    std::vector<std::uint32_t> common;

    for (std::size_t idx = edges.size(); idx-- > 0;) {
        if (cleared[idx]) continue;
        const auto a = edges[idx]->vertices[0], b = edges[idx]->vertices[1];
        common.clear();
        std::set_intersection(nbr[a].begin(), nbr[a].end(), nbr[b].begin(), nbr[b].end(),
                              std::back_inserter(common));
        Column col;
        col.reserve(common.size());
        for (std::uint32_t c : common) {
            std::array<std::uint32_t, 3> t{a, b, c};
            std::sort(t.begin(), t.end());
            auto it = tri_rank.find(triangle_key(t[0], t[1], t[2], n));
            if (it == tri_rank.end()) continue;
            // boundary of [t0,t1,t2] = [t1,t2] - [t0,t2] + [t0,t1]
            const std::uint32_t coef = (c == t[1]) ? p - 1 : 1;
            col.push_back({it->second, coef});
        }
        std::sort(col.begin(), col.end(), [](const Entry& x, const Entry& y) { return x.row < y.row; });
        Column vcol{{static_cast<std::uint32_t>(idx), 1}};

        while (!col.empty()) {
            const std::uint32_t piv = col.front().row;
            const std::uint32_t owner = pivot_owner[piv];
            if (owner == kNone) break;
            const auto& [rk, vk] = reduced.at(owner);
            const std::uint64_t factor =
                static_cast<std::uint64_t>(col.front().coef) * inv[rk.front().coef] % p;
            col = axpy(col, rk, factor, p);
            vcol = axpy(vcol, vk, factor, p);
        }
        if (col.empty()) {
            found.push_back({static_cast<std::uint32_t>(idx), kInfinity, std::move(vcol)});
        } else {
            const std::uint32_t piv = col.front().row;
            pivot_owner[piv] = static_cast<std::uint32_t>(idx);
            const double death = triangles[piv]->diameter;
            if (death > edges[idx]->diameter) found.push_back({static_cast<std::uint32_t>(idx), death, vcol});
            reduced.emplace(static_cast<std::uint32_t>(idx), std::make_pair(std::move(col), std::move(vcol)));
        }
    }

    std::sort(found.begin(), found.end(), [](const Found& x, const Found& y) { return x.edge < y.edge; });
    for (auto& fd : found) {
        Bar bar{1, edges[fd.edge]->diameter, fd.death, {}};
        bar.cocycle.scale = bar.infinite() ? filtration.rmax : 0.5 * (bar.birth + bar.death);
        for (const auto& e : fd.v) {
            const Simplex& s = *edges[e.row];
            if (s.diameter <= bar.cocycle.scale)
                bar.cocycle.entries.push_back({s.vertices[0], s.vertices[1], e.coef});
        }
        std::sort(bar.cocycle.entries.begin(), bar.cocycle.entries.end(),
                  [](const CocycleEntry& x, const CocycleEntry& y) {
                      return edge_key(x.u, x.v) < edge_key(y.u, y.v);
                  });
        code.h1.push_back(std::move(bar));
    }
    return code;
}

std::optional<std::size_t> dominant_h1(const Barcode& barcode) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < barcode.h1.size(); ++i) {
        if (!best) {
            best = i;
            continue;
        }
        const Bar& a = barcode.h1[i];
        const Bar& b = barcode.h1[*best];
        bool better;
        if (a.infinite() != b.infinite()) better = a.infinite();
        else if (!a.infinite() && a.persistence() != b.persistence()) better = a.persistence() > b.persistence();
        else better = a.birth < b.birth;
        if (better) best = i;
    }
    return best;
}

std::size_t cocycle_violations(const Cocycle& cocycle, const Filtration& filtration, int prime) {
    std::unordered_map<std::uint64_t, std::uint32_t> value;
    for (const auto& e : cocycle.entries) value[edge_key(e.u, e.v)] = e.value;
    auto at = [&](std::uint32_t u, std::uint32_t v) -> std::int64_t {
        auto it = value.find(edge_key(u, v));
        return it == value.end() ? 0 : it->second;
    };
    std::size_t bad = 0;
    for (const auto& s : filtration.simplices) {
        if (s.dim != 2 || s.diameter > cocycle.scale) continue;
        const auto& v = s.vertices;
        const std::int64_t d = at(v[1], v[2]) - at(v[0], v[2]) + at(v[0], v[1]);
        if (((d % prime) + prime) % prime != 0) ++bad;
    }
    return bad;
}

void save_barcode_csv(const Barcode& barcode, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out.precision(17);
    out << "dim,birth,death\n";
    for (const auto* bars : {&barcode.h0, &barcode.h1})
        for (const auto& b : *bars) {
            out << b.dim << ',' << b.birth << ',';
            if (b.infinite()) out << "inf";
            else out << b.death;
            out << '\n';
        }
}

void save_cocycle_csv(const Cocycle& cocycle, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out << "edge_u,edge_v,value\n";
    for (const auto& e : cocycle.entries) out << e.u << ',' << e.v << ',' << e.value << '\n';
}

}  // namespace qpf
