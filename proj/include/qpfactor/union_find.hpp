#pragma once

#include <numeric>
#include <type_traits>
#include <vector>

namespace qpf {

template <typename T, typename = std::enable_if_t<std::is_integral_v<T>>>
class UnionFind {
public:
    explicit UnionFind(std::size_t size) : parent_(size), rank_(size, 0) {
        std::iota(parent_.begin(), parent_.end(), T{0});
    }

    T find(T x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Union by rank; on ties the smaller root survives so roots stay deterministic.
    bool merge(T x, T y) {
        T rx = find(x), ry = find(y);
        if (rx == ry) return false;
        if (rank_[rx] < rank_[ry] || (rank_[rx] == rank_[ry] && ry < rx)) std::swap(rx, ry);
        parent_[ry] = rx;
        if (rank_[rx] == rank_[ry]) ++rank_[rx];
        return true;
    }

    std::size_t size() const { return parent_.size(); }

private:
    std::vector<T> parent_;
    std::vector<T> rank_;
};

}  // namespace qpf
