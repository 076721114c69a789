#pragma once

#include <cmath>

// Helpers for values on the circle R/Z, stored as reals in [0, 1).
namespace qpf {

inline double mod1(double x) {
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

/// Wraps a phase difference into (-1/2, 1/2].
inline double wrap_half(double d) { return d - std::ceil(d - 0.5); }

inline double circdist(double a, double b) { return std::abs(wrap_half(a - b)); }

}  // namespace qpf
