#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "moran/error.hpp"

namespace moran {

/// Root of a non-increasing function on [lo, hi] with f(lo) >= 0 >= f(hi).
/// Halves the bracket until its width is at most `tol` or it cannot be split
/// further in double precision. Returns the midpoint of the final bracket,
/// or an endpoint hit exactly.
template <class F>
double bisect_decreasing(F&& f, double lo, double hi, double tol = 0.0) {
    if (f(lo) <= 0.0) return lo;
    if (f(hi) >= 0.0) return hi;
    for (int it = 0; it < 2000; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi || hi - lo <= tol) break;
        const double v = f(mid);
        if (v == 0.0) return mid;
        if (v > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo + 0.5 * (hi - lo);
}

/// Smallest hi = start * 2^k with f(hi) <= 0, for a non-increasing f that is
/// eventually non-positive.
template <class F>
double expand_upper_bracket(F&& f, double start = 1.0) {
    double hi = start;
    for (int k = 0; k < 1100; ++k) {
        if (f(hi) <= 0.0) return hi;
        hi *= 2.0;
    }
    throw Error(ErrorCode::OverflowGuard, "root bracket could not be closed");
}

inline double log_add_exp(double a, double b) noexcept {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

/// Round-trip-safe decimal text (17 significant digits).
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace moran
