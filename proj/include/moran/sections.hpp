#pragma once

// Tree sections: given a start level N and a relative scale x, count the
// descendants sigma of a level-N interval with |sigma| <= x < |parent(sigma)|
// (relative to the level-N interval). In the 1-variable model the count does
// not depend on which level-N interval is chosen.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "moran/error.hpp"
#include "moran/realization.hpp"

namespace moran {

namespace detail {

inline double stop_slack(double log_x) { return 1e-12 * std::max(1.0, std::fabs(log_x)); }

}  // namespace detail

/// Exact count by depth-first search. Throws EnumerationCapExceeded after
/// `node_cap` visited nodes and DepthExceeded if a branch outlives the realization.
inline double section_count_exhaustive(const MoranRealization& real, std::size_t start, double log_x,
                                       std::uint64_t node_cap = kDefaultEnumerationCap) {
    if (log_x >= 0.0) return 1.0;
    const double stop = log_x + detail::stop_slack(log_x);
    const auto K = static_cast<std::size_t>(real.K());
    struct Frame {
        std::size_t level;
        double log_len;
    };
    std::vector<Frame> stack{{start, 0.0}};
    std::uint64_t visited = 0, count = 0;
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.level >= real.depth())
            throw Error(ErrorCode::DepthExceeded, "section below level " + std::to_string(start) +
                                                      " needs more than " + std::to_string(real.depth()) + " levels");
        for (std::size_t j = 0; j < K; ++j) {
            if (++visited > node_cap)
                throw Error(ErrorCode::EnumerationCapExceeded,
                            "section count visited more than " + std::to_string(node_cap) + " nodes");
            const double ll = f.log_len + real.log_ratio(f.level + 1, j);
            if (ll <= stop)
                ++count;
            else
                stack.push_back({f.level + 1, ll});
        }
    }
    return static_cast<double>(count);
}

namespace detail {

inline long long bin_step(const MoranRealization& real, std::size_t level, std::size_t j, double bin_width) {
    return std::max(1LL, std::llround(-real.log_ratio(level, j) / bin_width));
}

/// Counts root-to-stop paths whose summed bin steps first reach `stop_bin`.
inline double binned_paths(const MoranRealization& real, std::size_t start, long long stop_bin, double bin_width) {
    if (stop_bin <= 0) return 1.0;
    const auto bins = static_cast<std::size_t>(stop_bin);
    const auto K = static_cast<std::size_t>(real.K());
    std::vector<double> cur(bins, 0.0), next(bins, 0.0);
    cur[0] = 1.0;
    std::size_t lo = 0, hi = 0;  // occupied bin range in cur
    double count = 0.0;
    bool active = true;
    std::vector<long long> step(K);
    for (std::size_t level = start; active; ++level) {
        if (level >= real.depth())
            throw Error(ErrorCode::DepthExceeded, "section below level " + std::to_string(start) +
                                                      " needs more than " + std::to_string(real.depth()) + " levels");
        for (std::size_t j = 0; j < K; ++j) step[j] = bin_step(real, level + 1, j, bin_width);
        std::size_t nlo = bins, nhi = 0;
        active = false;
        for (std::size_t b = lo; b <= hi; ++b) {
            const double c = cur[b];
            if (c == 0.0) continue;
            cur[b] = 0.0;
            for (std::size_t j = 0; j < K; ++j) {
                const long long nb = static_cast<long long>(b) + step[j];
                if (nb >= stop_bin) {
                    count += c;
                } else {
                    const auto u = static_cast<std::size_t>(nb);
                    next[u] += c;
                    nlo = std::min(nlo, u);
                    nhi = std::max(nhi, u);
                    active = true;
                }
            }
        }
        std::swap(cur, next);
        lo = nlo;
        hi = nhi;
        if (!std::isfinite(count)) throw Error(ErrorCode::OverflowGuard, "section count overflows a double");
    }
    return count;
}

inline void require_bin_width(double bin_width) {
    if (!(bin_width > 0.0)) throw Error(ErrorCode::DomainError, "bin width must be positive");
}

}  // namespace detail

/// Approximate count by dynamic programming over log-length bins of width
/// `bin_width`. Each step rounds to the nearest bin, so a path of n levels
/// carries at most n * bin_width / 2 error in log-length.
inline double section_count_binned(const MoranRealization& real, std::size_t start, double log_x,
                                   double bin_width = 1e-3) {
    detail::require_bin_width(bin_width);
    if (log_x >= 0.0) return 1.0;
    const double depth_needed = (-log_x - detail::stop_slack(log_x)) / bin_width;
    return detail::binned_paths(real, start, static_cast<long long>(std::ceil(depth_needed - 1e-9)), bin_width);
}

/// Binned count at the scale of a node: x is the relative length of the path
/// `cut` (one symbol per level below `start`). The cut is measured with the
/// same rounded steps as every other path, so paths tied with it stay tied.
inline double section_count_binned_at_node(const MoranRealization& real, std::size_t start,
                                           const std::vector<std::uint32_t>& cut, double bin_width = 1e-3) {
    detail::require_bin_width(bin_width);
    if (start + cut.size() > real.depth())
        throw Error(ErrorCode::DepthExceeded, "cut path exceeds the realization depth");
    long long stop_bin = 0;
    for (std::size_t i = 0; i < cut.size(); ++i) {
        if (cut[i] >= static_cast<std::uint32_t>(real.K()))
            throw Error(ErrorCode::PreconditionViolated, "cut symbol out of range");
        stop_bin += detail::bin_step(real, start + i + 1, cut[i], bin_width);
    }
    return detail::binned_paths(real, start, stop_bin, bin_width);
}

}  // namespace moran
