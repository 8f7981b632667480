#pragma once

// Finite-depth estimates of upper/lower Phi-dimensions of a realized Moran set
// and measure from two-scale interval data.
//
// A window (N, w) pairs a level-N interval I with its level-(N+w) descendants J.
// In the 1-variable model log(mu(J)/mu(I)) / log(|J|/|I|) depends only on the
// w suffix symbols, so each window is a path problem on a layered graph with K
// choices per layer: extremize sum(log p) / sum(log a).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moran/error.hpp"
#include "moran/numeric.hpp"
#include "moran/phi.hpp"
#include "moran/realization.hpp"
#include "moran/sections.hpp"
#include "moran/theory.hpp"

namespace moran {

struct EstimatorConfig {
    long long min_level = 1;
    long long max_level = 32;
    long long max_window = 128;
    long long exhaustive_window = 16;  // set sections: DFS up to this window, binned DP beyond
    std::uint64_t enumeration_cap = kDefaultEnumerationCap;
    double bin_width = 1e-3;
    long long set_max_level = 4;
    long long set_min_window = 12;
    long long set_max_window = 20;
    long long box_levels = 16;
    double audit_tolerance = 0.05;
};

struct Window {
    long long start_level = 0;
    long long window = 0;
    friend auto operator<=>(const Window&, const Window&) = default;
};

/// {(N, w) : lo_level <= N <= hi_level, max(depth_window(N), min_window) <= w <= max_window}.
/// A pointwise-larger Phi has a pointwise-larger depth_window, hence a subset.
inline std::vector<Window> admissible_windows(const DimensionFunction& phi, const GlobalBounds& bounds,
                                              long long lo_level, long long hi_level, long long min_window,
                                              long long max_window) {
    std::vector<Window> out;
    for (long long N = std::max(1LL, lo_level); N <= hi_level; ++N) {
        long long m;
        try {
            m = depth_window(phi, N, bounds, max_window);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::OverflowGuard) continue;
            throw;
        }
        for (long long w = std::max(m, min_window); w <= max_window; ++w) out.push_back({N, w});
    }
    return out;
}

namespace detail {

inline void require_depth(const MoranRealization& real, long long level, long long window, const char* what) {
    if (level < 0 || window < 0 || static_cast<unsigned long long>(level + window) > real.depth())
        throw Error(ErrorCode::DepthExceeded, std::string(what) + ": level " + std::to_string(level) + " + window " +
                                                  std::to_string(window) + " exceeds depth " +
                                                  std::to_string(real.depth()));
}

struct PathSums {
    double log_p = 0.0;
    double log_a = 0.0;
    double ratio() const { return log_p / log_a; }
};

/// Path through levels N+1..N+w picking, per level, the index that minimizes
/// (maximize=false: maximizes) log p_j - theta * log a_j. Lowest index on ties.
inline PathSums extremal_path(const MoranRealization& real, std::size_t N, std::size_t w, double theta,
                              bool pick_min, double* objective = nullptr) {
    const auto K = static_cast<std::size_t>(real.K());
    PathSums s;
    double total = 0.0;
    for (std::size_t l = N + 1; l <= N + w; ++l) {
        std::size_t best = 0;
        double best_v = real.log_weight(l, 0) - theta * real.log_ratio(l, 0);
        for (std::size_t j = 1; j < K; ++j) {
            const double v = real.log_weight(l, j) - theta * real.log_ratio(l, j);
            if (pick_min ? v < best_v : v > best_v) best = j, best_v = v;
        }
        total += best_v;
        s.log_p += real.log_weight(l, best);
        s.log_a += real.log_ratio(l, best);
    }
    if (objective) *objective = total;
    return s;
}

/// Extremal suffix ratio of one window. Bisection on the monotone parametric
/// objective locates the optimum; the optimizing path at the bracket is then
/// improved by Dinkelbach steps until no path beats its exact ratio, so the
/// value returned is the ratio of an actual optimal path.
inline double window_theta(const MoranRealization& real, std::size_t N, std::size_t w, bool maximum) {
    const auto K = static_cast<std::size_t>(real.K());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t l = N + 1; l <= N + w; ++l)
        for (std::size_t j = 0; j < K; ++j) {
            const double t = real.log_weight(l, j) / real.log_ratio(l, j);
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
    // maximum: F(theta) = sum_l min_j (log p - theta log a) is increasing with root theta_max.
    // minimum: G(theta) = sum_l max_j (...) is increasing with root theta_min.
    auto neg = [&](double theta) {
        double v;
        extremal_path(real, N, w, theta, maximum, &v);
        return -v;
    };
    const double root = bisect_decreasing(neg, lo, hi);
    double best = extremal_path(real, N, w, root, maximum).ratio();
    for (int it = 0; it < 200; ++it) {
        const double cand = extremal_path(real, N, w, best, maximum).ratio();
        if (maximum ? !(cand > best) : !(cand < best)) break;
        best = cand;
    }
    return std::clamp(best, lo, hi);
}

}  // namespace detail

struct MeasureWindow {
    Window key;
    double theta_max = 0.0;
    double theta_min = 0.0;
};

struct MeasureEstimate {
    double upper = 0.0;
    double lower = 0.0;
    std::vector<MeasureWindow> windows;
};

/// Upper/lower measure estimates over every conservative window with start
/// level in [min_level, max_level] and length up to max_window.
inline MeasureEstimate estimate_measure_dims(const MoranRealization& real, const DimensionFunction& phi,
                                             const EstimatorConfig& cfg) {
    if (!real.has_weights()) throw Error(ErrorCode::MissingWeights, "measure estimate needs weights");
    detail::require_depth(real, cfg.max_level, cfg.max_window, "measure estimate");
    const auto keys =
        admissible_windows(phi, real.bounds(), cfg.min_level, cfg.max_level, 1, cfg.max_window);
    if (keys.empty()) throw Error(ErrorCode::NoAdmissibleWindow, "no admissible measure window for " + phi.name());
    MeasureEstimate out;
    out.windows.reserve(keys.size());
    out.upper = -std::numeric_limits<double>::infinity();
    out.lower = std::numeric_limits<double>::infinity();
    for (const auto& k : keys) {
        const auto N = static_cast<std::size_t>(k.start_level), w = static_cast<std::size_t>(k.window);
        MeasureWindow rec{k, detail::window_theta(real, N, w, true), detail::window_theta(real, N, w, false)};
        out.upper = std::max(out.upper, rec.theta_max);
        out.lower = std::min(out.lower, rec.theta_min);
        out.windows.push_back(rec);
    }
    return out;
}

/// Single-window parametric extremes, exposed for the oracle comparison.
inline MeasureWindow measure_window(const MoranRealization& real, long long N, long long w) {
    if (!real.has_weights()) throw Error(ErrorCode::MissingWeights, "measure estimate needs weights");
    detail::require_depth(real, N, w, "measure window");
    const auto n = static_cast<std::size_t>(N), ww = static_cast<std::size_t>(w);
    return {{N, w}, detail::window_theta(real, n, ww, true), detail::window_theta(real, n, ww, false)};
}

struct ExhaustiveWindow {
    Window key;
    bool conservative = false;       // w >= depth_window(N): every pair is admissible
    std::uint64_t suffixes = 0;      // K^w
    std::uint64_t admissible = 0;    // suffixes admissible for at least one level-N ancestor
    std::optional<double> theta_max;  // over admissible suffixes
    std::optional<double> theta_min;
};

struct ExhaustiveEstimate {
    std::optional<double> upper;
    std::optional<double> lower;
    std::vector<ExhaustiveWindow> windows;
};

/// Every suffix ratio of a window, in lexicographic suffix order.
inline std::vector<double> suffix_ratios(const MoranRealization& real, long long N, long long w,
                                         std::uint64_t cap = kDefaultEnumerationCap) {
    if (!real.has_weights()) throw Error(ErrorCode::MissingWeights, "suffix ratios need weights");
    detail::require_depth(real, N, w, "suffix ratios");
    const auto K = static_cast<std::uint64_t>(real.K());
    std::uint64_t total = 1;
    for (long long i = 0; i < w; ++i) {
        if (total > cap / K) throw Error(ErrorCode::EnumerationCapExceeded, "window too wide to enumerate");
        total *= K;
    }
    std::vector<double> out;
    out.reserve(total);
    std::vector<std::uint32_t> digits(static_cast<std::size_t>(w), 0);
    for (std::uint64_t n = 0; n < total; ++n) {
        double lp = 0.0, la = 0.0;
        for (std::size_t i = 0; i < digits.size(); ++i) {
            lp += real.log_weight(static_cast<std::size_t>(N) + i + 1, digits[i]);
            la += real.log_ratio(static_cast<std::size_t>(N) + i + 1, digits[i]);
        }
        out.push_back(lp / la);
        for (std::size_t i = digits.size(); i-- > 0;) {
            if (++digits[i] < K) break;
            digits[i] = 0;
        }
    }
    return out;
}

/// Brute-force oracle: enumerates all K^w suffixes of every window with
/// w <= w_cap and keeps those satisfying |J| <= |I|^(1+Phi(|I|)) for some
/// level-N ancestor I. The ancestor log-lengths span [L_min, L_max], both
/// attained, and L * Phi(e^-L) is monotone, so testing the two ends is exact.
inline ExhaustiveEstimate estimate_measure_dims_exhaustive(const MoranRealization& real,
                                                           const DimensionFunction& phi,
                                                           const EstimatorConfig& cfg, long long w_cap) {
    if (!real.has_weights()) throw Error(ErrorCode::MissingWeights, "measure estimate needs weights");
    detail::require_depth(real, cfg.max_level, w_cap, "exhaustive estimate");
    const auto K = static_cast<std::uint64_t>(real.K());
    {
        std::uint64_t t = 1;
        for (long long i = 0; i < w_cap; ++i) {
            if (t > cfg.enumeration_cap / K)
                throw Error(ErrorCode::EnumerationCapExceeded,
                            "K^" + std::to_string(w_cap) + " exceeds cap " + std::to_string(cfg.enumeration_cap));
            t *= K;
        }
    }
    ExhaustiveEstimate out;
    double L_min = 0.0, L_max = 0.0;
    for (long long N = 1; N <= cfg.max_level; ++N) {
        double step_min = std::numeric_limits<double>::infinity(), step_max = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            step_min = std::min(step_min, -real.log_ratio(static_cast<std::size_t>(N), j));
            step_max = std::max(step_max, -real.log_ratio(static_cast<std::size_t>(N), j));
        }
        L_min += step_min;
        L_max += step_max;
        if (N < cfg.min_level) continue;
        const double need = std::min(phi.log_gap(L_min), phi.log_gap(L_max));
        long long conservative_from;
        try {
            conservative_from = depth_window(phi, N, real.bounds(), std::numeric_limits<long long>::max() / 2);
        } catch (const Error&) {
            conservative_from = std::numeric_limits<long long>::max();
        }

        for (long long w = 1; w <= w_cap; ++w) {
            ExhaustiveWindow rec;
            rec.key = {N, w};
            rec.conservative = w >= conservative_from;
            std::vector<std::uint32_t> digits(static_cast<std::size_t>(w), 0);
            std::uint64_t total = 1;
            for (long long i = 0; i < w; ++i) total *= K;
            rec.suffixes = total;
            for (std::uint64_t n = 0; n < total; ++n) {
                double lp = 0.0, la = 0.0;
                for (std::size_t i = 0; i < digits.size(); ++i) {
                    lp += real.log_weight(static_cast<std::size_t>(N) + i + 1, digits[i]);
                    la += real.log_ratio(static_cast<std::size_t>(N) + i + 1, digits[i]);
                }
                if (-la >= need) {
                    ++rec.admissible;
                    const double t = lp / la;
                    rec.theta_max = rec.theta_max ? std::max(*rec.theta_max, t) : t;
                    rec.theta_min = rec.theta_min ? std::min(*rec.theta_min, t) : t;
                }
                for (std::size_t i = digits.size(); i-- > 0;) {
                    if (++digits[i] < K) break;
                    digits[i] = 0;
                }
            }
            if (rec.theta_max) {
                out.upper = out.upper ? std::max(*out.upper, *rec.theta_max) : *rec.theta_max;
                out.lower = out.lower ? std::min(*out.lower, *rec.theta_min) : *rec.theta_min;
            }
            out.windows.push_back(std::move(rec));
        }
    }
    return out;
}

struct SetWindow {
    Window key;
    double log_scale = 0.0;  // log of the window's largest relative leaf length
    double section_count = 0.0;
    double exponent = 0.0;
    bool exact = true;  // DFS count (true) or binned DP (false)
};

struct SetEstimate {
    double upper = 0.0;
    double lower = 0.0;
    std::vector<SetWindow> windows;
};

/// Section count and exponent log(count)/log(R/r) for one window, where r/R is
/// the window's largest relative leaf length.
inline SetWindow set_window(const MoranRealization& real, long long N, long long w, const EstimatorConfig& cfg) {
    detail::require_depth(real, N, w, "set window");
    const auto K = static_cast<std::size_t>(real.K());
    double log_x = 0.0;
    std::vector<std::uint32_t> cut;
    for (std::size_t l = static_cast<std::size_t>(N) + 1; l <= static_cast<std::size_t>(N + w); ++l) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < K; ++j)
            if (real.log_ratio(l, j) > real.log_ratio(l, arg)) arg = j;
        log_x += real.log_ratio(l, arg);
        cut.push_back(static_cast<std::uint32_t>(arg));
    }
    SetWindow rec;
    rec.key = {N, w};
    rec.log_scale = log_x;
    rec.exact = w <= cfg.exhaustive_window;
    rec.section_count = rec.exact ? section_count_exhaustive(real, static_cast<std::size_t>(N), log_x,
                                                             cfg.enumeration_cap)
                                  : section_count_binned_at_node(real, static_cast<std::size_t>(N), cut, cfg.bin_width);
    rec.exponent = std::log(rec.section_count) / -log_x;
    return rec;
}

/// Set estimates over windows with start level in [min_level, set_max_level]
/// and length in [max(depth_window(N), set_min_window), set_max_window].
/// Returns nullopt when that window set is empty.
inline std::optional<SetEstimate> estimate_set_dims(const MoranRealization& real, const DimensionFunction& phi,
                                                    const EstimatorConfig& cfg) {
    detail::require_depth(real, cfg.set_max_level, cfg.set_max_window, "set estimate");
    const auto keys = admissible_windows(phi, real.bounds(), cfg.min_level, cfg.set_max_level, cfg.set_min_window,
                                         cfg.set_max_window);
    if (keys.empty()) return std::nullopt;
    SetEstimate out;
    out.upper = -std::numeric_limits<double>::infinity();
    out.lower = std::numeric_limits<double>::infinity();
    for (const auto& k : keys) {
        auto rec = set_window(real, k.start_level, k.window, cfg);
        out.upper = std::max(out.upper, rec.exponent);
        out.lower = std::min(out.lower, rec.exponent);
        out.windows.push_back(rec);
    }
    return out;
}

struct BoxLevel {
    long long level = 0;
    double log_scale = 0.0;  // log of the geometric-mean level length
    double section_count = 0.0;
    double exponent = 0.0;
};

struct BoxEstimate {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<BoxLevel> levels;
};

/// Global section counts from the root at x_k = geometric mean level-k length;
/// lower/upper are min/max of log N(x_k)/log(1/x_k) over the last quartile of `levels`.
inline BoxEstimate estimate_box_dims(const MoranRealization& real, const std::vector<long long>& levels,
                                     const EstimatorConfig& cfg = {}) {
    if (levels.empty()) throw Error(ErrorCode::InputTooShort, "box estimate needs at least one level");
    const auto K = static_cast<std::size_t>(real.K());
    BoxEstimate out;
    for (long long k : levels) {
        detail::require_depth(real, 0, k, "box estimate");
        if (k < 1) throw Error(ErrorCode::InvalidDepth, "box level must be >= 1");
        double log_x = 0.0;
        for (std::size_t l = 1; l <= static_cast<std::size_t>(k); ++l) {
            double mean = 0.0;
            for (std::size_t j = 0; j < K; ++j) mean += real.log_ratio(l, j);
            log_x += mean / static_cast<double>(K);
        }
        BoxLevel b{k, log_x, 0.0, 0.0};
        b.section_count = k <= cfg.exhaustive_window ? section_count_exhaustive(real, 0, log_x, cfg.enumeration_cap)
                                                     : section_count_binned(real, 0, log_x, cfg.bin_width);
        b.exponent = std::log(b.section_count) / -log_x;
        out.levels.push_back(b);
    }
    const std::size_t tail = std::max<std::size_t>(1, levels.size() / 4);
    out.lower = std::numeric_limits<double>::infinity();
    out.upper = -out.lower;
    for (std::size_t i = levels.size() - tail; i < levels.size(); ++i) {
        out.lower = std::min(out.lower, out.levels[i].exponent);
        out.upper = std::max(out.upper, out.levels[i].exponent);
    }
    return out;
}

inline std::vector<long long> box_level_list(long long count) {
    std::vector<long long> v;
    for (long long k = 1; k <= count; ++k) v.push_back(k);
    return v;
}

struct WindowRecord {
    long long start_level = 0;
    long long window = 0;
    std::optional<double> theta_max;
    std::optional<double> theta_min;
    std::optional<double> section_count;
    std::optional<double> set_exponent;
};

struct EstimateReport {
    DimensionFunction phi = DimensionFunction::zero();
    std::vector<WindowRecord> windows;  // sorted by (start_level, window)
    std::optional<double> upper_measure, lower_measure;
    std::optional<double> upper_set, lower_set;
    std::optional<double> lower_box, upper_box;
};

/// Runs every estimator that applies: measure (when the realization carries
/// weights), set and box. Throws NoAdmissibleWindow if neither the measure nor
/// the set window set is non-empty.
inline EstimateReport estimate(const MoranRealization& real, const DimensionFunction& phi,
                               const EstimatorConfig& cfg) {
    EstimateReport rep;
    rep.phi = phi;
    std::map<Window, WindowRecord> rows;
    auto row = [&](const Window& k) -> WindowRecord& {
        auto& r = rows[k];
        r.start_level = k.start_level;
        r.window = k.window;
        return r;
    };
    if (real.has_weights()) {
        const auto m = estimate_measure_dims(real, phi, cfg);
        rep.upper_measure = m.upper;
        rep.lower_measure = m.lower;
        for (const auto& w : m.windows) {
            auto& r = row(w.key);
            r.theta_max = w.theta_max;
            r.theta_min = w.theta_min;
        }
    }
    if (const auto s = estimate_set_dims(real, phi, cfg)) {
        rep.upper_set = s->upper;
        rep.lower_set = s->lower;
        for (const auto& w : s->windows) {
            auto& r = row(w.key);
            r.section_count = w.section_count;
            r.set_exponent = w.exponent;
        }
    } else if (!real.has_weights()) {
        throw Error(ErrorCode::NoAdmissibleWindow, "no admissible set window for " + phi.name());
    }
    if (cfg.box_levels > 0) {
        const auto b = estimate_box_dims(real, box_level_list(cfg.box_levels), cfg);
        rep.lower_box = b.lower;
        rep.upper_box = b.upper;
    }
    for (auto& [k, r] : rows) rep.windows.push_back(std::move(r));
    return rep;
}

struct AuditCheck {
    std::string name;  // "lhs <= rhs"
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct AuditResult {
    bool pass = true;
    std::vector<AuditCheck> checks;

    void check(std::string name, double lhs, double rhs, double tol) {
        AuditCheck c{std::move(name), lhs, rhs, tol, lhs <= rhs + tol};
        pass = pass && c.pass;
        checks.push_back(std::move(c));
    }
};

/// Chain lower_set <= lower_box <= upper_box <= upper_set <= upper_measure and
/// lower_measure <= lower_set, each within `tol` (finite-depth estimates), plus
/// exact bounds against the almost-sure values: any path ratio is a weighted
/// average of the t_j, so it lies in [measure_lower, measure_upper].
inline AuditResult ordering_audit(const EstimateReport& rep, const DimensionReport& theory, double tol) {
    AuditResult a;
    if (rep.lower_set && rep.lower_box) a.check("lower_set <= lower_box", *rep.lower_set, *rep.lower_box, tol);
    if (rep.lower_box && rep.upper_box) a.check("lower_box <= upper_box", *rep.lower_box, *rep.upper_box, 0.0);
    if (rep.upper_box && rep.upper_set) a.check("upper_box <= upper_set", *rep.upper_box, *rep.upper_set, tol);
    if (rep.lower_set && rep.upper_set) a.check("lower_set <= upper_set", *rep.lower_set, *rep.upper_set, 0.0);
    if (rep.upper_set && rep.upper_measure)
        a.check("upper_set <= upper_measure", *rep.upper_set, *rep.upper_measure, tol);
    if (rep.lower_measure && rep.lower_set)
        a.check("lower_measure <= lower_set", *rep.lower_measure, *rep.lower_set, tol);
    if (rep.lower_measure && rep.upper_measure)
        a.check("lower_measure <= upper_measure", *rep.lower_measure, *rep.upper_measure, 0.0);
    constexpr double exact = 1e-9;
    if (rep.upper_measure && theory.measure_upper)
        a.check("upper_measure <= theory_upper", *rep.upper_measure, *theory.measure_upper, exact);
    if (rep.lower_measure && theory.measure_lower)
        a.check("theory_lower <= lower_measure", *theory.measure_lower, *rep.lower_measure, exact);
    return a;
}

/// Exact comparison of two estimates, `smaller` computed with Phi and `larger`
/// with Psi >= Phi. Requires the window set of Psi to be contained in that of
/// Phi (checked), after which upper_Psi <= upper_Phi and lower_Phi <= lower_Psi
/// hold with no tolerance.
struct MonotonicityAudit {
    bool windows_nested = true;
    bool pass = true;
    AuditResult checks;
};

inline MonotonicityAudit monotonicity_audit(const EstimateReport& smaller, const EstimateReport& larger) {
    MonotonicityAudit m;
    auto keys = [](const EstimateReport& r, bool measure) {
        std::vector<Window> k;
        for (const auto& w : r.windows)
            if (measure ? w.theta_max.has_value() : w.set_exponent.has_value()) k.push_back({w.start_level, w.window});
        return k;
    };
    for (bool measure : {true, false}) {
        const auto a = keys(smaller, measure), b = keys(larger, measure);
        m.windows_nested = m.windows_nested && std::includes(a.begin(), a.end(), b.begin(), b.end());
    }
    if (smaller.upper_measure && larger.upper_measure) {
        m.checks.check("upper_measure(psi) <= upper_measure(phi)", *larger.upper_measure, *smaller.upper_measure, 0.0);
        m.checks.check("lower_measure(phi) <= lower_measure(psi)", *smaller.lower_measure, *larger.lower_measure, 0.0);
    }
    if (smaller.upper_set && larger.upper_set) {
        m.checks.check("upper_set(psi) <= upper_set(phi)", *larger.upper_set, *smaller.upper_set, 0.0);
        m.checks.check("lower_set(phi) <= lower_set(psi)", *smaller.lower_set, *larger.lower_set, 0.0);
    }
    m.pass = m.windows_nested && m.checks.pass;
    return m;
}

}  // namespace moran
