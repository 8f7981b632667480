#pragma once

// Weight constructions that realize a prescribed almost-sure upper or lower
// measure dimension (small Phi). Every construction anchors one index at the
// target exponent and spends the remaining mass at a common exponent that
// never competes with the anchor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "moran/ensemble.hpp"
#include "moran/error.hpp"
#include "moran/numeric.hpp"
#include "moran/theory.hpp"

namespace moran {

enum class Bound { upper, lower };
enum class Regime { dependent, independent };

inline std::string_view to_string(Bound b) noexcept { return b == Bound::upper ? "upper" : "lower"; }
inline std::string_view to_string(Regime r) noexcept {
    return r == Regime::dependent ? "dependent" : "independent";
}

namespace detail {

inline void require_target(double target, Bound which, double lower_limit, double upper_limit,
                           const char* lower_name, const char* upper_name) {
    if (!std::isfinite(target) || !(target > 0.0))
        throw Error(ErrorCode::TargetOutOfRange, "target " + format_double(target) + " must be finite and > 0");
    if (which == Bound::upper && target < lower_limit - kValidationTol)
        throw Error(ErrorCode::TargetOutOfRange, "upper target " + format_double(target) + " below " + lower_name +
                                                     " = " + format_double(lower_limit));
    if (which == Bound::lower && target > upper_limit + kValidationTol)
        throw Error(ErrorCode::TargetOutOfRange, "lower target " + format_double(target) + " above " + upper_name +
                                                     " = " + format_double(upper_limit));
}

/// Solves anchor + sum_{j != skip} base[j]^x = 1 for x. The left side is
/// decreasing in x; `from` is a point where it is >= 1 (upper) or <= 1 (lower).
inline double common_exponent(const std::vector<double>& base, std::size_t skip, double anchor, double from,
                              Bound which) {
    auto excess = [&](double x) {
        double sum = anchor;
        for (std::size_t j = 0; j < base.size(); ++j)
            if (j != skip) sum += std::pow(base[j], x);
        return sum - 1.0;
    };
    if (which == Bound::upper) return bisect_decreasing(excess, 0.0, from);
    return bisect_decreasing(excess, from, expand_upper_bracket(excess, std::max(from, 1.0)));
}

}  // namespace detail

/// Per-atom weights: p_1 = a_1^r and p_j = a_j^{r_omega} for j >= 2, with
/// r_omega <= d_omega (upper) or >= d_omega (lower) fixed by normalization.
inline Ensemble dependent_weights(const Ensemble& ensemble, double target, Bound which) {
    const auto dims = atom_dims(ensemble);
    double d = dims[0], D = dims[0];
    for (double v : dims) d = std::min(d, v), D = std::max(D, v);
    detail::require_target(target, which, D, d, "D", "d");

    EnsembleSpec spec = ensemble.spec();
    spec.mode = WeightMode::dependent;
    spec.shared_weights.reset();
    for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
        auto& atom = spec.atoms[i];
        const double anchor = std::pow(atom.ratios[0], target);
        const double r_omega = detail::common_exponent(atom.ratios, 0, anchor, dims[i], which);
        std::vector<double> w(atom.ratios.size());
        w[0] = anchor;
        for (std::size_t j = 1; j < w.size(); ++j) w[j] = std::pow(atom.ratios[j], r_omega);
        atom.weights = std::move(w);
    }
    return validate_ensemble(spec);
}

struct IndependentWeights {
    std::vector<double> weights;
    std::size_t anchor = 0;   // j*: argmax esssup ratio (upper) or argmin essinf ratio (lower)
    double exponent = 0.0;    // common exponent of the non-anchor indices
};

/// One weight vector for every atom: p_{j*} = abar_{j*}^R (upper) or
/// aunder_{j*}^R (lower), the rest at a common exponent rho.
inline IndependentWeights independent_weights(const Ensemble& ensemble, double target, Bound which) {
    const auto eb = essential_bounds(ensemble);
    const auto ib = independent_bounds(ensemble);
    detail::require_target(target, which, ib.big, ib.small, "Delta", "delta");

    const auto& base = which == Bound::upper ? eb.ratio_max : eb.ratio_min;
    IndependentWeights out;
    for (std::size_t j = 1; j < base.size(); ++j)
        if (which == Bound::upper ? base[j] > base[out.anchor] : base[j] < base[out.anchor]) out.anchor = j;
    const double anchor = std::pow(base[out.anchor], target);
    out.exponent = detail::common_exponent(base, out.anchor, anchor, which == Bound::upper ? ib.big : ib.small,
                                           which);
    out.weights.resize(base.size());
    for (std::size_t j = 0; j < base.size(); ++j)
        out.weights[j] = j == out.anchor ? anchor : std::pow(base[j], out.exponent);
    return out;
}

/// The ensemble with `weights` shared by every atom (independent mode).
inline Ensemble with_shared_weights(const Ensemble& ensemble, std::vector<double> weights) {
    EnsembleSpec spec = ensemble.spec();
    spec.mode = WeightMode::independent;
    for (auto& a : spec.atoms) a.weights.reset();
    spec.shared_weights = std::move(weights);
    return validate_ensemble(spec);
}

struct GapReport {
    double upper_gap = 0.0;  // Delta - D
    double lower_gap = 0.0;  // d - delta
    bool upper_attained = false;  // some atom equals the componentwise esssup
    bool lower_attained = false;  // some atom equals the componentwise essinf
    bool upper_consistent = true;  // upper_attained iff |Delta - D| <= 1e-12
    bool lower_consistent = true;
};

inline GapReport gap_report(const Ensemble& ensemble) {
    const auto eb = essential_bounds(ensemble);
    const auto sd = set_dims(ensemble);
    const auto ib = independent_bounds(ensemble);
    GapReport g;
    g.upper_gap = ib.big - sd.upper;
    g.lower_gap = sd.lower - ib.small;
    for (const auto& a : ensemble.atoms()) {
        g.upper_attained = g.upper_attained || a.ratios == eb.ratio_max;
        g.lower_attained = g.lower_attained || a.ratios == eb.ratio_min;
    }
    constexpr double eq = 1e-12;
    g.upper_consistent = g.upper_attained == (std::fabs(g.upper_gap) <= eq);
    g.lower_consistent = g.lower_attained == (std::fabs(g.lower_gap) <= eq);
    return g;
}

}  // namespace moran
