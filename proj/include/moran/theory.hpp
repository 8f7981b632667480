#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "moran/ensemble.hpp"
#include "moran/error.hpp"
#include "moran/numeric.hpp"

namespace moran {

/// Unique s >= 0 with sum_j ratios[j]^s = 1, by bisection on [0, s_hi] where
/// s_hi is doubled from 1 until the sum drops to 1 or below.
inline double moran_exponent(std::span<const double> ratios) {
    if (ratios.size() < 2) throw Error(ErrorCode::InputTooShort, "need at least two ratios");
    std::vector<double> logs;
    logs.reserve(ratios.size());
    for (double a : ratios) {
        if (!(a > 0.0 && a < 1.0)) throw Error(ErrorCode::DomainError, "ratio " + format_double(a) + " not in (0,1)");
        logs.push_back(std::log(a));
    }
    auto excess = [&](double s) {
        double sum = 0.0;
        for (double la : logs) sum += std::exp(s * la);
        return sum - 1.0;
    };
    return bisect_decreasing(excess, 0.0, expand_upper_bracket(excess));
}

struct SetDims {
    double lower;  // d = min over atoms of d_omega
    double upper;  // D = max over atoms of d_omega
};

inline std::vector<double> atom_dims(const Ensemble& ensemble) {
    std::vector<double> out;
    out.reserve(ensemble.size());
    for (const auto& a : ensemble.atoms()) out.push_back(moran_exponent(a.ratios));
    return out;
}

inline SetDims set_dims(const Ensemble& ensemble) {
    const auto dims = atom_dims(ensemble);
    const auto [lo, hi] = std::minmax_element(dims.begin(), dims.end());
    return {*lo, *hi};
}

/// Root of s -> E log(sum_j a_j^s), the almost-sure Hausdorff dimension.
inline double hausdorff_dim(const Ensemble& ensemble) {
    auto pressure = [&](double s) {
        double total = 0.0;
        for (const auto& a : ensemble.atoms()) {
            double sum = 0.0;
            for (double r : a.ratios) sum += std::pow(r, s);
            total += a.mass * std::log(sum);
        }
        return total;
    };
    return bisect_decreasing(pressure, 0.0, expand_upper_bracket(pressure));
}

/// t_j(omega) = log p_j(omega) / log a_j(omega), per atom and index.
inline std::vector<std::vector<double>> ratio_table(const Ensemble& ensemble) {
    if (!ensemble.has_weights()) throw Error(ErrorCode::MissingWeights, "ensemble has no weights");
    std::vector<std::vector<double>> table;
    table.reserve(ensemble.size());
    for (const auto& a : ensemble.atoms()) {
        std::vector<double> row(a.ratios.size());
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::log((*a.weights)[j]) / std::log(a.ratios[j]);
        table.push_back(std::move(row));
    }
    return table;
}

struct MeasureDims {
    double upper;
    double lower;
    std::size_t upper_atom = 0, upper_index = 0;
    std::size_t lower_atom = 0, lower_index = 0;
};

/// Almost-sure upper/lower Phi-dimensions of the random measure for small Phi:
/// max and min of t_j(omega) over indices and atoms.
inline MeasureDims measure_dims(const Ensemble& ensemble) {
    const auto table = ratio_table(ensemble);
    MeasureDims m{table[0][0], table[0][0]};
    for (std::size_t i = 0; i < table.size(); ++i)
        for (std::size_t j = 0; j < table[i].size(); ++j) {
            if (table[i][j] > m.upper) m.upper = table[i][j], m.upper_atom = i, m.upper_index = j;
            if (table[i][j] < m.lower) m.lower = table[i][j], m.lower_atom = i, m.lower_index = j;
        }
    return m;
}

struct IndependentBounds {
    double small;  // delta: exponent of the componentwise essinf ratios
    double big;    // Delta: exponent of the componentwise esssup ratios
};

inline IndependentBounds independent_bounds(const Ensemble& ensemble) {
    const auto eb = essential_bounds(ensemble);
    return {moran_exponent(eb.ratio_min), moran_exponent(eb.ratio_max)};
}

struct DimensionReport {
    double d_lower = 0.0;
    double d_upper = 0.0;
    double hausdorff = 0.0;
    double delta_small = 0.0;
    double delta_big = 0.0;
    std::optional<double> measure_upper;
    std::optional<double> measure_lower;
    std::vector<double> atom_dims;
    std::optional<std::vector<std::vector<double>>> ratio_table;
    /// sum_j esssup a_j >= 1: Delta is then not the dimension of a separated Moran set.
    bool max_ratio_sum_at_least_one = false;
};

inline DimensionReport dimension_report(const Ensemble& ensemble) {
    DimensionReport r;
    r.atom_dims = atom_dims(ensemble);
    const auto [lo, hi] = std::minmax_element(r.atom_dims.begin(), r.atom_dims.end());
    r.d_lower = *lo;
    r.d_upper = *hi;
    r.hausdorff = hausdorff_dim(ensemble);
    const auto ib = independent_bounds(ensemble);
    r.delta_small = ib.small;
    r.delta_big = ib.big;
    double sum = 0.0;
    for (double a : essential_bounds(ensemble).ratio_max) sum += a;
    r.max_ratio_sum_at_least_one = sum >= 1.0;
    if (ensemble.has_weights()) {
        const auto m = measure_dims(ensemble);
        r.measure_upper = m.upper;
        r.measure_lower = m.lower;
        r.ratio_table = ratio_table(ensemble);
    }
    return r;
}

struct LowerPhiAudit {
    bool pass = true;
    double lower_slack = 0.0;  // d - measure_lower, >= 0 on success
    double upper_slack = 0.0;  // measure_upper - D, >= 0 on success
    std::optional<std::size_t> violating_atom;
};

/// Checks measure_lower <= d and measure_upper >= D, plus the per-atom fact
/// behind them: since sum_j a_j^d_omega = 1 = sum_j p_j, no atom can have every
/// t_j strictly above d_omega or every t_j strictly below it.
inline LowerPhiAudit audit_lowerphi(const DimensionReport& report, double tol = 1e-12) {
    if (!report.measure_upper || !report.ratio_table)
        throw Error(ErrorCode::MissingWeights, "report carries no measure dimensions");
    LowerPhiAudit a;
    a.lower_slack = report.d_lower - *report.measure_lower;
    a.upper_slack = *report.measure_upper - report.d_upper;
    a.pass = a.lower_slack >= -tol && a.upper_slack >= -tol;
    const auto& table = *report.ratio_table;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double d = report.atom_dims[i];
        const bool all_above = std::all_of(table[i].begin(), table[i].end(), [&](double t) { return t > d + tol; });
        const bool all_below = std::all_of(table[i].begin(), table[i].end(), [&](double t) { return t < d - tol; });
        if (all_above || all_below) {
            a.pass = false;
            if (!a.violating_atom) a.violating_atom = i;
        }
    }
    return a;
}

}  // namespace moran
