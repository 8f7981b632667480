#pragma once

// Brute-force check of the covering bound on labeled K-ary trees: if every
// level's labels satisfy sum_j c_{j,l}^s >= 1, the stopping set at threshold
// x = (2/(tau A)) (r/R) has at least x^-s = (tau A/2)^s (R/r)^s members.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "moran/error.hpp"
#include "moran/numeric.hpp"
#include "moran/realization.hpp"
#include "moran/rng.hpp"
#include "moran/theory.hpp"

namespace moran {

struct LabeledTree {
    int K = 2;
    double A = 0.0;
    double B = 0.0;
    double tau = 0.0;
    std::vector<std::vector<double>> labels;  // labels[l][j]: child j at depth l+1

    std::size_t depth() const noexcept { return labels.size(); }
};

inline void validate_tree(const LabeledTree& t) {
    std::vector<Diagnostic> diag;
    auto fmt = [](double v) { return format_double(v); };
    if (t.K < 2) diag.push_back({ErrorCode::BoundViolation, "K must be >= 2"});
    if (!(t.A > 0.0 && t.A < 1.0)) diag.push_back({ErrorCode::BoundViolation, "A = " + fmt(t.A) + " not in (0,1)"});
    if (!(t.B > 0.0 && t.B < 1.0)) diag.push_back({ErrorCode::BoundViolation, "B = " + fmt(t.B) + " not in (0,1)"});
    if (!(t.tau > 0.0)) diag.push_back({ErrorCode::BoundViolation, "tau must be positive"});
    if (t.labels.empty()) diag.push_back({ErrorCode::InvalidDepth, "tree has no levels"});
    for (std::size_t l = 0; l < t.labels.size(); ++l) {
        const auto& row = t.labels[l];
        const std::string where = "level " + std::to_string(l + 1);
        if (static_cast<int>(row.size()) != t.K) {
            diag.push_back({ErrorCode::BoundViolation, where + " has " + std::to_string(row.size()) + " labels"});
            continue;
        }
        double sum = 0.0;
        for (double c : row) {
            if (!(c >= t.A - kValidationTol && c <= t.B + kValidationTol))
                diag.push_back({ErrorCode::BoundViolation, where + " label " + fmt(c) + " outside [A,B]"});
            sum += c;
        }
        if (!(sum <= t.B + kValidationTol))
            diag.push_back({ErrorCode::BoundViolation, where + " label sum " + fmt(sum) + " exceeds B"});
    }
    if (!diag.empty()) throw ValidationError(std::move(diag));
}

/// c_sigma: product of labels along sigma, multiplied from the root down.
inline double node_label(const LabeledTree& t, const Address& sigma) {
    if (sigma.size() > t.depth()) throw Error(ErrorCode::AddressTooDeep, "address deeper than tree");
    double c = 1.0;
    for (std::size_t l = 0; l < sigma.size(); ++l) {
        if (sigma.symbols[l] >= static_cast<std::uint32_t>(t.K))
            throw Error(ErrorCode::PreconditionViolated, "address symbol out of range");
        c *= t.labels[l][sigma.symbols[l]];
    }
    return c;
}

/// Largest label among depth-k nodes (product of per-level maxima).
inline double max_label_at_depth(const LabeledTree& t, std::size_t k) {
    double c = 1.0;
    for (std::size_t l = 0; l < k; ++l) c *= *std::max_element(t.labels[l].begin(), t.labels[l].end());
    return c;
}

inline double stopping_threshold(const LabeledTree& t, double r, double R) { return 2.0 / (t.tau * t.A) * (r / R); }

/// Stopping set {sigma : c_sigma <= x < c_parent}, with the root's parent
/// labelled +infinity so the root is the only member when x >= 1.
/// Members are listed in depth-first lexicographic order.
inline std::vector<Address> upsilon(const LabeledTree& t, double r, double R) {
    if (!(r > 0.0 && r < R)) throw Error(ErrorCode::PreconditionViolated, "need 0 < r < R");
    if (max_label_at_depth(t, t.depth()) * R > r)
        throw Error(ErrorCode::PreconditionViolated, "some leaf has c_sigma * R > r");
    const double x = stopping_threshold(t, r, R);
    if (x >= 1.0) return {Address{}};

    std::vector<Address> out;
    struct Frame {
        Address addr;
        double label;
    };
    std::vector<Frame> stack{{Address{}, 1.0}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const std::size_t l = f.addr.size();
        // push in reverse so children pop in increasing index order
        for (std::size_t jj = static_cast<std::size_t>(t.K); jj-- > 0;) {
            Frame child{f.addr, f.label * t.labels[l][jj]};
            child.addr.symbols.push_back(static_cast<std::uint32_t>(jj));
            if (child.label <= x)
                out.push_back(std::move(child.addr));
            else if (l + 1 < t.depth())
                stack.push_back(std::move(child));
            else
                throw Error(ErrorCode::PreconditionViolated, "leaf label above threshold");
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Address& a, const Address& b) { return a.symbols < b.symbols; });
    return out;
}

struct LemmaResult {
    std::size_t count = 0;  // |Upsilon_r|
    double bound = 0.0;     // (tau A/2)^s (R/r)^s
    double threshold = 0.0; // x
    bool pass = false;
};

/// Relative slack on |Upsilon| >= bound. The bound is attained with equality
/// on uniform trees at thresholds equal to a node label, where the two sides
/// are computed by different roundings.
inline constexpr double kLemmaRelTol = 1e-9;

inline LemmaResult verify_geometric_lemma(const LabeledTree& t, double s, double r, double R) {
    for (std::size_t l = 0; l < t.depth(); ++l) {
        double sum = 0.0;
        for (double c : t.labels[l]) sum += std::pow(c, s);
        if (sum < 1.0 - 1e-12)
            throw Error(ErrorCode::HypothesisViolated, "level " + std::to_string(l + 1) + ": sum of c^s = " +
                                                           format_double(sum) + " < 1");
    }
    LemmaResult res;
    res.count = upsilon(t, r, R).size();
    res.threshold = stopping_threshold(t, r, R);
    res.bound = std::pow(t.tau * t.A / 2.0, s) * std::pow(R / r, s);
    res.pass = static_cast<double>(res.count) >= res.bound * (1.0 - kLemmaRelTol);
    return res;
}

/// Largest s with sum_j c_{j,l}^s >= 1 at every level: the minimum per-level Moran exponent.
inline double tree_exponent(const LabeledTree& t) {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& row : t.labels) s = std::min(s, moran_exponent(row));
    return s;
}

/// Random valid tree: B in [0.3, 0.9], A in [0.05 B/K, B/K], tau in (0, (1-B)/K],
/// labels c_j = A + (B - K A) u_j / K, so each lies in [A, B] and each level sums to <= B.
inline LabeledTree random_tree(SplitMix64& rng, int K, std::size_t depth) {
    LabeledTree t;
    t.K = K;
    t.B = rng.uniform(0.3, 0.9);
    t.A = rng.uniform(0.05, 1.0) * t.B / K;
    t.tau = (1.0 - t.B) / K * (1.0 - rng.uniform());
    t.labels.assign(depth, std::vector<double>(static_cast<std::size_t>(K)));
    for (auto& row : t.labels)
        for (auto& c : row) c = t.A + (t.B - K * t.A) * rng.uniform() / K;
    return t;
}

/// Thresholds r/R used by the sweep: the largest depth-k label for k = 1..n
/// (k = n is the smallest admissible value) plus `extra` log-uniform draws in
/// [largest leaf label, 1).
inline std::vector<double> threshold_sweep(const LabeledTree& t, SplitMix64& rng, std::size_t extra) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= t.depth(); ++k) out.push_back(max_label_at_depth(t, k));
    const double lo = std::log(max_label_at_depth(t, t.depth()));
    for (std::size_t i = 0; i < extra; ++i) out.push_back(std::exp(lo * (1.0 - rng.uniform())));
    out.erase(std::remove_if(out.begin(), out.end(), [](double v) { return !(v < 1.0); }), out.end());
    return out;
}

}  // namespace moran
