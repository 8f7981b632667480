#pragma once

// Random weighted IFS over a finite probability space of "atoms". Each atom is
// one deterministic IFS of K similarities on [0,1] (given by its ratios),
// optionally carrying probability weights, drawn with probability `mass`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moran/error.hpp"
#include "moran/numeric.hpp"
#include "moran/rng.hpp"

namespace moran {

/// Absolute slack on every equality/inequality checked during validation.
inline constexpr double kValidationTol = 1e-12;

struct GlobalBounds {
    int K = 2;         // branch count
    double A = 0.0;    // lower bound on each ratio
    double B = 0.0;    // upper bound on the ratio sum
    double tau = 0.0;  // relative separation gap

    friend bool operator==(const GlobalBounds&, const GlobalBounds&) = default;
};

struct Atom {
    std::vector<double> ratios;
    std::optional<std::vector<double>> weights;
    double mass = 1.0;

    friend bool operator==(const Atom&, const Atom&) = default;
};

enum class WeightMode { dependent, independent };

inline std::string_view to_string(WeightMode m) noexcept {
    return m == WeightMode::dependent ? "dependent" : "independent";
}

/// Unvalidated ensemble description, as read from configuration.
/// In independent mode the weights live in `shared_weights`, not on atoms.
struct EnsembleSpec {
    GlobalBounds bounds;
    std::vector<Atom> atoms;
    WeightMode mode = WeightMode::dependent;
    std::optional<std::vector<double>> shared_weights;

    friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

class Ensemble;
Ensemble validate_ensemble(const EnsembleSpec& spec);

/// Validated, immutable ensemble. Only validate_ensemble constructs one.
/// After validation every atom carries weights iff has_weights(); in
/// independent mode those are copies of the shared vector.
class Ensemble {
public:
    const GlobalBounds& bounds() const noexcept { return bounds_; }
    int K() const noexcept { return bounds_.K; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const Atom& atom(std::size_t i) const { return atoms_.at(i); }
    std::size_t size() const noexcept { return atoms_.size(); }
    WeightMode mode() const noexcept { return mode_; }
    bool has_weights() const noexcept { return atoms_.front().weights.has_value(); }
    const std::optional<std::vector<double>>& shared_weights() const noexcept { return shared_; }

    /// The description this ensemble was validated from (canonical form).
    EnsembleSpec spec() const {
        EnsembleSpec s{bounds_, atoms_, mode_, shared_};
        if (mode_ == WeightMode::independent)
            for (auto& a : s.atoms) a.weights.reset();
        return s;
    }

private:
    friend Ensemble validate_ensemble(const EnsembleSpec& spec);
    Ensemble() = default;

    GlobalBounds bounds_;
    std::vector<Atom> atoms_;
    WeightMode mode_ = WeightMode::dependent;
    std::optional<std::vector<double>> shared_;
};

namespace detail {

inline std::string fmt(double v) { return format_double(v); }

inline void check_weight_vector(std::span<const double> w, int K, const std::string& where,
                                std::vector<Diagnostic>& out) {
    if (static_cast<int>(w.size()) != K) {
        out.push_back({ErrorCode::WeightViolation,
                       where + " has " + std::to_string(w.size()) + " weights, expected K=" +
                           std::to_string(K)});
        return;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (!(w[j] > 0.0) || !std::isfinite(w[j]))
            out.push_back({ErrorCode::WeightViolation,
                           where + " weight[" + std::to_string(j) + "] = " + fmt(w[j]) +
                               " is not strictly positive"});
        sum += w[j];
    }
    if (!(std::fabs(sum - 1.0) <= kValidationTol))
        out.push_back({ErrorCode::WeightViolation, where + " weights sum to " + fmt(sum)});
}

}  // namespace detail

/// Checks every invariant and either returns the validated ensemble or throws
/// ValidationError listing all violations found.
inline Ensemble validate_ensemble(const EnsembleSpec& spec) {
    std::vector<Diagnostic> diag;
    const auto& b = spec.bounds;
    using detail::fmt;

    if (b.K < 2) diag.push_back({ErrorCode::BoundViolation, "K = " + std::to_string(b.K) + " < 2"});
    if (!(b.A > 0.0 && b.A < 1.0)) diag.push_back({ErrorCode::BoundViolation, "A = " + fmt(b.A) + " not in (0,1)"});
    if (!(b.B > 0.0 && b.B < 1.0)) diag.push_back({ErrorCode::BoundViolation, "B = " + fmt(b.B) + " not in (0,1)"});
    if (b.K >= 2 && !(b.K * b.A <= b.B + kValidationTol))
        diag.push_back({ErrorCode::BoundViolation, "K*A = " + fmt(b.K * b.A) + " exceeds B = " + fmt(b.B)});
    if (!(b.tau > 0.0)) diag.push_back({ErrorCode::BoundViolation, "tau = " + fmt(b.tau) + " must be positive"});
    if (b.K >= 2 && b.tau > (1.0 - b.B) / b.K + kValidationTol)
        diag.push_back({ErrorCode::BoundViolation,
                        "tau = " + fmt(b.tau) + " exceeds (1-B)/K = " + fmt((1.0 - b.B) / b.K)});

    if (spec.atoms.empty()) diag.push_back({ErrorCode::BoundViolation, "ensemble has no atoms"});

    if (spec.mode == WeightMode::independent) {
        if (spec.shared_weights) detail::check_weight_vector(*spec.shared_weights, b.K, "shared", diag);
        for (std::size_t i = 0; i < spec.atoms.size(); ++i)
            if (spec.atoms[i].weights)
                diag.push_back({ErrorCode::WeightViolation,
                                "atom " + std::to_string(i) +
                                    " carries its own weights in independent mode"});
    } else {
        if (spec.shared_weights)
            diag.push_back({ErrorCode::WeightViolation, "shared weights require independent mode"});
        std::size_t weighted = 0;
        for (const auto& a : spec.atoms) weighted += a.weights.has_value();
        if (weighted != 0 && weighted != spec.atoms.size())
            diag.push_back({ErrorCode::WeightViolation, "either every atom or no atom must carry weights"});
    }

    double mass_sum = 0.0;
    for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
        const auto& a = spec.atoms[i];
        const std::string where = "atom " + std::to_string(i);
        if (static_cast<int>(a.ratios.size()) != b.K) {
            diag.push_back({ErrorCode::BoundViolation, where + " has " + std::to_string(a.ratios.size()) +
                                                           " ratios, expected K=" + std::to_string(b.K)});
        } else {
            double sum = 0.0;
            for (std::size_t j = 0; j < a.ratios.size(); ++j) {
                const double r = a.ratios[j];
                if (!std::isfinite(r) || r < b.A - kValidationTol)
                    diag.push_back({ErrorCode::BoundViolation, where + " ratio[" + std::to_string(j) +
                                                                   "] = " + fmt(r) + " below A = " + fmt(b.A)});
                sum += r;
            }
            if (!(sum <= b.B + kValidationTol))
                diag.push_back({ErrorCode::BoundViolation,
                                where + " ratio sum " + fmt(sum) + " exceeds B = " + fmt(b.B)});
        }
        if (a.weights && spec.mode == WeightMode::dependent)
            detail::check_weight_vector(*a.weights, b.K, where, diag);
        if (!(a.mass > 0.0 && a.mass <= 1.0))
            diag.push_back({ErrorCode::MassViolation, where + " mass " + fmt(a.mass) + " not in (0,1]"});
        mass_sum += a.mass;
    }
    if (!spec.atoms.empty() && !(std::fabs(mass_sum - 1.0) <= kValidationTol))
        diag.push_back({ErrorCode::MassViolation, "atom masses sum to " + fmt(mass_sum)});

    if (!diag.empty()) throw ValidationError(std::move(diag));

    Ensemble e;
    e.bounds_ = spec.bounds;
    e.atoms_ = spec.atoms;
    e.mode_ = spec.mode;
    e.shared_ = spec.shared_weights;
    if (spec.mode == WeightMode::independent && spec.shared_weights)
        for (auto& a : e.atoms_) a.weights = *spec.shared_weights;
    return e;
}

/// A truncated environment: the atom drawn at each of `depth` levels.
struct EnvironmentSequence {
    std::uint64_t seed = 0;
    std::vector<std::size_t> indices;

    std::size_t depth() const noexcept { return indices.size(); }
    friend bool operator==(const EnvironmentSequence&, const EnvironmentSequence&) = default;
};

/// iid draws from the atom masses. Level ℓ uses the ℓ-th uniform of a
/// SplitMix64 stream seeded with `seed`; the atom is the first index whose
/// running mass sum exceeds the uniform (the last atom absorbs rounding).
inline EnvironmentSequence sample_environment(const Ensemble& ensemble, std::uint64_t seed, long long depth) {
    if (depth < 1) throw Error(ErrorCode::InvalidDepth, "depth must be >= 1, got " + std::to_string(depth));
    std::vector<double> cumulative;
    cumulative.reserve(ensemble.size());
    double acc = 0.0;
    for (const auto& a : ensemble.atoms()) cumulative.push_back(acc += a.mass);

    SplitMix64 rng(seed);
    EnvironmentSequence env{seed, {}};
    env.indices.reserve(static_cast<std::size_t>(depth));
    const std::size_t last = ensemble.size() - 1;
    for (long long l = 0; l < depth; ++l) {
        const double u = rng.uniform();
        std::size_t i = 0;
        while (i < last && !(u < cumulative[i])) ++i;
        env.indices.push_back(i);
    }
    return env;
}

/// Per-index essential extremes. Over a finite space with positive masses
/// esssup/essinf are plain max/min over atoms.
struct EssentialBounds {
    std::vector<double> ratio_max;
    std::vector<double> ratio_min;
    std::optional<std::vector<double>> weight_max;
    std::optional<std::vector<double>> weight_min;
};

inline EssentialBounds essential_bounds(const Ensemble& ensemble) {
    const auto K = static_cast<std::size_t>(ensemble.K());
    EssentialBounds eb;
    eb.ratio_max = ensemble.atom(0).ratios;
    eb.ratio_min = ensemble.atom(0).ratios;
    for (const auto& a : ensemble.atoms())
        for (std::size_t j = 0; j < K; ++j) {
            eb.ratio_max[j] = std::max(eb.ratio_max[j], a.ratios[j]);
            eb.ratio_min[j] = std::min(eb.ratio_min[j], a.ratios[j]);
        }
    if (ensemble.has_weights()) {
        std::vector<double> hi = *ensemble.atom(0).weights, lo = hi;
        for (const auto& a : ensemble.atoms())
            for (std::size_t j = 0; j < K; ++j) {
                hi[j] = std::max(hi[j], (*a.weights)[j]);
                lo[j] = std::min(lo[j], (*a.weights)[j]);
            }
        eb.weight_max = std::move(hi);
        eb.weight_min = std::move(lo);
    }
    return eb;
}

}  // namespace moran
