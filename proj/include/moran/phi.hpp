#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "moran/ensemble.hpp"
#include "moran/error.hpp"

namespace moran {

enum class PhiFamily { zero, constant, inverse_log_power, loglog_power, theta_spectrum };

/// small: H(t) -> 0, large: H(t) -> infinity, boundary: H(t) -> c in (0, inf)
/// where Phi(t) = H(t) log|log t| / |log t|.
enum class SizeClass { small, large, boundary };

inline std::string_view to_string(PhiFamily f) noexcept {
    switch (f) {
    case PhiFamily::zero: return "zero";
    case PhiFamily::constant: return "constant";
    case PhiFamily::inverse_log_power: return "inverse_log_power";
    case PhiFamily::loglog_power: return "loglog_power";
    case PhiFamily::theta_spectrum: return "theta_spectrum";
    }
    return "unknown";
}

inline std::string_view to_string(SizeClass c) noexcept {
    switch (c) {
    case SizeClass::small: return "small";
    case SizeClass::large: return "large";
    case SizeClass::boundary: return "boundary";
    }
    return "unknown";
}

/// Dimension function Phi from a fixed set of parametric families.
///
///   zero                   Phi(t) = 0
///   constant(C)            Phi(t) = C
///   inverse_log_power(a)   Phi(t) = |log t|^-a
///   loglog_power(a)        Phi(t) = (log|log t|)^(1/a) / |log t|   (0 where log|log t| <= 0)
///   theta_spectrum(theta)  Phi(t) = 1/theta - 1
class DimensionFunction {
public:
    static DimensionFunction zero() { return {PhiFamily::zero, 0.0}; }
    static DimensionFunction constant(double c) {
        require(c > 0.0 && std::isfinite(c), "constant C must be positive");
        return {PhiFamily::constant, c};
    }
    static DimensionFunction inverse_log_power(double alpha) {
        require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive");
        return {PhiFamily::inverse_log_power, alpha};
    }
    static DimensionFunction loglog_power(double alpha) {
        require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive");
        return {PhiFamily::loglog_power, alpha};
    }
    static DimensionFunction theta_spectrum(double theta) {
        require(theta > 0.0 && theta < 1.0, "theta must lie in (0,1)");
        return {PhiFamily::theta_spectrum, theta};
    }

    PhiFamily family() const noexcept { return family_; }
    double parameter() const noexcept { return param_; }

    SizeClass size_class() const noexcept {
        switch (family_) {
        case PhiFamily::zero: return SizeClass::small;
        case PhiFamily::constant:
        case PhiFamily::theta_spectrum: return SizeClass::large;
        case PhiFamily::inverse_log_power:
            // H = |log t|^(1-a) / log|log t|
            return param_ >= 1.0 ? SizeClass::small : SizeClass::large;
        case PhiFamily::loglog_power:
            // H = (log|log t|)^(1/a - 1)
            return param_ > 1.0 ? SizeClass::small : (param_ < 1.0 ? SizeClass::large : SizeClass::boundary);
        }
        return SizeClass::large;
    }

    /// Phi(t) for t in (0,1).
    double operator()(double t) const {
        if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::DomainError, "Phi evaluated outside (0,1)");
        return at_log_scale(-std::log(t));
    }

    /// Phi at t = exp(-L), L > 0. Usable far below the double range of t.
    double at_log_scale(double L) const noexcept {
        switch (family_) {
        case PhiFamily::zero: return 0.0;
        case PhiFamily::constant: return param_;
        case PhiFamily::inverse_log_power: return std::pow(L, -param_);
        case PhiFamily::loglog_power: {
            const double ll = std::log(L);
            return ll > 0.0 ? std::pow(ll, 1.0 / param_) / L : 0.0;
        }
        case PhiFamily::theta_spectrum: return 1.0 / param_ - 1.0;
        }
        return 0.0;
    }

    /// -log(t^Phi(t)) = L * Phi(exp(-L)). Monotone in L for every family.
    double log_gap(double L) const noexcept { return L * at_log_scale(L); }

    /// t^(1+Phi(t)) is decreasing on (0, threshold).
    double decreasing_threshold() const noexcept {
        if (family_ == PhiFamily::inverse_log_power && param_ > 1.0)
            return std::exp(-std::pow(param_ - 1.0, 1.0 / param_));
        return 1.0;
    }

    std::string name() const {
        if (family_ == PhiFamily::zero) return "zero";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s_%g", std::string(to_string(family_)).c_str(), param_);
        return buf;
    }

    friend bool operator==(const DimensionFunction&, const DimensionFunction&) = default;

private:
    DimensionFunction(PhiFamily f, double p) : family_(f), param_(p) {}

    static void require(bool ok, const char* what) {
        if (!ok) throw Error(ErrorCode::DomainError, what);
    }

    PhiFamily family_;
    double param_;
};

inline double evaluate(const DimensionFunction& phi, double t) { return phi(t); }

inline constexpr long long kDefaultMaxWindow = 1LL << 24;

/// Least m >= 1 such that every level-N Moran interval I and every level-(N+m)
/// descendant J satisfy |J| <= |I|^(1+Phi(|I|)).
///
/// |I| lies in [A^N, B^N] and |J|/|I| <= B^m, so it suffices that
/// m log(1/B) >= max over that range of -log(|I|^Phi(|I|)). That quantity is
/// monotone in |I| for every family, so the max sits at an endpoint; for
/// families where t^Phi(t) decreases with t it is the A^N endpoint.
inline long long depth_window(const DimensionFunction& phi, long long level, const GlobalBounds& bounds,
                              long long max_window = kDefaultMaxWindow) {
    if (level < 1) throw Error(ErrorCode::DomainError, "level must be >= 1");
    const double n = static_cast<double>(level);
    const double L_short = n * -std::log(bounds.A);
    const double L_long = n * -std::log(bounds.B);
    const double need = std::max(phi.log_gap(L_short), phi.log_gap(L_long)) / -std::log(bounds.B);

    // Snap values within rounding of an integer so closed forms like ceil(N*C) come out exact.
    double m = std::ceil(need);
    const double nearest = std::round(need);
    if (std::fabs(need - nearest) <= 1e-9 * std::max(1.0, std::fabs(need))) m = nearest;
    m = std::max(m, 1.0);
    if (!(m <= static_cast<double>(max_window)))
        throw Error(ErrorCode::OverflowGuard, "window for level " + std::to_string(level) + " exceeds " +
                                                  std::to_string(max_window) + " levels");
    return static_cast<long long>(m);
}

}  // namespace moran
