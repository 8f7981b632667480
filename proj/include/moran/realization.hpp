#pragma once

// 1-variable random Moran construction: the atom drawn at level ℓ supplies the
// ratios and weights used by every level-ℓ child, whatever its ancestor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "moran/ensemble.hpp"
#include "moran/error.hpp"
#include "moran/numeric.hpp"

namespace moran {

/// Path from the root; symbols are 0-based child indices, most significant first.
/// The empty address is [0,1].
struct Address {
    std::vector<std::uint32_t> symbols;

    std::size_t size() const noexcept { return symbols.size(); }
    bool empty() const noexcept { return symbols.empty(); }

    /// 1-based, dot separated ("1.2.1"); the root prints as "".
    std::string to_string() const {
        std::string out;
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (i) out += '.';
            out += std::to_string(symbols[i] + 1);
        }
        return out;
    }

    friend bool operator==(const Address&, const Address&) = default;
};

class MoranRealization {
public:
    MoranRealization(const Ensemble& ensemble, EnvironmentSequence env)
        : bounds_(ensemble.bounds()), env_(std::move(env)), weighted_(ensemble.has_weights()) {
        const auto K = static_cast<std::size_t>(bounds_.K);
        const std::size_t M = env_.depth();
        ratios_.resize(M * K);
        log_ratios_.resize(M * K);
        offsets_.resize(M * K);
        if (weighted_) {
            weights_.resize(M * K);
            log_weights_.resize(M * K);
        }
        for (std::size_t l = 0; l < M; ++l) {
            if (env_.indices[l] >= ensemble.size())
                throw Error(ErrorCode::PreconditionViolated,
                            "environment index " + std::to_string(env_.indices[l]) + " has no atom");
            const Atom& a = ensemble.atom(env_.indices[l]);
            double sum = 0.0;
            for (double r : a.ratios) sum += r;
            const double gap = (1.0 - sum) / static_cast<double>(K - 1);
            double pos = 0.0;
            for (std::size_t j = 0; j < K; ++j) {
                ratios_[l * K + j] = a.ratios[j];
                log_ratios_[l * K + j] = std::log(a.ratios[j]);
                offsets_[l * K + j] = pos;
                pos += a.ratios[j] + gap;
                if (weighted_) {
                    weights_[l * K + j] = (*a.weights)[j];
                    log_weights_[l * K + j] = std::log((*a.weights)[j]);
                }
            }
        }
    }

    const GlobalBounds& bounds() const noexcept { return bounds_; }
    int K() const noexcept { return bounds_.K; }
    std::size_t depth() const noexcept { return env_.depth(); }
    const EnvironmentSequence& environment() const noexcept { return env_; }
    bool has_weights() const noexcept { return weighted_; }

    // Level arguments are 1-based: level 1 holds the root's children.
    double ratio(std::size_t level, std::size_t j) const { return ratios_[at(level, j)]; }
    double log_ratio(std::size_t level, std::size_t j) const { return log_ratios_[at(level, j)]; }
    double weight(std::size_t level, std::size_t j) const { return weights_[at(level, j)]; }
    double log_weight(std::size_t level, std::size_t j) const { return log_weights_[at(level, j)]; }

    /// Left end of child j relative to its parent's left end, in units of parent length.
    double offset(std::size_t level, std::size_t j) const { return offsets_[at(level, j)]; }

    std::vector<double> level_ratios(std::size_t level) const { return slice(ratios_, level); }
    std::vector<double> level_weights(std::size_t level) const {
        if (!weighted_) throw Error(ErrorCode::MissingWeights, "realization has no weights");
        return slice(weights_, level);
    }

private:
    std::size_t at(std::size_t level, std::size_t j) const noexcept {
        return (level - 1) * static_cast<std::size_t>(bounds_.K) + j;
    }
    std::vector<double> slice(const std::vector<double>& v, std::size_t level) const {
        if (level < 1 || level > depth()) throw Error(ErrorCode::AddressTooDeep, "level out of range");
        const auto b = v.begin() + static_cast<std::ptrdiff_t>(at(level, 0));
        return {b, b + bounds_.K};
    }

    GlobalBounds bounds_;
    EnvironmentSequence env_;
    bool weighted_;
    std::vector<double> ratios_, log_ratios_, weights_, log_weights_, offsets_;
};

inline MoranRealization realize(const Ensemble& ensemble, EnvironmentSequence env) {
    return MoranRealization(ensemble, std::move(env));
}

struct IntervalRecord {
    double length = 1.0;
    double log_length = 0.0;
    std::optional<double> measure;
    std::optional<double> log_measure;
    double left = 0.0;
    double right = 1.0;
};

/// Exact products along the address. log_length/log_measure stay accurate
/// where the plain products underflow.
inline IntervalRecord interval(const MoranRealization& real, const Address& addr) {
    if (addr.size() > real.depth())
        throw Error(ErrorCode::AddressTooDeep, "address of length " + std::to_string(addr.size()) +
                                                   " exceeds depth " + std::to_string(real.depth()));
    IntervalRecord rec;
    double measure = 1.0, log_measure = 0.0;
    for (std::size_t l = 1; l <= addr.size(); ++l) {
        const std::size_t j = addr.symbols[l - 1];
        if (j >= static_cast<std::size_t>(real.K()))
            throw Error(ErrorCode::PreconditionViolated, "address symbol out of range");
        rec.left += rec.length * real.offset(l, j);
        rec.length *= real.ratio(l, j);
        rec.log_length += real.log_ratio(l, j);
        if (real.has_weights()) {
            measure *= real.weight(l, j);
            log_measure += real.log_weight(l, j);
        }
    }
    rec.right = rec.left + rec.length;
    if (real.has_weights()) {
        rec.measure = measure;
        rec.log_measure = log_measure;
    }
    return rec;
}

struct IntervalRow {
    std::size_t level = 0;
    Address address;
    IntervalRecord interval;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1ULL << 22;

/// Every Moran interval of levels 1..up_to, ordered by (level, left endpoint).
/// Children are placed left to right, so lexicographic order is left order.
inline std::vector<IntervalRow> export_levels(const MoranRealization& real, std::size_t up_to,
                                              std::uint64_t enumeration_cap = kDefaultEnumerationCap) {
    if (up_to > real.depth())
        throw Error(ErrorCode::AddressTooDeep, "export level " + std::to_string(up_to) + " exceeds depth " +
                                                   std::to_string(real.depth()));
    const auto K = static_cast<std::uint64_t>(real.K());
    std::uint64_t total = 0, width = 1;
    for (std::size_t l = 1; l <= up_to; ++l) {
        if (width > enumeration_cap / K) throw Error(ErrorCode::EnumerationCapExceeded, "too many intervals");
        width *= K;
        total += width;
        if (total > enumeration_cap)
            throw Error(ErrorCode::EnumerationCapExceeded,
                        std::to_string(total) + "+ intervals exceed cap " + std::to_string(enumeration_cap));
    }

    std::vector<IntervalRow> rows;
    rows.reserve(total);
    std::vector<IntervalRow> frontier{IntervalRow{0, {}, interval(real, {})}};
    for (std::size_t l = 1; l <= up_to; ++l) {
        std::vector<IntervalRow> next;
        next.reserve(frontier.size() * K);
        for (const auto& parent : frontier)
            for (std::uint32_t j = 0; j < K; ++j) {
                IntervalRow row{l, parent.address, parent.interval};
                row.address.symbols.push_back(j);
                auto& iv = row.interval;
                iv.left = parent.interval.left + parent.interval.length * real.offset(l, j);
                iv.length = parent.interval.length * real.ratio(l, j);
                iv.log_length = parent.interval.log_length + real.log_ratio(l, j);
                iv.right = iv.left + iv.length;
                if (real.has_weights()) {
                    iv.measure = *parent.interval.measure * real.weight(l, j);
                    iv.log_measure = *parent.interval.log_measure + real.log_weight(l, j);
                }
                next.push_back(std::move(row));
            }
        rows.insert(rows.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return rows;
}

inline constexpr const char* kLevelsCsvHeader = "level,address,left,right,length,measure";

inline void write_levels_csv(std::ostream& os, const std::vector<IntervalRow>& rows) {
    os << kLevelsCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.level << ',' << r.address.to_string() << ',' << format_double(r.interval.left) << ','
           << format_double(r.interval.right) << ',' << format_double(r.interval.length) << ',';
        if (r.interval.measure) os << format_double(*r.interval.measure);
        os << '\n';
    }
}

/// Levels as stacked horizontal bars, level 1 at the top.
inline void write_levels_svg(std::ostream& os, const std::vector<IntervalRow>& rows) {
    constexpr double width = 1000.0, bar = 14.0, pitch = 20.0, margin = 10.0;
    std::size_t levels = 0;
    for (const auto& r : rows) levels = std::max(levels, r.level);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width + 2 * margin)
       << "\" height=\"" << format_double(static_cast<double>(levels) * pitch + 2 * margin) << "\">\n";
    for (const auto& r : rows) {
        const double y = margin + static_cast<double>(r.level - 1) * pitch;
        os << "  <rect x=\"" << format_double(margin + r.interval.left * width) << "\" y=\"" << format_double(y)
           << "\" width=\"" << format_double(r.interval.length * width) << "\" height=\"" << format_double(bar)
           << "\" fill=\"#333\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace moran
