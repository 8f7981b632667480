#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "moran/estimator.hpp"
#include "support/generators.hpp"

using namespace moran;
using moran::testing::Gen;

namespace {

MoranRealization half_quarter(long long depth) {
    const auto e = validate_ensemble(moran::testing::single_atom_spec({0.5, 0.25}, std::vector<double>{0.5, 0.5}));
    return realize(e, sample_environment(e, 1, depth));
}

MoranRealization two_atom(std::uint64_t seed, long long depth) {
    const auto e = validate_ensemble(moran::testing::two_atom_spec(true));
    return realize(e, sample_environment(e, seed, depth));
}

// Oracle for section counts: walk the tree through interval() on explicit
// addresses, relative to the level-N ancestor 0...0.
double brute_sections(const MoranRealization& real, std::size_t N, double x) {
    Address base;
    base.symbols.assign(N, 0);
    const double root = interval(real, base).length;
    double count = 0;
    std::function<void(Address&)> walk = [&](Address& a) {
        for (std::uint32_t j = 0; j < static_cast<std::uint32_t>(real.K()); ++j) {
            a.symbols.push_back(j);
            if (interval(real, a).length / root <= x * (1 + 1e-12))
                count += 1;
            else
                walk(a);
            a.symbols.pop_back();
        }
    };
    walk(base);
    return count;
}

// Oracle for window extremes: every suffix below the ancestor 0...0 via interval().
std::pair<double, double> brute_window(const MoranRealization& real, std::size_t N, std::size_t w) {
    Address base;
    base.symbols.assign(N, 0);
    const auto I = interval(real, base);
    double hi = -1e300, lo = 1e300;
    std::function<void(Address&)> walk = [&](Address& a) {
        if (a.size() == N + w) {
            const auto J = interval(real, a);
            const double t = (*J.log_measure - *I.log_measure) / (J.log_length - I.log_length);
            hi = std::max(hi, t);
            lo = std::min(lo, t);
            return;
        }
        for (std::uint32_t j = 0; j < static_cast<std::uint32_t>(real.K()); ++j) {
            a.symbols.push_back(j);
            walk(a);
            a.symbols.pop_back();
        }
    };
    walk(base);
    return {hi, lo};
}

}  // namespace

TEST(Sections, FibonacciCounts) {
    const auto real = half_quarter(40);
    EstimatorConfig cfg;
    EXPECT_EQ(set_window(real, 1, 16, cfg).section_count, 2584.0);
    EXPECT_TRUE(set_window(real, 1, 16, cfg).exact);
    const auto w20 = set_window(real, 2, 20, cfg);
    EXPECT_FALSE(w20.exact);
    EXPECT_EQ(w20.section_count, 17711.0);
    EXPECT_EQ(section_count_exhaustive(real, 3, 20 * std::log(0.5)), 17711.0);
}

TEST(Sections, RootScaleIsOne) {
    const auto real = half_quarter(4);
    EXPECT_EQ(section_count_exhaustive(real, 0, 0.0), 1.0);
    EXPECT_EQ(section_count_binned(real, 0, 0.5), 1.0);
}

TEST(Sections, CapAndDepthErrors) {
    const auto real = half_quarter(30);
    try {
        section_count_exhaustive(real, 0, 25 * std::log(0.5), 1000);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EnumerationCapExceeded);
    }
    try {
        section_count_exhaustive(real, 0, 40 * std::log(0.5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DepthExceeded);
    }
    EXPECT_THROW(section_count_binned(real, 0, -1.0, 0.0), Error);
}

TEST(SectionsProperty, ExhaustiveMatchesIntervalWalk) {
    Gen g(83);
    for (int trial = 0; trial < 40; ++trial) {
        const auto e = validate_ensemble(g.ensemble(false, 3, 3));
        const auto real = realize(e, sample_environment(e, static_cast<std::uint64_t>(trial), 60));
        const std::size_t N = static_cast<std::size_t>(g.integer(0, 3));
        const double x = std::pow(e.bounds().B, g.uniform(1.0, 6.0));
        EXPECT_EQ(section_count_exhaustive(real, N, std::log(x)), brute_sections(real, N, x)) << trial;
    }
}

TEST(SectionsProperty, BinnedAtNodeMatchesExhaustive) {
    // At a node scale the cut path ties with itself under any rounding, and in
    // generic tables no other path sits within the rounding error of the cut.
    Gen g(91);
    for (int trial = 0; trial < 40; ++trial) {
        const auto e = validate_ensemble(g.ensemble(false, 3, 3));
        const auto real = realize(e, sample_environment(e, static_cast<std::uint64_t>(trial), 200));
        EstimatorConfig exact_cfg, binned_cfg;
        binned_cfg.exhaustive_window = 0;
        binned_cfg.bin_width = 1e-5;
        const long long w = g.integer(4, 10);
        const auto a = set_window(real, 1, w, exact_cfg), b = set_window(real, 1, w, binned_cfg);
        ASSERT_TRUE(a.exact);
        ASSERT_FALSE(b.exact);
        EXPECT_EQ(a.section_count, b.section_count) << trial;
    }
}

TEST(SectionsProperty, BinnedTracksExhaustive) {
    Gen g(89);
    for (int trial = 0; trial < 40; ++trial) {
        const auto e = validate_ensemble(g.ensemble(false, 3, 3));
        const auto real = realize(e, sample_environment(e, static_cast<std::uint64_t>(trial), 200));
        const double log_x = std::log(e.bounds().B) * g.uniform(4.0, 10.0);
        const double exact = section_count_exhaustive(real, 1, log_x);
        const double binned = section_count_binned(real, 1, log_x, 1e-4);
        // Log-count agreement: binning moves only paths within a few bins of the cut.
        EXPECT_NEAR(std::log(binned) / -log_x, std::log(exact) / -log_x, 0.02) << trial;
    }
}

TEST(Windows, AdmissibleSetAndNesting) {
    const GlobalBounds b{2, 0.25, 0.75, 0.125};
    const auto zero = admissible_windows(DimensionFunction::zero(), b, 1, 10, 1, 20);
    EXPECT_EQ(zero.size(), 200u);
    const auto theta = admissible_windows(DimensionFunction::theta_spectrum(0.5), b, 1, 10, 1, 20);
    for (const auto& w : theta) EXPECT_GE(w.window, depth_window(DimensionFunction::theta_spectrum(0.5), w.start_level, b));
    EXPECT_TRUE(std::includes(zero.begin(), zero.end(), theta.begin(), theta.end()));
    EXPECT_LT(theta.size(), zero.size());
}

TEST(MeasureEstimator, SingleAtomRecoversTheory) {
    const auto real = half_quarter(200);
    EstimatorConfig cfg;
    const auto m = estimate_measure_dims(real, DimensionFunction::zero(), cfg);
    EXPECT_DOUBLE_EQ(m.upper, 1.0);
    EXPECT_DOUBLE_EQ(m.lower, 0.5);
}

TEST(MeasureEstimator, Errors) {
    const auto e = validate_ensemble(moran::testing::two_atom_spec(false));
    const auto unweighted = realize(e, sample_environment(e, 1, 200));
    try {
        estimate_measure_dims(unweighted, DimensionFunction::zero(), EstimatorConfig{});
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::MissingWeights);
    }
    const auto shallow = half_quarter(50);
    try {
        estimate_measure_dims(shallow, DimensionFunction::zero(), EstimatorConfig{});
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::DepthExceeded);
    }
    EstimatorConfig tight;
    tight.max_window = 4;
    try {
        estimate_measure_dims(half_quarter(200), DimensionFunction::theta_spectrum(0.5), tight);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::NoAdmissibleWindow);
    }
}

TEST(MeasureEstimatorProperty, ParametricMatchesEnumeration) {
    Gen g(97);
    for (int trial = 0; trial < 60; ++trial) {
        const auto e = validate_ensemble(g.ensemble(true, 3, 3));
        const auto real = realize(e, sample_environment(e, static_cast<std::uint64_t>(trial), 30));
        const long long N = g.integer(0, 5), w = g.integer(1, 8);
        const auto mw = measure_window(real, N, w);
        const auto s = suffix_ratios(real, N, w);
        EXPECT_NEAR(mw.theta_max, *std::max_element(s.begin(), s.end()), 1e-12) << trial;
        EXPECT_NEAR(mw.theta_min, *std::min_element(s.begin(), s.end()), 1e-12) << trial;
        const auto [hi, lo] = brute_window(real, static_cast<std::size_t>(N), static_cast<std::size_t>(w));
        EXPECT_NEAR(mw.theta_max, hi, 1e-9) << trial;
        EXPECT_NEAR(mw.theta_min, lo, 1e-9) << trial;
    }
}

TEST(MeasureEstimatorProperty, ExhaustiveAgreesOnConservativeWindows) {
    Gen g(101);
    for (int trial = 0; trial < 20; ++trial) {
        const auto e = validate_ensemble(g.ensemble(true, 2, 3));
        const auto real = realize(e, sample_environment(e, static_cast<std::uint64_t>(trial), 40));
        EstimatorConfig cfg;
        cfg.max_level = 6;
        cfg.max_window = 10;
        const auto phi = DimensionFunction::inverse_log_power(1.5);
        const auto ex = estimate_measure_dims_exhaustive(real, phi, cfg, 10);
        const auto par = estimate_measure_dims(real, phi, cfg);
        int conservative = 0;
        for (const auto& w : ex.windows) {
            if (!w.conservative) continue;
            ++conservative;
            EXPECT_EQ(w.admissible, w.suffixes);
            const auto mw = measure_window(real, w.key.start_level, w.key.window);
            EXPECT_NEAR(*w.theta_max, mw.theta_max, 1e-12);
            EXPECT_NEAR(*w.theta_min, mw.theta_min, 1e-12);
        }
        EXPECT_GT(conservative, 0);
        // The exhaustive oracle admits a superset of windows and suffixes.
        EXPECT_GE(*ex.upper, par.upper - 1e-12);
        EXPECT_LE(*ex.lower, par.lower + 1e-12);
    }
}

TEST(MeasureEstimatorProperty, BoundedByTheory) {
    Gen g(103);
    for (int trial = 0; trial < 30; ++trial) {
        const auto e = validate_ensemble(g.ensemble(true, 3, 3));
        const auto real = realize(e, sample_environment(e, static_cast<std::uint64_t>(trial), 200));
        const auto th = measure_dims(e);
        const auto m = estimate_measure_dims(real, DimensionFunction::zero(), EstimatorConfig{});
        EXPECT_LE(m.upper, th.upper + 1e-12);
        EXPECT_GE(m.lower, th.lower - 1e-12);
        EXPECT_LE(m.lower, m.upper);
    }
}

TEST(BoxEstimator, SingleAtomNearExponent) {
    const auto real = half_quarter(200);
    const auto b = estimate_box_dims(real, box_level_list(24));
    EXPECT_NEAR(b.lower, 0.694241913630617301738790266899, 0.05);
    EXPECT_NEAR(b.upper, 0.694241913630617301738790266899, 0.05);
    EXPECT_LE(b.lower, b.upper);
    EXPECT_EQ(b.levels.size(), 24u);
}

TEST(SetEstimator, EmptyWindowSetGivesNullopt) {
    EstimatorConfig cfg;
    EXPECT_FALSE(estimate_set_dims(half_quarter(200), DimensionFunction::constant(10.0), cfg).has_value());
    EXPECT_TRUE(estimate_set_dims(half_quarter(200), DimensionFunction::zero(), cfg).has_value());
}

TEST(Estimate, TwoAtomAuditPasses) {
    const auto real = two_atom(7, 2000);
    const auto theory = dimension_report(validate_ensemble(moran::testing::two_atom_spec(true)));
    EstimatorConfig cfg;
    cfg.min_level = 2;
    std::vector<EstimateReport> reps;
    for (const auto& phi : {DimensionFunction::zero(), DimensionFunction::inverse_log_power(2),
                            DimensionFunction::theta_spectrum(0.5)}) {
        reps.push_back(estimate(real, phi, cfg));
        const auto a = ordering_audit(reps.back(), theory, cfg.audit_tolerance);
        EXPECT_TRUE(a.pass) << phi.name();
        EXPECT_FALSE(a.checks.empty());
        EXPECT_TRUE(std::is_sorted(reps.back().windows.begin(), reps.back().windows.end(),
                                   [](const WindowRecord& x, const WindowRecord& y) {
                                       return std::pair(x.start_level, x.window) < std::pair(y.start_level, y.window);
                                   }));
    }
    for (std::size_t i = 0; i + 1 < reps.size(); ++i) {
        const auto m = monotonicity_audit(reps[i], reps[i + 1]);
        EXPECT_TRUE(m.windows_nested) << i;
        EXPECT_TRUE(m.pass) << i;
    }
}

TEST(Audit, FlagsBrokenChain) {
    EstimateReport rep;
    rep.lower_set = 0.9;
    rep.upper_set = 0.7;
    DimensionReport th;
    const auto a = ordering_audit(rep, th, 0.05);
    EXPECT_FALSE(a.pass);
}

TEST(Audit, MonotonicityDetectsNonNestedWindows) {
    EstimateReport small, big;
    small.windows = {WindowRecord{1, 2, 0.5, 0.4, std::nullopt, std::nullopt}};
    big.windows = {WindowRecord{1, 3, 0.5, 0.4, std::nullopt, std::nullopt}};
    small.upper_measure = big.upper_measure = 0.5;
    small.lower_measure = big.lower_measure = 0.4;
    const auto m = monotonicity_audit(small, big);
    EXPECT_FALSE(m.windows_nested);
    EXPECT_FALSE(m.pass);
}
