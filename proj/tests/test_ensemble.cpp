#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "moran/ensemble.hpp"
#include "support/generators.hpp"

using namespace moran;
using moran::testing::Gen;

TEST(Ensemble, TwoAtomExampleIsValid) {
    const auto e = validate_ensemble(moran::testing::two_atom_spec(false));
    EXPECT_EQ(e.size(), 2u);
    EXPECT_FALSE(e.has_weights());
}

TEST(Ensemble, TauAboveSeparationLimitIsRejected) {
    auto s = moran::testing::two_atom_spec(false);
    s.bounds.tau = 0.2;
    try {
        validate_ensemble(s);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_TRUE(e.has(ErrorCode::BoundViolation));
    }
}

TEST(Ensemble, EveryViolationIsReported) {
    EnsembleSpec s;
    s.bounds = {2, 0.5, 0.75, 0.125};  // K*A > B
    s.atoms = {Atom{{0.6, 0.3}, std::vector<double>{0.7, 0.2}, 0.4}};
    try {
        validate_ensemble(s);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_TRUE(e.has(ErrorCode::BoundViolation));
        EXPECT_TRUE(e.has(ErrorCode::WeightViolation));
        EXPECT_TRUE(e.has(ErrorCode::MassViolation));
        EXPECT_GE(e.diagnostics().size(), 4u);
    }
}

TEST(Ensemble, WeightsSumToleranceIs1e12) {
    auto s = moran::testing::single_atom_spec({0.5, 0.25}, std::vector<double>{0.5, 0.5 + 5e-13});
    EXPECT_NO_THROW(validate_ensemble(s));
    s.atoms[0].weights = std::vector<double>{0.5, 0.5 + 5e-12};
    EXPECT_THROW(validate_ensemble(s), ValidationError);
}

TEST(Ensemble, ZeroWeightIsRejected) {
    auto s = moran::testing::single_atom_spec({0.5, 0.25}, std::vector<double>{1.0, 0.0});
    try {
        validate_ensemble(s);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_TRUE(e.has(ErrorCode::WeightViolation));
    }
}

TEST(Ensemble, IndependentModeCopiesSharedWeights) {
    const auto e = validate_ensemble(moran::testing::two_atom_spec(true));
    ASSERT_TRUE(e.has_weights());
    for (const auto& a : e.atoms()) EXPECT_EQ(*a.weights, (std::vector<double>{0.5, 0.5}));
    EXPECT_FALSE(e.spec().atoms[0].weights.has_value());
    EXPECT_EQ(e.spec(), moran::testing::two_atom_spec(true));
}

TEST(Ensemble, IndependentModeRejectsPerAtomWeights) {
    auto s = moran::testing::two_atom_spec(true);
    s.atoms[0].weights = std::vector<double>{0.5, 0.5};
    EXPECT_THROW(validate_ensemble(s), ValidationError);
}

TEST(Ensemble, MixedWeightPresenceIsRejected) {
    auto s = moran::testing::two_atom_spec(false);
    s.atoms[0].weights = std::vector<double>{0.5, 0.5};
    EXPECT_THROW(validate_ensemble(s), ValidationError);
}

TEST(Environment, DepthMustBePositive) {
    const auto e = validate_ensemble(moran::testing::two_atom_spec(false));
    try {
        sample_environment(e, 1, 0);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::InvalidDepth);
    }
}

TEST(Environment, SingleAtomIsConstant) {
    const auto e = validate_ensemble(moran::testing::single_atom_spec({0.5, 0.25}, std::nullopt));
    const auto env = sample_environment(e, 99, 50);
    for (auto i : env.indices) EXPECT_EQ(i, 0u);
}

TEST(Environment, SameSeedSameSequence) {
    const auto e = validate_ensemble(moran::testing::two_atom_spec(false));
    EXPECT_EQ(sample_environment(e, 5, 1000), sample_environment(e, 5, 1000));
    EXPECT_NE(sample_environment(e, 5, 1000), sample_environment(e, 6, 1000));
}

TEST(Environment, PrefixStable) {
    const auto e = validate_ensemble(moran::testing::two_atom_spec(false));
    const auto shortr = sample_environment(e, 11, 100), longr = sample_environment(e, 11, 300);
    for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(shortr.indices[i], longr.indices[i]);
}

TEST(Environment, SplitMixReferenceStream) {
    // Published SplitMix64 outputs for seed 0.
    SplitMix64 g(0);
    EXPECT_EQ(g.next(), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(g.next(), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(g.next(), 0x06c45d188009454fULL);
}

TEST(Environment, InverseCdfSelection) {
    // Reproduce the draw rule independently: atom = #{cumulative masses <= u}.
    EnsembleSpec s;
    s.bounds = {2, 0.25, 0.75, 0.125};
    s.atoms = {Atom{{0.5, 0.25}, std::nullopt, 0.2}, Atom{{0.25, 0.5}, std::nullopt, 0.3},
               Atom{{0.3, 0.3}, std::nullopt, 0.5}};
    const auto e = validate_ensemble(s);
    const auto env = sample_environment(e, 1234, 500);
    SplitMix64 g(1234);
    for (std::size_t l = 0; l < 500; ++l) {
        const double u = static_cast<double>(g.next() >> 11) / 9007199254740992.0;
        const std::size_t expect = u < 0.2 ? 0 : (u < 0.5 ? 1 : 2);
        EXPECT_EQ(env.indices[l], expect);
    }
}

TEST(Environment, FrequenciesMatchMasses) {
    EnsembleSpec s = moran::testing::two_atom_spec(false);
    s.atoms[0].mass = 0.3;
    s.atoms[1].mass = 0.7;
    const auto e = validate_ensemble(s);
    const auto env = sample_environment(e, 2024, 200000);
    double ones = 0;
    for (auto i : env.indices) ones += static_cast<double>(i);
    EXPECT_NEAR(ones / 200000.0, 0.7, 0.005);
}

TEST(EssentialBounds, ComponentwiseExtremes) {
    EnsembleSpec s = moran::testing::two_atom_spec(false);
    s.atoms[1].ratios = {0.6, 0.125};
    s.bounds.A = 0.125;
    const auto eb = essential_bounds(validate_ensemble(s));
    EXPECT_EQ(eb.ratio_max, (std::vector<double>{0.6, 0.25}));
    EXPECT_EQ(eb.ratio_min, (std::vector<double>{0.5, 0.125}));
}

TEST(EnsembleProperty, RandomValidEnsemblesValidateAndSeparate) {
    Gen g(17);
    for (int trial = 0; trial < 300; ++trial) {
        const auto spec = g.ensemble(trial % 2 == 0);
        const auto e = validate_ensemble(spec);
        for (const auto& a : e.atoms()) {
            double sum = 0.0;
            for (double r : a.ratios) sum += r;
            // Equal-gap placement leaves at least tau between siblings.
            EXPECT_GE((1.0 - sum) / (e.K() - 1), e.bounds().tau - 1e-15);
        }
    }
}

TEST(EnsembleProperty, PerturbingARatioBelowAIsCaught) {
    Gen g(23);
    for (int trial = 0; trial < 100; ++trial) {
        auto spec = g.ensemble(false);
        spec.atoms[0].ratios[0] = spec.bounds.A * 0.5;
        try {
            validate_ensemble(spec);
            FAIL();
        } catch (const ValidationError& e) {
            EXPECT_TRUE(e.has(ErrorCode::BoundViolation));
        }
    }
}
