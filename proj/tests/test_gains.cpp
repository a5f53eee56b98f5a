#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "orthoact/gains.hpp"

using namespace orthoact;

namespace {

double inverse_factorial_sum(int n, int power) {
    double s = 0.0, fact = 1.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) fact *= k;
        s += 1.0 / std::pow(fact, power);
    }
    return s;
}

}  // namespace

TEST(SecondMoment, Relu) {
    const auto m = analytic_second_moment(ClassicalActivation{ClassicalKind::ReLU});
    EXPECT_EQ(m.value, 0.5);
    EXPECT_EQ(m.deriv, 0.5);
}

TEST(SecondMoment, HermiteDegreeThree) {
    const Activation h = HermiteActivation{{std::sqrt(1.0 - 1.0 / 6.0), 1, 1, 1}};
    const auto m = analytic_second_moment(h);
    EXPECT_NEAR(m.value, 2.5, 1e-15);
    EXPECT_NEAR(m.deriv, 2.5, 1e-15);
}

TEST(SecondMoment, HermiteAgreesWithTenMillionSamples) {
    const Activation h = HermiteActivation{{std::sqrt(1.0 - 1.0 / 6.0), 1, 1, 1}};
    const auto r = monte_carlo_gains(h, InputDist::StdNormal, 10'000'000, 7);
    EXPECT_NEAR(r.mc_second_moment / 2.5, 1.0, 0.005);
    EXPECT_NEAR(r.mc_deriv_second_moment / 2.5, 1.0, 0.005);
}

TEST(SecondMoment, ZeroFunction) {
    const auto m = analytic_second_moment(HermiteActivation{{0, 0, 0, 0}});
    EXPECT_EQ(m.value, 0.0);
    EXPECT_EQ(m.deriv, 0.0);
}

TEST(SecondMoment, UnsupportedFamilies) {
    for (const Activation& act :
         {Activation{init_theorem(Family::Tropical, 6)},
          Activation{TropicalRationalActivation{{{0.0}, {1.0}}, {{0.0}, {0.0}}, false}},
          Activation{ClassicalActivation{ClassicalKind::GELU}}, Activation{ClassicalActivation{ClassicalKind::SiLU}}}) {
        try {
            (void)analytic_second_moment(act);
            FAIL() << "expected UnsupportedFamily";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::UnsupportedFamily);
        }
    }
}

TEST(SecondMoment, DistributionMustMatchTheBasis) {
    try {
        (void)analytic_second_moment(init_theorem(Family::Hermite, 3), InputDist::UniformPi);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedDistribution);
    }
    EXPECT_THROW((void)analytic_second_moment(init_theorem(Family::Fourier, 3), InputDist::StdNormal), Error);
    // unit-variance uniform input needs the rescaled fundamental frequency
    EXPECT_THROW((void)analytic_second_moment(init_theorem(Family::Fourier, 3), InputDist::UniformSqrt3), Error);
    const auto scaled = init_theorem(Family::Fourier, 3, InitVariant::Theorem, std::numbers::pi / std::numbers::sqrt3);
    EXPECT_NO_THROW((void)analytic_second_moment(scaled, InputDist::UniformSqrt3));
}

TEST(SecondMoment, FourierNeedsDistinctIntegerFrequencies) {
    auto f = init_theorem(Family::Fourier, 3);
    std::get<FourierActivation>(f).frequency[1] = 2.5;
    EXPECT_THROW((void)analytic_second_moment(f), Error);
    std::get<FourierActivation>(f).frequency[1] = 1.0;  // duplicate of f_1
    EXPECT_THROW((void)analytic_second_moment(f), Error);
}

TEST(AnalyticGains, HermiteTheoremDegreeThree) {
    const auto g = analytic_gains(init_theorem(Family::Hermite, 3));
    EXPECT_NEAR(g.forward, 0.4, 1e-15);
    EXPECT_NEAR(g.backward, 0.4, 1e-15);
}

TEST(AnalyticGains, MatchTheoremFormulas) {
    for (int n = 1; n <= 10; ++n) {
        const auto h = analytic_gains(init_theorem(Family::Hermite, n));
        EXPECT_NEAR(h.forward, 1.0 / inverse_factorial_sum(n, 1), 1e-12) << n;
        EXPECT_NEAR(h.forward, h.backward, 1e-12) << n;
        const auto f = analytic_gains(init_theorem(Family::Fourier, n));
        EXPECT_NEAR(f.forward, 1.0 / inverse_factorial_sum(n, 2), 1e-12) << n;
        EXPECT_NEAR(f.forward, f.backward, 1e-12) << n;
    }
}

TEST(AnalyticGains, UnitGainVariantsTendToOne) {
    EXPECT_NEAR(bessel_i0_of_2(), 2.2795, 1e-4);
    EXPECT_NEAR(bessel_i0_of_2(), inverse_factorial_sum(30, 2), 1e-14);
    const auto f = analytic_gains(init_theorem(Family::Fourier, 12, InitVariant::UnitGain));
    EXPECT_NEAR(f.forward, 1.0, 1e-9);
    EXPECT_NEAR(f.backward, 1.0, 1e-9);
    const auto h = analytic_gains(init_theorem(Family::Hermite, 25, InitVariant::UnitGain));
    EXPECT_NEAR(h.forward, 1.0, 1e-12);
    EXPECT_NEAR(h.backward, 1.0, 1e-12);
    EXPECT_NEAR(std::numbers::e, 2.7182, 1e-4);
}

TEST(AnalyticGains, DegenerateActivations) {
    try {
        (void)analytic_gains(HermiteActivation{{1.0, 0.0, 0.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateActivation);
    }
    EXPECT_THROW((void)analytic_gains(HermiteActivation{{0.0, 0.0}}), Error);
}

TEST(Properties, ForwardBackwardEqualityCondition) {
    // E[F^2] = E[F'^2]  <=>  a0^2 = sum_{k>=1} (k-1)/k! a_k^2
    CounterRng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(10));
        std::vector<double> a(n + 1);
        for (double& v : a) v = rng.normal();
        double rhs = 0.0, fact = 1.0;
        for (int k = 1; k <= n; ++k) {
            fact *= k;
            rhs += (k - 1) / fact * a[k] * a[k];
        }
        const auto m = analytic_second_moment(HermiteActivation{a});
        EXPECT_NEAR(m.value - m.deriv, a[0] * a[0] - rhs, 1e-12 * std::max(1.0, m.value));
        a[0] = std::sqrt(rhs);
        const auto eq = analytic_second_moment(HermiteActivation{a});
        EXPECT_NEAR(eq.value, eq.deriv, 1e-12 * std::max(1.0, eq.value));
    }
}

TEST(MonteCarlo, ReluGainOfTwo) {
    const auto r = monte_carlo_gains(ClassicalActivation{ClassicalKind::ReLU}, InputDist::StdNormal, 1'000'000, 1);
    EXPECT_NEAR(r.mc_forward, 2.0, 0.02);
    EXPECT_NEAR(r.mc_backward, 2.0, 0.02);
    ASSERT_TRUE(r.rel_err_forward.has_value());
    EXPECT_LT(*r.rel_err_forward, 0.01);
}

TEST(MonteCarlo, TropicalDegreeSixFiniteDegreeGains) {
    // For a_k = 1: F(x) = sqrt2 max(0,x) + sqrt2/n, so under N(0,1)
    //   E[F^2]  = 1 + 4/(n sqrt(2 pi)) + 2/n^2   (forward gain ~0.757 at n = 6)
    //   E[F'^2] = 1                               (backward gain 1)
    const int n = 6;
    const auto r = monte_carlo_gains(init_theorem(Family::Tropical, n), InputDist::StdNormal, 1'000'000, 2);
    const double second = 1.0 + 4.0 / (n * std::sqrt(2.0 * std::numbers::pi)) + 2.0 / (n * n);
    EXPECT_NEAR(r.mc_second_moment / second, 1.0, 0.01);
    EXPECT_NEAR(r.mc_backward, 1.0, 0.15);
    EXPECT_NEAR(r.mc_forward, 1.0 / second, 0.01);
    EXPECT_FALSE(r.analytic_forward.has_value());
    EXPECT_FALSE(r.note.empty());
}

TEST(MonteCarlo, HermiteTheoremCrossCheck) {
    const auto r = monte_carlo_gains(init_theorem(Family::Hermite, 3), InputDist::StdNormal, 1'000'000, 3);
    ASSERT_TRUE(r.analytic_forward.has_value());
    const double ratio = r.mc_forward / *r.analytic_forward;
    EXPECT_GE(ratio, 0.99);
    EXPECT_LE(ratio, 1.01);
}

TEST(MonteCarlo, ErrorShrinksWithinThreeSigma) {
    const std::vector<Activation> acts{init_theorem(Family::Hermite, 3), init_theorem(Family::Hermite, 5),
                                       init_theorem(Family::Fourier, 4),
                                       Activation{ClassicalActivation{ClassicalKind::ReLU}}};
    for (const auto& act : acts) {
        const InputDist dist = natural_distribution(act);
        for (std::uint64_t n : {10'000ULL, 100'000ULL, 1'000'000ULL}) {
            const auto r = monte_carlo_gains(act, dist, n, 17);
            ASSERT_TRUE(r.rel_err_forward && r.rel_err_backward);
            const double bound_f = 3.0 / std::sqrt(static_cast<double>(n)) * r.cv_forward;
            const double bound_b = 3.0 / std::sqrt(static_cast<double>(n)) * r.cv_backward;
            EXPECT_LE(*r.rel_err_forward, bound_f) << family_name(family_of(act)) << " n=" << n;
            EXPECT_LE(*r.rel_err_backward, bound_b) << family_name(family_of(act)) << " n=" << n;
        }
    }
}

TEST(MonteCarlo, DeterministicAndIndependentOfWorkerCount) {
    const auto act = init_theorem(Family::Fourier, 6, InitVariant::UnitGain);
    const auto a = monte_carlo_gains(act, InputDist::UniformPi, 300'000, 99, 1);
    const auto b = monte_carlo_gains(act, InputDist::UniformPi, 300'000, 99, 4);
    const auto c = monte_carlo_gains(act, InputDist::UniformPi, 300'000, 99, 3);
    EXPECT_EQ(a.mc_second_moment, b.mc_second_moment);
    EXPECT_EQ(a.mc_deriv_second_moment, c.mc_deriv_second_moment);
    EXPECT_EQ(to_json_value(a).dump(), to_json_value(b).dump());
    const auto d = monte_carlo_gains(act, InputDist::UniformPi, 300'000, 100, 1);
    EXPECT_NE(a.mc_second_moment, d.mc_second_moment);
}

TEST(MonteCarlo, RejectsTooFewSamples) { EXPECT_THROW(monte_carlo_gains(init_theorem(Family::Hermite, 3), InputDist::StdNormal, 9999, 0), Error); }

TEST(MonteCarlo, ExcludesNonFiniteSamples) {
    // 1e308 * He_3(x) overflows away from the roots of He_3; those draws are counted and skipped.
    const auto r = monte_carlo_gains(HermiteActivation{{0, 0, 0, 1e308}}, InputDist::StdNormal, 20'000, 5);
    EXPECT_GT(r.nonfinite, 0u);
    EXPECT_LT(r.nonfinite, 20'000u);
}

TEST(WeightStd, HeStyle) {
    EXPECT_NEAR(he_style_weight_std(512, 2.0), 0.0625, 1e-15);
    EXPECT_EQ(he_style_weight_std(1, 1.0), 1.0);
    const double hermite_gain = analytic_gains(init_theorem(Family::Hermite, 3)).forward;
    EXPECT_NEAR(he_style_weight_std(64, hermite_gain), 0.07906, 1e-5);
    EXPECT_THROW(he_style_weight_std(0, 1.0), Error);
    EXPECT_THROW(he_style_weight_std(4, -1.0), Error);
}

TEST(InitTheorem, Coefficients) {
    const auto h = std::get<HermiteActivation>(init_theorem(Family::Hermite, 3));
    EXPECT_NEAR(h.a[0], std::sqrt(5.0 / 6.0), 1e-15);
    EXPECT_EQ(h.a[1], 1.0);
    EXPECT_EQ(h.a[3], 1.0);

    const auto f = std::get<FourierActivation>(init_theorem(Family::Fourier, 6, InitVariant::UnitGain));
    const double s = std::sqrt(2.2795);
    for (double amp : f.amplitude) EXPECT_NEAR(amp, 1.0 / s, 1e-4);
    for (int k = 0; k < 6; ++k) {
        EXPECT_EQ(f.frequency[k], k + 1.0);
        EXPECT_NEAR(f.phase[k], std::numbers::pi / 4, 1e-15);
    }

    const auto t = std::get<TropicalActivation>(init_theorem(Family::Tropical, 6));
    EXPECT_EQ(t.a, std::vector<double>(7, 1.0));
    EXPECT_NEAR(t.scale, std::numbers::sqrt2 / 6, 1e-16);

    const auto h0 = std::get<HermiteActivation>(init_theorem(Family::Hermite, 0));
    EXPECT_EQ(h0.a.size(), 1u);
    EXPECT_THROW(init_theorem(Family::Fourier, 0), Error);
}

TEST(GainForInit, UsesClosedFormOrMonteCarlo) {
    EXPECT_EQ(forward_gain_for_init(ClassicalActivation{ClassicalKind::ReLU}), 2.0);
    EXPECT_NEAR(forward_gain_for_init(init_theorem(Family::Hermite, 3)), 0.4, 1e-15);
    const double tropical = forward_gain_for_init(init_theorem(Family::Tropical, 6));
    EXPECT_NEAR(tropical, 0.757, 0.01);
    EXPECT_EQ(tropical, forward_gain_for_init(init_theorem(Family::Tropical, 6)));
}
