#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "quadbench/heat.hpp"

using namespace quadbench;

namespace {

/// Closed form A_n = 128 (12 - pi^2 m^2) / (pi^5 m^5), m = 2n - 1, at 64 digits.
double closed_form_coefficient(int n) {
    const mpfr_prec_t bits = PrecisionContext::high_precision(64).binary_bits();
    const HpReal pi = HpReal::pi(bits);
    const HpReal m(2.0 * n - 1.0, bits);
    const HpReal m2 = m * m;
    const HpReal pi2 = pi * pi;
    const HpReal num = 128.0 * (12.0 - pi2 * m2);
    const HpReal den = pi2 * pi2 * pi * m2 * m2 * m;
    return to_double(num / den).value;
}

/// sum_{n > N} |A_n|: exact terms up to n = 5000, then the bound
/// |A_n| <= 128 / (pi^3 (2n-1)^3) summed as an integral.
double tail_bound(int N) {
    constexpr int M = 5000;
    double s = 128.0 / std::pow(M_PI, 3) / (4.0 * (2.0 * M - 1) * (2.0 * M - 1));
    for (int n = M; n > N; --n) s += std::abs(closed_form_coefficient(n));
    return s;
}

const FourierSeries& clean50() {
    static const FourierSeries s = compute_series(HeatConfig::clean(100000.0, 50));
    return s;
}

const FourierSeries& corrupted50() {
    static const FourierSeries s = compute_series(HeatConfig::corrupted(100000.0, 50));
    return s;
}

}  // namespace

TEST(ClosedForm, ReproducesTheTabulatedCoefficients) {
    EXPECT_NEAR(closed_form_coefficient(1), 0.891088548280465, 5e-16);
    EXPECT_NEAR(closed_form_coefficient(2), -0.132240669593892, 5e-16);
}

TEST(FourierCoefficient, HighPrecisionGk15MatchesClosedForm) {
    for (int n = 1; n <= 10; ++n) {
        for (double delta : {1000.0, 100000.0, 250000.0}) {
            const auto [a, meta] = fourier_coefficient(n, HeatConfig::clean(delta));
            EXPECT_NEAR(a, closed_form_coefficient(n), 1e-14) << "n=" << n << " delta=" << delta;
            EXPECT_TRUE(meta.warnings.empty());
        }
    }
    EXPECT_NEAR(fourier_coefficient(1, HeatConfig::clean(1000.0)).first, 0.891088548280465, 1e-14);
    EXPECT_NEAR(fourier_coefficient(2, HeatConfig::clean(1000.0)).first, -0.132240669593892, 1e-14);
}

TEST(FourierCoefficient, LobattoAgreesWithGk15InHighPrecision) {
    HeatConfig lob = HeatConfig::clean(1000.0);
    lob.coeff_rule = RuleId::lobatto();
    for (int n = 1; n <= 10; ++n) {
        const double g = fourier_coefficient(n, HeatConfig::clean(1000.0)).first;
        EXPECT_NEAR(fourier_coefficient(n, lob).first, g, 1e-12) << "n=" << n;
    }
}

TEST(FourierCoefficient, CollapsedDoublePathGivesZero) {
    const auto [a, meta] = fourier_coefficient(1, HeatConfig::corrupted(250000.0));
    EXPECT_EQ(a, 0.0);
    EXPECT_TRUE(meta.warnings.empty());
}

TEST(FourierCoefficient, WarningsPropagateIntoMetadata) {
    const auto [a, meta] = fourier_coefficient(1, HeatConfig::corrupted(100000.0));
    EXPECT_TRUE(meta.warnings.contains(Warning::MaxIntervals));
    EXPECT_TRUE(corrupted50().warnings().contains(Warning::MaxIntervals));
    EXPECT_TRUE(clean50().warnings().empty());
}

// The coefficients decay like n^-3: phi''(+-1) = 8 != 0, so the sine series
// of this quartic converges no faster than that.
TEST(FourierCoefficient, CleanCoefficientsObeyAnInverseCubeEnvelope) {
    const auto& s = clean50();
    double C = 0.0;
    for (int n = 1; n <= 3; ++n) C = std::max(C, std::abs(s.coefficient(n)) * n * n * n);
    for (int n = 4; n <= 50; ++n) {
        EXPECT_LE(std::abs(s.coefficient(n)), C / (n * n * n)) << "n=" << n;
        EXPECT_NEAR(s.coefficient(n), closed_form_coefficient(n), 1e-14) << "n=" << n;
    }
    // An n^-5 envelope fitted the same way is already violated at n = 4.
    double C5 = 0.0;
    for (int n = 1; n <= 3; ++n) C5 = std::max(C5, std::abs(s.coefficient(n)) * std::pow(n, 5));
    EXPECT_GT(std::abs(s.coefficient(4)), C5 / std::pow(4, 5));
}

TEST(Mode, InitialTimeAndBoundaries) {
    for (int n = 1; n <= 5; ++n) {
        EXPECT_DOUBLE_EQ(mode(n, 0.0, 0.3, 0.7, 0.1), 0.7 * basis_g(n, 0.3));
        EXPECT_NEAR(mode(n, 0.4, -1.0, 1.0, 0.1), 0.0, 1e-15);
        EXPECT_NEAR(mode(n, 0.4, 1.0, 1.0, 0.1), 0.0, 1e-14);
    }
}

TEST(Mode, MatchesHighPrecisionScalarOracle) {
    const mpfr_prec_t bits = PrecisionContext::high_precision(64).binary_bits();
    const HpReal half_pi = HpReal::pi(bits) / 2.0;
    const HpReal A1(0.891088548280465, bits);
    const double oracle = to_double(A1 * exp(-0.1 * half_pi * half_pi)).value;
    EXPECT_NEAR(mode(1, 1.0, 0.0, 0.891088548280465, 0.1), oracle, 2e-16);
}

TEST(SolutionGrid, CleanInitialRowIsWithinTheTailBound) {
    const auto g = solution_grid(clean50(), 0.1, {0.0}, default_x_grid());
    const double bound = tail_bound(50);
    EXPECT_LE(bound, 2e-3);
    EXPECT_LE(initial_error(g), bound);
}

TEST(SolutionGrid, CorruptedInitialRowIsFarWorse) {
    const auto clean = solution_grid(clean50(), 0.1, {0.0}, default_x_grid());
    const auto bad = solution_grid(corrupted50(), 0.1, {0.0}, default_x_grid());
    EXPECT_GT(initial_error(bad), 10.0 * initial_error(clean));
}

TEST(SolutionGrid, BoundaryColumnsVanish) {
    for (const FourierSeries* s : {&clean50(), &corrupted50()}) {
        const auto g = solution_grid(*s, 0.1, default_t_grid(), default_x_grid());
        const double tol = 1e-12 * s->abs_sum();
        for (std::size_t i = 0; i < g.t.size(); ++i) {
            EXPECT_LE(std::abs(g.at(i, 0)), tol);
            EXPECT_LE(std::abs(g.at(i, g.x.size() - 1)), tol);
        }
    }
}

TEST(SolutionGrid, SupNormDecaysInTime) {
    const auto g = solution_grid(clean50(), 0.1, {0.0, 0.25, 0.5, 1.0}, default_x_grid());
    double previous = HUGE_VAL;
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        double sup = 0.0;
        for (std::size_t j = 0; j < g.x.size(); ++j) sup = std::max(sup, std::abs(g.at(i, j)));
        EXPECT_LE(sup, previous) << "t=" << g.t[i];
        previous = sup;
    }
}

TEST(SolutionGrid, SingleTermEqualsTheMode) {
    const auto s = compute_series(HeatConfig::clean(1000.0, 1));
    const auto g = solution_grid(s, 0.1, {0.0, 0.5, 1.0}, uniform_grid(-1.0, 1.0, 11));
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        for (std::size_t j = 0; j < g.x.size(); ++j) {
            EXPECT_EQ(g.at(i, j), mode(1, g.t[i], g.x[j], s.coefficient(1), 0.1));
        }
    }
}

TEST(SolutionGrid, CollapsedCoefficientsGiveAZeroSolution) {
    const auto s = compute_series(HeatConfig::corrupted(250000.0, 50));
    const auto g = solution_grid(s, 0.1, default_t_grid(), default_x_grid());
    for (double u : g.u) ASSERT_EQ(u, 0.0);
}

TEST(SolutionGrid, RejectsPointsOutsideTheDomain) {
    EXPECT_THROW(solution_grid(clean50(), 0.1, {1.5}, {0.0}), std::invalid_argument);
    EXPECT_THROW(solution_grid(clean50(), 0.1, {0.5}, {-1.1}), std::invalid_argument);
    EXPECT_THROW(solution_grid(clean50(), 0.0, {0.5}, {0.0}), std::invalid_argument);
}

TEST(BiasProfile, IdenticalGridsHaveNoBias) {
    const auto g = solution_grid(clean50(), 0.1, default_t_grid(), default_x_grid());
    for (const auto& [t, d] : bias_profile(g, g)) EXPECT_EQ(d, 0.0) << "t=" << t;
}

TEST(BiasProfile, BiasIsLargestAtTheStart) {
    const auto t = default_t_grid();
    const auto x = default_x_grid();
    const auto p = bias_profile(solution_grid(clean50(), 0.1, t, x), solution_grid(corrupted50(), 0.1, t, x));
    ASSERT_EQ(p.size(), t.size());
    EXPECT_GT(p.front().second, p.back().second);
    for (const auto& [ti, d] : p) EXPECT_LE(d, p.front().second) << "t=" << ti;
}

TEST(BiasProfile, MoreModesDoNotRepairCorruptedCoefficients) {
    // Measured: t=0 sup error 0.1924 at N=50 and 0.2520 at N=500; the extra
    // corrupted coefficients add noise instead of removing truncation error.
    const auto x = default_x_grid();
    const auto clean = solution_grid(compute_series(HeatConfig::clean(100000.0, 500)), 0.1, {0.0}, x);
    const auto bad50 = solution_grid(compute_series(HeatConfig::corrupted(100000.0, 50)), 0.1, {0.0}, x);
    const auto bad500 = solution_grid(compute_series(HeatConfig::corrupted(100000.0, 500)), 0.1, {0.0}, x);
    const double e50 = initial_error(bad50);
    const double e500 = initial_error(bad500);
    EXPECT_NEAR(e50, 0.1924, 5e-4);
    EXPECT_NEAR(e500, 0.2520, 5e-4);
    EXPECT_GT(e500, 0.8 * e50);
    const double b50 = bias_profile(solution_grid(compute_series(HeatConfig::clean(100000.0, 50)), 0.1, {0.0}, x),
                                    bad50)[0].second;
    const double b500 = bias_profile(clean, bad500)[0].second;
    EXPECT_GT(b50, 0.1);
    EXPECT_GT(b500, 0.1);
}

TEST(BiasProfile, ShapeMismatchThrows) {
    const auto a = solution_grid(clean50(), 0.1, {0.0, 1.0}, default_x_grid());
    const auto b = solution_grid(clean50(), 0.1, {0.0}, default_x_grid());
    EXPECT_THROW(bias_profile(a, b), std::invalid_argument);
}

TEST(Series, ParallelAndSerialAgree) {
    const HeatConfig cfg = HeatConfig::corrupted(10000.0, 12);
    const auto a = compute_series(cfg, 1);
    const auto b = compute_series(cfg, 4);
    EXPECT_EQ(a.coefficients, b.coefficients);
}

TEST(HeatConfig, Validation) {
    HeatConfig c = HeatConfig::clean(1000.0);
    EXPECT_NO_THROW(c.validate());
    c.alpha = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = HeatConfig::clean(1000.0, 0);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = HeatConfig::clean(1000.0);
    c.coeff_ctx = PrecisionContext::double_precision();
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = HeatConfig::clean(1000.0);
    c.variant = IntegrandVariant::FinanceHighPrec;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(fourier_coefficient(0, HeatConfig::clean(1000.0)), std::invalid_argument);
}

TEST(Export, SolutionCsvRoundTrips) {
    const auto g = solution_grid(clean50(), 0.1, {0.0, 0.5, 1.0}, uniform_grid(-1.0, 1.0, 7));
    std::stringstream ss;
    write_solution_csv(ss, g);
    EXPECT_EQ(ss.str().substr(0, 17), "# alpha=0.1\nt,x,u");
    const auto back = read_solution_csv(ss);
    EXPECT_EQ(back.t, g.t);
    EXPECT_EQ(back.x, g.x);
    EXPECT_EQ(back.u, g.u);
    EXPECT_EQ(back.alpha, 0.1);
}

TEST(Export, CoefficientJsonCarriesConfigAndWarnings) {
    const HeatConfig cfg = HeatConfig::clean(1000.0, 3);
    const auto s = compute_series(cfg);
    const auto j = coefficients_json(cfg, s);
    EXPECT_EQ(j["alpha"], 0.1);
    EXPECT_EQ(j["N"], 3);
    EXPECT_EQ(j["rule"], "gk15");
    EXPECT_EQ(j["regime"], "hiprec(32)");
    ASSERT_EQ(j["coefficients"].size(), 3u);
    EXPECT_EQ(j["coefficients"][0].get<double>(), s.coefficient(1));
    EXPECT_EQ(j["warnings"][0], "");
}
