#include <gmpxx.h>
#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "quadbench/integrands.hpp"
#include "quadbench/precision.hpp"
#include "quadbench/quadrature.hpp"

using namespace quadbench;

namespace {

constexpr double kSixteenFifteenths = 16.0 / 15.0;

/// Polynomial with double coefficients c[0] + c[1] x + ...
struct Poly {
    std::vector<double> c;

    double operator()(double x) const {
        double s = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
        return s;
    }

    /// Exact integral over [a,b] of the polynomial whose coefficients are the
    /// (exactly representable) doubles c[k].
    mpq_class exact_integral(double a, double b) const {
        const mpq_class qa(a), qb(b);
        mpq_class pa = qa, pb = qb, s = 0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            s += mpq_class(c[k]) * (pb - pa) / static_cast<unsigned long>(k + 1);
            pa *= qa;
            pb *= qb;
        }
        return s;
    }
};

double ulp_distance(double v, const mpq_class& exact) {
    const double e = mpq_class(exact).get_d();
    const double ulp = std::nextafter(std::abs(e), HUGE_VAL) - std::abs(e);
    return std::abs(mpq_class(mpq_class(v) - exact).get_d()) / ulp;
}

Poly random_poly(std::mt19937_64& rng, int degree) {
    std::uniform_real_distribution<double> coef(0.0, 1.0);
    Poly p;
    for (int k = 0; k <= degree; ++k) p.c.push_back(coef(rng));
    return p;
}

/// Legendre P_7 and its derivative at x, in MPFR.
std::pair<HpReal, HpReal> legendre7(const HpReal& x) {
    HpReal p0(1.0, x.precision()), p1 = x;
    for (int n = 1; n < 7; ++n) {
        HpReal p2 = ((2.0 * n + 1.0) * x * p1 - static_cast<double>(n) * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    const HpReal dp = 7.0 * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace

// ---------------------------------------------------------------------------
// rule constants

TEST(GaussKronrodConstants, GaussNodesAndWeightsMatchLegendreRoots) {
    const mpfr_prec_t bits = 200;
    for (std::size_t j = 0; j < 3; ++j) {
        HpReal x(detail::kKronrodNodes[2 * j + 1], bits);
        for (int it = 0; it < 8; ++it) {
            auto [p, dp] = legendre7(x);
            x = x - p / dp;
        }
        EXPECT_EQ(to_double(x).value, detail::kKronrodNodes[2 * j + 1]) << "node " << j;
        auto [p, dp] = legendre7(x);
        const HpReal w = 2.0 / ((1.0 - x * x) * dp * dp);
        EXPECT_EQ(to_double(w).value, detail::kGaussWeights[j]) << "weight " << j;
    }
    // centre weight: 2 / P_7'(0)^2
    auto [p, dp] = legendre7(HpReal(0.0, bits));
    EXPECT_EQ(to_double(2.0 / (dp * dp)).value, detail::kGaussWeights[3]);
}

TEST(GaussKronrodConstants, KronrodRuleIntegratesMonomialsToDegree22) {
    for (unsigned k = 0; k <= 22; ++k) {
        mpq_class sum = 0;
        for (std::size_t j = 0; j < 8; ++j) {
            const mpq_class x(detail::kKronrodNodes[j]);
            mpq_class xk = 1;
            for (unsigned i = 0; i < k; ++i) xk *= x;
            const mpq_class w(detail::kKronrodWeights[j]);
            sum += (j == 7) ? mpq_class(w * xk) : mpq_class(w * (xk + ((k % 2 == 0) ? xk : mpq_class(-xk))));
        }
        const mpq_class exact = (k % 2 == 0) ? mpq_class(2, k + 1) : mpq_class(0);
        EXPECT_LT(std::abs(mpq_class(sum - exact).get_d()), 4e-16) << "k=" << k;
    }
}

// ---------------------------------------------------------------------------
// exactness

TEST(Exactness, GaussKronrodOnRandomPolynomialsUpToDegree22) {
    // On the reference interval the nodes are the tabulated constants, so the
    // only error is the rounding of the weighted sum. With signed coefficients
    // the integral can cancel, so the ulp is taken at the scale of the
    // integrand's magnitude, sum |c_k| * 2/(k+1).
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> degree(0, 22);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Poly p;
        const int deg = degree(rng);
        for (int k = 0; k <= deg; ++k) p.c.push_back(coef(rng));
        mpq_class scale = 0;
        for (int k = 0; k <= deg; ++k) scale += abs(mpq_class(p.c[k])) * mpq_class(2, k + 1);
        const mpq_class exact = p.exact_integral(-1.0, 1.0);
        const double ulp = std::nextafter(scale.get_d(), HUGE_VAL) - scale.get_d();
        const auto single = gk15_panel(p, -1.0, 1.0);
        EXPECT_LE(std::abs(mpq_class(mpq_class(single.kronrod) - exact).get_d()), 8.0 * ulp) << "trial " << trial;
        const auto r = gauss_kronrod_15(p, -1.0, 1.0);
        EXPECT_LE(std::abs(mpq_class(mpq_class(r.value) - exact).get_d()), 8.0 * ulp) << "trial " << trial;
        EXPECT_TRUE(r.warnings.empty());
    }
}

TEST(Exactness, GaussKronrodOnAffineIntervalsIsLimitedByNodeRounding) {
    // On [a,b] the mapped nodes are rounded to double, which perturbs x^22 by
    // up to ~11 ulp on its own; positive coefficients keep the sum well
    // conditioned so the remaining error is that node rounding.
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> degree(0, 22);
    std::uniform_real_distribution<double> ends(0.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Poly p = random_poly(rng, degree(rng));
        double a = ends(rng), b = ends(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-3) b = a + 0.5;
        const auto r = gauss_kronrod_15(p, a, b);
        EXPECT_LE(ulp_distance(r.value, p.exact_integral(a, b)), 32.0) << "trial " << trial;
        EXPECT_TRUE(r.warnings.empty());
    }
}

TEST(Exactness, SimpsonOnCubics) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Poly p = random_poly(rng, 3);
        const auto r = adaptive_simpson(p, -1.0, 2.0);
        EXPECT_LE(ulp_distance(r.value, p.exact_integral(-1.0, 2.0)), 8.0);
        EXPECT_EQ(r.fevals, 5u);  // accepted on the first panel
    }
}

TEST(Exactness, LobattoOnQuintics) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Poly p = random_poly(rng, 5);
        const auto r = adaptive_lobatto(p, 0.0, 3.0);
        EXPECT_LE(ulp_distance(r.value, p.exact_integral(0.0, 3.0)), 8.0);
        EXPECT_EQ(r.fevals, 7u);
    }
}

TEST(Exactness, TrapezoidOnLinears) {
    const Poly p{{0.375, -1.25}};
    for (double h : {1.0, 0.5, 0.01, 1e-4}) {
        const auto r = trapezoid(p, -1.0, 1.0, h);
        EXPECT_LE(ulp_distance(r.value, p.exact_integral(-1.0, 1.0)), 64.0) << "h=" << h;
    }
}

// ---------------------------------------------------------------------------
// the quartic benchmark

TEST(Quartic, HighPrecisionAndExactVariantsGiveSixteenFifteenths) {
    for (double delta : {1000.0, 10000.0, 100000.0, 250000.0}) {
        for (auto v : {IntegrandVariant::QuarticHighPrec, IntegrandVariant::QuarticExact}) {
            const QuarticIntegrand f(v, QuarticParams{delta});
            for (auto rule : {RuleId::gk15(), RuleId::simpson(), RuleId::lobatto()}) {
                const auto r = integrate(f, -1.0, 1.0, rule);
                EXPECT_NEAR(r.value, kSixteenFifteenths, 1e-12) << rule.name() << " delta=" << delta;
                EXPECT_TRUE(r.warnings.empty());
            }
            EXPECT_NEAR(trapezoid(f, -1.0, 1.0, 0.01).value, kSixteenFifteenths, 1e-4);
        }
    }
}

// Rational oracle: the composite trapezoid sum on the exact grid k/100.
TEST(Quartic, TrapezoidMatchesExactRationalCompositeSum) {
    mpq_class sum = 0;
    for (int k = -100; k <= 100; ++k) {
        const mpq_class x(k, 100);
        const mpq_class y = (x - 1) * (x - 1) * (x + 1) * (x + 1);
        sum += (k == -100 || k == 100) ? mpq_class(y / 2) : y;
    }
    sum /= 100;
    const double oracle = sum.get_d();
    EXPECT_NEAR(oracle, 1.066666666, 1e-15);  // 16/15 - h^2 (f'(1) - f'(-1)) / 12 + O(h^4)
    const auto r = trapezoid(QuarticIntegrand(IntegrandVariant::QuarticExact, {}), -1.0, 1.0, 0.01);
    EXPECT_NEAR(r.value, oracle, 1e-9);
    EXPECT_EQ(r.fevals, 201u);
}

// The comparison table's double-path trapezoid values are reproduced by the
// 20001-point grid (h = 1e-4); see README.
TEST(Quartic, DoubleTrapezoidOnFineGridReproducesTableValues) {
    const struct {
        double delta;
        double expected;
    } cases[] = {{1000.0, 1.066666666650391}, {10000.0, 1.066667380000000}, {100000.0, 1.071808512000000}};
    for (const auto& c : cases) {
        const QuarticIntegrand f(IntegrandVariant::QuarticDouble, QuarticParams{c.delta});
        const auto r = trapezoid(f, -1.0, 1.0, 1e-4);
        EXPECT_NEAR(r.value, c.expected, 1e-11) << "delta=" << c.delta;
        EXPECT_EQ(r.fevals, 20001u);
    }
}

TEST(Quartic, DoublePathFailuresAtDelta100000) {
    const QuarticIntegrand f(IntegrandVariant::QuarticDouble, QuarticParams{100000.0});
    const auto gk = gauss_kronrod_15(f, -1.0, 1.0);
    EXPECT_TRUE(gk.warnings.contains(Warning::MaxIntervals));
    EXPECT_GT(std::abs(gk.value - kSixteenFifteenths), 4e-3);

    for (auto rule : {RuleId::simpson(), RuleId::lobatto()}) {
        const auto r = integrate(f, -1.0, 1.0, rule);
        EXPECT_TRUE(r.warnings.contains(Warning::MaxFevals)) << rule.name();
        EXPECT_GE(r.fevals, 2000u);
        EXPECT_LE(r.fevals, Limits{}.max_fevals);
        EXPECT_GT(std::abs(r.value - kSixteenFifteenths), 4e-3) << rule.name();
    }
}

TEST(Quartic, CollapsedIntegrandIsSilentlyZero) {
    const QuarticIntegrand f(IntegrandVariant::QuarticDouble, QuarticParams{250000.0});
    for (auto rule : {RuleId::gk15(), RuleId::simpson(), RuleId::lobatto(), RuleId::trapezoid(0.01)}) {
        const auto r = integrate(f, -1.0, 1.0, rule);
        EXPECT_EQ(r.value, 0.0) << rule.name();
        EXPECT_TRUE(r.warnings.empty()) << rule.name();
    }
}

// ---------------------------------------------------------------------------
// driver properties

TEST(Driver, Deterministic) {
    const QuarticIntegrand f(IntegrandVariant::QuarticDouble, QuarticParams{10000.0});
    for (auto rule : {RuleId::gk15(), RuleId::simpson(), RuleId::lobatto(), RuleId::trapezoid(0.01)}) {
        const auto a = integrate(f, -1.0, 1.0, rule);
        const auto b = integrate(f, -1.0, 1.0, rule);
        EXPECT_EQ(a.value, b.value);
        EXPECT_EQ(a.error_estimate, b.error_estimate);
        EXPECT_EQ(a.fevals, b.fevals);
        EXPECT_EQ(a.warnings, b.warnings);
    }
}

TEST(Driver, AdditiveOverSubintervals) {
    const auto f = [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); };
    for (auto rule : {RuleId::gk15(), RuleId::simpson(), RuleId::lobatto()}) {
        const double whole = integrate(f, -1.0, 2.0, rule).value;
        const double parts = integrate(f, -1.0, 0.3, rule).value + integrate(f, 0.3, 2.0, rule).value;
        EXPECT_NEAR(whole, parts, 1e-9) << rule.name();
    }
}

TEST(Driver, CostIsMonotoneInTolerance) {
    const auto runge = [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
    const double exact = 2.0 * std::atan(5.0) / 5.0;
    for (auto rule : {RuleId::gk15(), RuleId::simpson(), RuleId::lobatto()}) {
        std::size_t previous = 0;
        for (double rel : {1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
            const auto r = integrate(runge, -1.0, 1.0, rule, Tolerances{1e-14, rel});
            EXPECT_GE(r.fevals, previous) << rule.name() << " rel=" << rel;
            EXPECT_NEAR(r.value, exact, 10.0 * rel) << rule.name();
            previous = r.fevals;
        }
    }
}

TEST(Driver, ReportedFevalsMatchAnExternalCounter) {
    for (auto rule : {RuleId::gk15(), RuleId::simpson(), RuleId::lobatto(), RuleId::trapezoid(0.05)}) {
        std::size_t calls = 0;
        const auto f = [&calls](double x) {
            ++calls;
            return std::sin(5.0 * x) + x * x;
        };
        const auto r = integrate(f, -1.0, 1.0, rule);
        EXPECT_EQ(r.fevals, calls) << rule.name();
    }
}

TEST(Driver, BudgetsAreRespected) {
    const QuarticIntegrand f(IntegrandVariant::QuarticDouble, QuarticParams{100000.0});
    const Limits small{64, 500};
    const auto gk = gauss_kronrod_15(f, -1.0, 1.0, {}, small);
    EXPECT_TRUE(gk.warnings.contains(Warning::MaxIntervals));
    EXPECT_LE(gk.fevals, 15u * (2u * 64u));
    const auto s = adaptive_simpson(f, -1.0, 1.0, {}, small);
    EXPECT_LE(s.fevals, 500u);
    const auto l = adaptive_lobatto(f, -1.0, 1.0, {}, small);
    EXPECT_LE(l.fevals, 500u);
}

TEST(Driver, NonFiniteValuesRaiseAWarning) {
    const auto f = [](double x) { return 1.0 / x; };
    for (auto rule : {RuleId::gk15(), RuleId::simpson(), RuleId::lobatto(), RuleId::trapezoid(0.5)}) {
        const auto r = integrate(f, -1.0, 1.0, rule);
        EXPECT_TRUE(r.warnings.contains(Warning::NonFiniteValue)) << rule.name();
    }
}

TEST(Driver, EvaluationFlagsBecomeWarnings) {
    const auto f = [](double) { return Flagged<double>{1.0, kFlagRadicandClamped}; };
    const auto r = gauss_kronrod_15(f, 0.0, 1.0);
    EXPECT_TRUE(r.warnings.contains(Warning::RadicandClamped));
    EXPECT_DOUBLE_EQ(r.value, 1.0);
}

TEST(Driver, ComplexIntegrands) {
    const auto f = [](double x) { return std::exp(std::complex<double>(0.0, x)); };
    const std::complex<double> exact(std::sin(1.0), 1.0 - std::cos(1.0));
    for (auto rule : {RuleId::gk15(), RuleId::simpson(), RuleId::lobatto()}) {
        EXPECT_LT(std::abs(integrate(f, 0.0, 1.0, rule).value - exact), 1e-10) << rule.name();
    }
}

TEST(Driver, RejectsInvalidInput) {
    const auto f = [](double x) { return x; };
    EXPECT_THROW(gauss_kronrod_15(f, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(adaptive_simpson(f, 2.0, 1.0), std::invalid_argument);
    EXPECT_THROW(adaptive_lobatto(f, 0.0, HUGE_VAL), std::invalid_argument);
    EXPECT_THROW(gauss_kronrod_15(f, 0.0, 1.0, Tolerances{0.0, 1e-8}), std::invalid_argument);
    EXPECT_THROW(trapezoid(f, -1.0, 1.0, 0.3), std::invalid_argument);
    EXPECT_THROW(trapezoid(f, -1.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(trapezoid(f, -1.0, 1.0, 3.0), std::invalid_argument);
}

TEST(Driver, TrapezoidStepCounts) {
    EXPECT_EQ(trapezoid_panels(-1.0, 1.0, 0.01), 200u);
    EXPECT_EQ(trapezoid_panels(-1.0, 1.0, 1e-4), 20000u);
    EXPECT_EQ(trapezoid_panels(0.0, 100.0, 0.001), 100000u);
}

TEST(Warnings, SetRoundTripsThroughItsText) {
    WarningSet w;
    EXPECT_EQ(w.to_string(), "");
    EXPECT_EQ(WarningSet::parse(""), w);
    w.insert(Warning::NonFiniteValue);
    w.insert(Warning::MaxIntervals);
    EXPECT_EQ(w.to_string(), "MaxIntervals;NonFiniteValue");
    EXPECT_EQ(WarningSet::parse(w.to_string()), w);
    EXPECT_THROW(WarningSet::parse("Bogus"), std::invalid_argument);
    EXPECT_NE(warning_message(Warning::MaxFevals).find("Maximum function count exceeded"), std::string::npos);
    EXPECT_NE(warning_message(Warning::MaxIntervals).find("maximum number of intervals"), std::string::npos);
}

TEST(Tolerances, TargetIsTheLargerOfAbsoluteAndRelative) {
    const Tolerances t;
    EXPECT_EQ(t.abs_tol, 1e-12);
    EXPECT_EQ(t.rel_tol, 1e-8);
    EXPECT_EQ(t.target(1.0), 1e-8);
    EXPECT_EQ(t.target(1e-6), 1e-12);
    EXPECT_THROW((Tolerances{-1.0, 1e-8}.validate()), std::invalid_argument);
}
