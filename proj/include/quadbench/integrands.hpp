#pragma once

// The two integrand families: the cancellation-prone quartic
//     phi(x) = (b(x)^2 - a(x)^2) / delta,  a = x + delta^2,
//     b = sqrt(a^2 + delta (x-1)^2 (x+1)^2),
// which equals (x-1)^2 (x+1)^2 in exact arithmetic, and the inverse-Fourier
// pricing integrand f(k) of the approximate fractional SV jump-diffusion
// model on the contour k = u + i/2. Both are evaluated in the arithmetic of a
// PrecisionContext and rounded to double on return.

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quadbench/complex.hpp"
#include "quadbench/precision.hpp"

namespace quadbench {

struct QuarticParams {
    double delta = 1000.0;

    void validate() const {
        if (!(delta > 0.0) || !std::isfinite(delta)) {
            throw std::invalid_argument("delta must be positive and finite");
        }
    }
};

/// Parameters of the pricing integrand. sigma is deliberately left for the
/// caller to choose; it is the knob that drives the cancellation.
struct FinanceParams {
    // market data (FTSE 100, 8 January 2014)
    double S = 6721.8;
    double K = 6250.0;
    double r = 0.009;
    double tau = 0.120548;
    // model
    double kappa = 1.5;
    double theta = 0.02;
    double sigma = 1e-3;
    double rho = -0.6;
    double eps = 1.0 / 252.0;
    double H = 0.9;
    double lambda = 0.2;
    double muJ = -0.05;
    double sigmaJ = 0.1;
    double v = 0.02;

    static FinanceParams defaults(double sigma) {
        FinanceParams p;
        p.sigma = sigma;
        return p;
    }

    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("invalid finance parameters: ") + what);
        };
        require(tau > 0.0, "tau > 0");
        require(K > 0.0, "K > 0");
        require(S > 0.0, "S > 0");
        require(sigma > 0.0, "sigma > 0");
        require(eps > 0.0, "eps > 0");
        require(sigmaJ >= 0.0, "sigmaJ >= 0");
        require(std::abs(rho) <= 1.0, "|rho| <= 1");
        require(H > 0.0 && H < 1.0, "0 < H < 1");
        require(kappa > 0.0, "kappa > 0");
        require(lambda >= 0.0, "lambda >= 0");
    }

    double X() const { return std::log(S / K) + r * tau; }
    double B() const { return std::pow(eps, H - 0.5) * sigma; }
    double beta() const { return std::exp(muJ + sigmaJ * sigmaJ / 2.0) - 1.0; }
};

enum class IntegrandVariant { QuarticDouble, QuarticHighPrec, QuarticExact, FinanceDouble, FinanceHighPrec };

inline bool is_quartic(IntegrandVariant v) {
    return v == IntegrandVariant::QuarticDouble || v == IntegrandVariant::QuarticHighPrec ||
           v == IntegrandVariant::QuarticExact;
}

/// Short name used on the command line and in CSV/JSON output.
inline std::string_view variant_name(IntegrandVariant v) {
    switch (v) {
        case IntegrandVariant::QuarticDouble: return "double";
        case IntegrandVariant::QuarticHighPrec: return "hiprec";
        case IntegrandVariant::QuarticExact: return "exact";
        case IntegrandVariant::FinanceDouble: return "double";
        case IntegrandVariant::FinanceHighPrec: return "hiprec";
    }
    return "?";
}

/// Name in the style of the comparison tables (phi_double, phi_vpa, ...).
inline std::string_view variant_label(IntegrandVariant v) {
    switch (v) {
        case IntegrandVariant::QuarticDouble: return "phi_double";
        case IntegrandVariant::QuarticHighPrec: return "phi_vpa";
        case IntegrandVariant::QuarticExact: return "phi_exact";
        case IntegrandVariant::FinanceDouble: return "f_double";
        case IntegrandVariant::FinanceHighPrec: return "f_vpa";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// quartic

/// The literal (b^2 - a^2)/delta in the given arithmetic. Do not simplify:
/// the cancellation is the point.
template <class Arith>
Flagged<double> phi_delta(double x, const QuarticParams& p, const Arith& ar) {
    using std::sqrt;
    using R = typename Arith::real;
    const R xr = ar.lift(x);
    const R d = ar.lift(p.delta);
    const R a = xr + d * d;
    const R xm = xr - 1.0;
    const R xp = xr + 1.0;
    R radicand = a * a + d * (xm * xm) * (xp * xp);
    std::uint8_t flags = kFlagNone;
    if (radicand < 0.0) {
        radicand = ar.lift(0.0);
        flags |= kFlagRadicandClamped;
    }
    const R b = sqrt(radicand);
    const R value = (b * b - a * a) / d;
    auto out = to_double(value);
    out.flags |= flags;
    return out;
}

inline Flagged<double> phi_delta(double x, const QuarticParams& p, const PrecisionContext& ctx) {
    return with_arithmetic(ctx, [&](const auto& ar) { return phi_delta(x, p, ar); });
}

/// (x-1)^2 (x+1)^2 in double.
inline double phi_exact(double x) {
    const double xm = x - 1.0;
    const double xp = x + 1.0;
    return (xm * xm) * (xp * xp);
}

/// Sine basis sin(pi (2n-1)(x+1)/2): orthonormal on [-1,1], zero at both ends.
inline double basis_g(int n, double x) {
    if (n < 1) throw std::invalid_argument("basis index must be >= 1");
    constexpr double pi = 3.141592653589793238462643383279502884;
    return std::sin(pi * (2.0 * n - 1.0) * (x + 1.0) / 2.0);
}

/// Equivalent cosine form (-1)^(n+1) cos(pi (2n-1) x / 2).
inline double basis_g_cosine(int n, double x) {
    if (n < 1) throw std::invalid_argument("basis index must be >= 1");
    constexpr double pi = 3.141592653589793238462643383279502884;
    const double sign = (n % 2 == 1) ? 1.0 : -1.0;
    return sign * std::cos(pi * (2.0 * n - 1.0) * x / 2.0);
}

// ---------------------------------------------------------------------------
// pricing integrand

/// hat-varphi(k) = exp{i muJ k - sigmaJ^2 k^2 / 2}, the jump-size transform.
template <class Arith>
Complex<typename Arith::real> jump_size_transform(const Complex<typename Arith::real>& k, const FinanceParams& p,
                                                  const Arith& ar) {
    using C = Complex<typename Arith::real>;
    const C i{ar.lift(0.0), ar.lift(1.0)};
    const auto muJ = ar.lift(p.muJ);
    const auto sJ = ar.lift(p.sigmaJ);
    return exp(i * k * muJ - k * k * (sJ * sJ * 0.5));
}

/// phi(k) = exp{-i lambda beta k tau + lambda tau (hat-varphi(k) - 1)}.
template <class Arith>
Complex<typename Arith::real> jump_characteristic(const Complex<typename Arith::real>& k, const FinanceParams& p,
                                                  const Arith& ar) {
    using std::exp;
    using C = Complex<typename Arith::real>;
    using R = typename Arith::real;
    const C i{ar.lift(0.0), ar.lift(1.0)};
    const R lambda = ar.lift(p.lambda);
    const R tau = ar.lift(p.tau);
    const R sJ = ar.lift(p.sigmaJ);
    const R beta = exp(ar.lift(p.muJ) + sJ * sJ / 2.0) - 1.0;
    const C hat = jump_size_transform(k, p, ar);
    return exp(-(i * k) * (lambda * beta * tau) + (hat - ar.lift(1.0)) * (lambda * tau));
}

/// f(k) = e^{-ikX} F(k,v,tau) / (k^2 - ik) * phi(-k) at k = u + i/2, with the
/// fundamental transform F = exp(C + D v). Principal branches throughout;
/// the log in C is not branch-tracked.
template <class Arith>
Flagged<std::complex<double>> finance_f(double u, const FinanceParams& p, const Arith& ar) {
    using std::exp;
    using std::log;
    using std::pow;
    using R = typename Arith::real;
    using C = Complex<R>;

    const R zero = ar.lift(0.0);
    const R one = ar.lift(1.0);
    const C i{zero, one};
    const C k{ar.lift(u), ar.lift(0.5)};

    const R tau = ar.lift(p.tau);
    const R kappa = ar.lift(p.kappa);
    const R X = log(ar.lift(p.S) / ar.lift(p.K)) + ar.lift(p.r) * tau;
    const R B = pow(ar.lift(p.eps), ar.lift(p.H) - 0.5) * ar.lift(p.sigma);

    const C ik = i * k;
    const C kk = k * k - ik;
    if (kk.is_zero()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {{nan, nan}, kFlagDomainError};
    }
    const C b = kappa + ik * (ar.lift(p.rho) * B);
    const C d = sqrt(b * b + kk * (B * B));
    const C g = (b - d) / (b + d);
    const C one_minus_g = one - g;
    if (one_minus_g.is_zero()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {{nan, nan}, kFlagDomainError};
    }
    const C Y = -kk / (b + d);
    const C e = exp(-d * tau);
    const C C2 = log((one - g * e) / one_minus_g);
    const C Cterm = (Y * tau - C2 * (2.0 / (B * B))) * (kappa * ar.lift(p.theta));
    const C D = Y * (one - e) / (one - g * e);
    const C F = exp(Cterm + D * ar.lift(p.v));
    const C jump = jump_characteristic(-k, p, ar);
    const C f = exp(-ik * X) * F / kk * jump;
    return to_double(f);
}

inline Flagged<std::complex<double>> finance_f(double u, const FinanceParams& p, const PrecisionContext& ctx) {
    return with_arithmetic(ctx, [&](const auto& ar) { return finance_f(u, p, ar); });
}

// ---------------------------------------------------------------------------
// integrand objects consumed by the quadratures

/// One of the three quartic implementations as a callable x -> Flagged<double>.
class QuarticIntegrand {
public:
    QuarticIntegrand(IntegrandVariant variant, QuarticParams params, int digits = kDefaultDigits)
        : variant_(variant), params_(params) {
        if (!is_quartic(variant)) throw std::invalid_argument("not a quartic variant");
        if (variant != IntegrandVariant::QuarticExact) params_.validate();
        if (variant == IntegrandVariant::QuarticHighPrec) ctx_ = PrecisionContext::high_precision(digits);
    }

    Flagged<double> operator()(double x) const {
        if (variant_ == IntegrandVariant::QuarticExact) return {phi_exact(x), kFlagNone};
        return phi_delta(x, params_, ctx_);
    }

    IntegrandVariant variant() const { return variant_; }
    const QuarticParams& params() const { return params_; }
    const PrecisionContext& context() const { return ctx_; }

private:
    IntegrandVariant variant_;
    QuarticParams params_;
    PrecisionContext ctx_ = PrecisionContext::double_precision();
};

/// f(u + i/2) as a callable u -> Flagged<complex<double>>.
class FinanceIntegrand {
public:
    FinanceIntegrand(FinanceParams params, PrecisionContext ctx) : params_(params), ctx_(ctx) { params_.validate(); }

    Flagged<std::complex<double>> operator()(double u) const { return finance_f(u, params_, ctx_); }

    const FinanceParams& params() const { return params_; }
    const PrecisionContext& context() const { return ctx_; }

private:
    FinanceParams params_;
    PrecisionContext ctx_;
};

/// phi(x) g_n(x), the Fourier-coefficient integrand. phi is rounded to double
/// before the product, as in multiplying phi_vpa() by a double basis function.
template <class Phi>
class ProjectedIntegrand {
public:
    ProjectedIntegrand(Phi phi, int n) : phi_(std::move(phi)), n_(n) {
        if (n < 1) throw std::invalid_argument("basis index must be >= 1");
    }

    Flagged<double> operator()(double x) const {
        auto v = phi_(x);
        v.value *= basis_g(n_, x);
        return v;
    }

private:
    Phi phi_;
    int n_;
};

/// Evaluates a quartic variant on `grid`, keeping input order.
inline std::vector<std::pair<double, double>> sample_initial_condition(IntegrandVariant variant,
                                                                       const QuarticParams& p,
                                                                       const std::vector<double>& grid,
                                                                       int digits = kDefaultDigits) {
    if (!is_quartic(variant)) {
        throw std::invalid_argument("initial-condition sampling needs a quartic variant");
    }
    const QuarticIntegrand phi(variant, p, digits);
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double x : grid) {
        if (!(x >= -1.0 && x <= 1.0)) throw std::invalid_argument("grid point outside [-1,1]");
        out.emplace_back(x, phi(x).value);
    }
    return out;
}

}  // namespace quadbench
