#pragma once

// Instrumented quadratures: global-adaptive Gauss-Kronrod (7,15), recursive
// adaptive Simpson, adaptive Gauss-Lobatto with a Kronrod extension
// (Gander & Gautschi) and the fixed-step composite trapezoid.
//
// Integrands are callables double -> V or double -> Flagged<V> with V either
// double or std::complex<double>. Complex integrands share one subdivision;
// their error is the larger of the real and imaginary error estimates.
// Every run counts integrand calls exactly and reports warnings rather than
// throwing when it cannot meet the tolerance.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "quadbench/integrands.hpp"
#include "quadbench/precision.hpp"

namespace quadbench {

struct Tolerances {
    double abs_tol = 1e-12;
    double rel_tol = 1e-8;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
            throw std::invalid_argument("tolerances must be strictly positive");
        }
    }

    double target(double magnitude) const { return std::max(abs_tol, rel_tol * magnitude); }
};

struct Limits {
    std::size_t max_intervals = 16384;  // GK15
    std::size_t max_fevals = 10000;     // Simpson, Lobatto
};

enum class Warning : std::uint8_t {
    MaxIntervals = 1u << 0,
    MaxFevals = 1u << 1,
    NonFiniteValue = 1u << 2,
    RadicandClamped = 1u << 3,
};

inline constexpr std::array<Warning, 4> kAllWarnings = {Warning::MaxIntervals, Warning::MaxFevals,
                                                        Warning::NonFiniteValue, Warning::RadicandClamped};

inline std::string warning_name(Warning w) {
    switch (w) {
        case Warning::MaxIntervals: return "MaxIntervals";
        case Warning::MaxFevals: return "MaxFevals";
        case Warning::NonFiniteValue: return "NonFiniteValue";
        case Warning::RadicandClamped: return "RadicandClamped";
    }
    return "?";
}

inline std::string warning_message(Warning w) {
    switch (w) {
        case Warning::MaxIntervals:
            return "Reached the limit on the maximum number of intervals in use. The integral may not exist, "
                   "or it may be difficult to approximate numerically to the requested accuracy.";
        case Warning::MaxFevals: return "Maximum function count exceeded; singularity likely.";
        case Warning::NonFiniteValue: return "Non-finite integrand value encountered; result is not reliable.";
        case Warning::RadicandClamped: return "Negative radicand clamped to zero during integrand evaluation.";
    }
    return "?";
}

class WarningSet {
public:
    void insert(Warning w) { bits_ |= static_cast<std::uint8_t>(w); }
    bool contains(Warning w) const { return (bits_ & static_cast<std::uint8_t>(w)) != 0; }
    bool empty() const { return bits_ == 0; }
    std::uint8_t bits() const { return bits_; }

    std::vector<Warning> list() const {
        std::vector<Warning> out;
        for (Warning w : kAllWarnings) {
            if (contains(w)) out.push_back(w);
        }
        return out;
    }

    /// "MaxIntervals;NonFiniteValue", or "" when empty.
    std::string to_string() const {
        std::string s;
        for (Warning w : list()) {
            if (!s.empty()) s += ';';
            s += warning_name(w);
        }
        return s;
    }

    static WarningSet parse(const std::string& s) {
        WarningSet set;
        std::size_t start = 0;
        while (start < s.size()) {
            const auto end = std::min(s.find(';', start), s.size());
            const std::string name = s.substr(start, end - start);
            bool found = false;
            for (Warning w : kAllWarnings) {
                if (warning_name(w) == name) {
                    set.insert(w);
                    found = true;
                }
            }
            if (!found) throw std::invalid_argument("unknown warning: " + name);
            start = end + 1;
        }
        return set;
    }

    friend bool operator==(const WarningSet&, const WarningSet&) = default;

private:
    std::uint8_t bits_ = 0;
};

template <class V>
struct QuadratureResult {
    V value{};
    double error_estimate = 0.0;
    std::size_t fevals = 0;
    WarningSet warnings;
    std::chrono::duration<double> elapsed{0.0};
};

/// Quadrature rule selector. `step` is only meaningful for Trapezoid.
struct RuleId {
    enum class Kind { GK15, AdaptiveSimpson, AdaptiveLobatto, Trapezoid };

    Kind kind = Kind::GK15;
    double step = 0.0;

    static RuleId gk15() { return {Kind::GK15, 0.0}; }
    static RuleId simpson() { return {Kind::AdaptiveSimpson, 0.0}; }
    static RuleId lobatto() { return {Kind::AdaptiveLobatto, 0.0}; }
    static RuleId trapezoid(double h) { return {Kind::Trapezoid, h}; }

    std::string name() const {
        switch (kind) {
            case Kind::GK15: return "gk15";
            case Kind::AdaptiveSimpson: return "simpson";
            case Kind::AdaptiveLobatto: return "lobatto";
            case Kind::Trapezoid: return "trapz";
        }
        return "?";
    }

    friend bool operator==(const RuleId&, const RuleId&) = default;
};

namespace detail {

template <class T>
struct unwrap_flagged {
    using type = T;
};
template <class T>
struct unwrap_flagged<Flagged<T>> {
    using type = T;
};

template <class F>
using integrand_value_t = typename unwrap_flagged<std::decay_t<std::invoke_result_t<const F&, double>>>::type;

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

// Error norm for differences of two estimates: max over components.
inline double error_norm(double v) { return std::abs(v); }
inline double error_norm(const std::complex<double>& v) { return std::max(std::abs(v.real()), std::abs(v.imag())); }

inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const std::complex<double>& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// Wraps an integrand, counting calls and collecting flags.
template <class F>
class CountingEvaluator {
public:
    using value_type = integrand_value_t<F>;

    explicit CountingEvaluator(const F& f) : f_(f) {}

    value_type operator()(double x) {
        ++fevals_;
        value_type v;
        if constexpr (std::is_same_v<std::decay_t<std::invoke_result_t<const F&, double>>, value_type>) {
            v = f_(x);
        } else {
            auto r = f_(x);
            flags_ |= r.flags;
            v = r.value;
        }
        if (!finite(v)) nonfinite_ = true;
        return v;
    }

    std::size_t fevals() const { return fevals_; }
    bool nonfinite() const { return nonfinite_; }

    void annotate(WarningSet& w) const {
        if (nonfinite_ || (flags_ & (kFlagOverflow | kFlagDomainError)) != 0) w.insert(Warning::NonFiniteValue);
        if ((flags_ & kFlagRadicandClamped) != 0) w.insert(Warning::RadicandClamped);
    }

private:
    const F& f_;
    std::size_t fevals_ = 0;
    std::uint8_t flags_ = kFlagNone;
    bool nonfinite_ = false;
};

inline void check_interval(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw std::invalid_argument("integration interval must be finite with a < b");
    }
}

// Gauss-Kronrod (7,15) abscissae and weights on [-1,1] (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Weights of the embedded 7-point Gauss rule at kKronrodNodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V>
struct Gk15Panel {
    V kronrod{};
    V gauss{};
};

template <class Eval>
auto gk15_panel(Eval& f, double a, double b) {
    using V = decltype(f(a));
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const V fc = f(c);
    V k = fc * kKronrodWeights[7];
    V g = fc * kGaussWeights[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = h * kKronrodNodes[j];
        const V sum = f(c - dx) + f(c + dx);
        k += sum * kKronrodWeights[j];
        if (j % 2 == 1) g += sum * kGaussWeights[j / 2];
    }
    return Gk15Panel<V>{k * h, g * h};
}

template <class V>
V zero_value() {
    return V{};
}

}  // namespace detail

/// Single-panel Gauss-Kronrod (7,15) evaluation, without adaptivity. Exposed
/// for exactness checks.
template <class F>
auto gk15_panel(const F& f, double a, double b) {
    detail::CountingEvaluator<F> eval(f);
    return detail::gk15_panel(eval, a, b);
}

/// Global adaptive Gauss-Kronrod (7,15). Each step bisects the panel with the
/// largest |K15 - G7| until the summed error meets the tolerance or the
/// partition reaches limits.max_intervals panels.
template <class F>
auto gauss_kronrod_15(const F& f, double a, double b, Tolerances tol = {}, Limits limits = {}) {
    using V = detail::integrand_value_t<F>;
    detail::check_interval(a, b);
    tol.validate();
    const auto start = std::chrono::steady_clock::now();

    struct Panel {
        double a;
        double b;
        V value;
        double err;
    };

    detail::CountingEvaluator<F> eval(f);
    std::vector<Panel> heap;     // max-heap on err
    std::vector<Panel> settled;  // panels too narrow to bisect
    const auto by_err = [](const Panel& l, const Panel& r) { return l.err < r.err; };

    auto make_panel = [&](double lo, double hi) {
        const auto p = detail::gk15_panel(eval, lo, hi);
        return Panel{lo, hi, p.kronrod, detail::error_norm(p.kronrod - p.gauss)};
    };

    auto exact_totals = [&]() {
        std::vector<const Panel*> all;
        all.reserve(heap.size() + settled.size());
        for (const auto& p : heap) all.push_back(&p);
        for (const auto& p : settled) all.push_back(&p);
        std::sort(all.begin(), all.end(), [](const Panel* l, const Panel* r) { return l->a < r->a; });
        V value{};
        double err = 0.0;
        for (const Panel* p : all) {
            value += p->value;
            err += p->err;
        }
        return std::pair<V, double>{value, err};
    };

    QuadratureResult<V> result;
    heap.push_back(make_panel(a, b));
    V running_value = heap.front().value;
    double running_err = heap.front().err;

    while (true) {
        if (eval.nonfinite()) break;
        if (running_err <= tol.target(detail::magnitude(running_value))) {
            const auto [value, err] = exact_totals();
            running_value = value;
            running_err = err;
            if (err <= tol.target(detail::magnitude(value))) break;
        }
        if (heap.size() + settled.size() >= limits.max_intervals || heap.empty()) {
            result.warnings.insert(Warning::MaxIntervals);
            break;
        }
        std::pop_heap(heap.begin(), heap.end(), by_err);
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            settled.push_back(worst);
            continue;
        }
        Panel left = make_panel(worst.a, mid);
        Panel right = make_panel(mid, worst.b);
        running_value += left.value + right.value - worst.value;
        running_err += left.err + right.err - worst.err;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_err);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_err);
    }

    const auto [value, err] = exact_totals();
    result.value = value;
    result.error_estimate = err;
    result.fevals = eval.fevals();
    eval.annotate(result.warnings);
    result.elapsed = std::chrono::steady_clock::now() - start;
    return result;
}

/// Recursive adaptive Simpson. A panel is accepted when the Richardson
/// estimate |S(left) + S(right) - S(whole)| / 15 is within its width share of
/// max(abs_tol, rel_tol |I|), I being the running integral estimate. Accepted
/// panels contribute the extrapolated value. Stops refining (MaxFevals) when
/// another split would exceed limits.max_fevals.
template <class F>
auto adaptive_simpson(const F& f, double a, double b, Tolerances tol = {}, Limits limits = {}) {
    using V = detail::integrand_value_t<F>;
    detail::check_interval(a, b);
    tol.validate();
    const auto start = std::chrono::steady_clock::now();

    struct Pending {
        double a, b;
        V fa, fm, fb;
        V whole;
        double inherited_err;  // parent's error estimate, split by width
    };

    detail::CountingEvaluator<F> eval(f);
    QuadratureResult<V> result;
    const double width = b - a;

    const V fa = eval(a);
    const V fm = eval(0.5 * (a + b));
    const V fb = eval(b);
    const V whole = (fa + 4.0 * fm + fb) * (width / 6.0);

    std::vector<Pending> stack{{a, b, fa, fm, fb, whole, std::numeric_limits<double>::infinity()}};
    V accepted{};
    double err_sum = 0.0;
    V pending_sum = whole;
    bool out_of_budget = false;

    while (!stack.empty()) {
        const Pending p = stack.back();
        stack.pop_back();
        pending_sum -= p.whole;

        const double m = 0.5 * (p.a + p.b);
        const double lm = 0.5 * (p.a + m);
        const double rm = 0.5 * (m + p.b);
        const bool splittable = p.a < lm && lm < m && m < rm && rm < p.b;
        if (out_of_budget || eval.nonfinite() || !splittable || eval.fevals() + 2 > limits.max_fevals) {
            if (!out_of_budget && splittable && !eval.nonfinite()) {
                out_of_budget = true;
                result.warnings.insert(Warning::MaxFevals);
            }
            accepted += p.whole;
            err_sum += p.inherited_err;
            continue;
        }

        const V flm = eval(lm);
        const V frm = eval(rm);
        const double h = p.b - p.a;
        const V left = (p.fa + 4.0 * flm + p.fm) * (h / 12.0);
        const V right = (p.fm + 4.0 * frm + p.fb) * (h / 12.0);
        const V diff = left + right - p.whole;
        const double err = detail::error_norm(diff) / 15.0;
        const double estimate = detail::magnitude(accepted + pending_sum + left + right);
        const double share = tol.target(estimate) * (h / width);
        if (err <= share) {
            accepted += left + right + diff / 15.0;
            err_sum += err;
        } else {
            // depth-first, left half first
            stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * err});
            stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * err});
            pending_sum += left + right;
        }
    }

    result.value = accepted;
    result.error_estimate = err_sum;
    result.fevals = eval.fevals();
    eval.annotate(result.warnings);
    result.elapsed = std::chrono::steady_clock::now() - start;
    return result;
}

/// Adaptive Gauss-Lobatto after Gander & Gautschi: each panel is integrated
/// with the 4-point Gauss-Lobatto rule and its 7-point Kronrod extension; the
/// difference is the error estimate. Unconverged panels split into the six
/// subintervals delimited by the Kronrod nodes, so every node is reused.
template <class F>
auto adaptive_lobatto(const F& f, double a, double b, Tolerances tol = {}, Limits limits = {}) {
    using V = detail::integrand_value_t<F>;
    detail::check_interval(a, b);
    tol.validate();
    const auto start = std::chrono::steady_clock::now();

    static const double alpha = std::sqrt(2.0 / 3.0);
    static const double beta = 1.0 / std::sqrt(5.0);

    struct Pending {
        double a, b;
        V fa, fb;
        V estimate;            // endpoint trapezoid, stands in until evaluated
        double inherited_err;  // parent's error estimate, split by width
    };

    detail::CountingEvaluator<F> eval(f);
    QuadratureResult<V> result;
    const double width = b - a;

    const V fa = eval(a);
    const V fb = eval(b);
    std::vector<Pending> stack{{a, b, fa, fb, (fa + fb) * (0.5 * width), std::numeric_limits<double>::infinity()}};
    V accepted{};
    V pending_sum = stack.front().estimate;
    double err_sum = 0.0;
    bool out_of_budget = false;
    bool first = true;

    while (!stack.empty()) {
        const Pending p = stack.back();
        stack.pop_back();
        pending_sum -= p.estimate;

        const double h = 0.5 * (p.b - p.a);
        const double m = 0.5 * (p.a + p.b);
        const double mll = m - alpha * h;
        const double ml = m - beta * h;
        const double mr = m + beta * h;
        const double mrr = m + alpha * h;
        const bool splittable = p.a < mll && mll < ml && ml < m && m < mr && mr < mrr && mrr < p.b;

        if (!first && (out_of_budget || eval.nonfinite() || !splittable || eval.fevals() + 5 > limits.max_fevals)) {
            if (!out_of_budget && splittable && !eval.nonfinite()) {
                out_of_budget = true;
                result.warnings.insert(Warning::MaxFevals);
            }
            accepted += p.estimate;
            err_sum += p.inherited_err;
            continue;
        }

        const V fmll = eval(mll);
        const V fml = eval(ml);
        const V fm = eval(m);
        const V fmr = eval(mr);
        const V fmrr = eval(mrr);
        const V lobatto = (p.fa + p.fb + 5.0 * (fml + fmr)) * (h / 6.0);
        const V kronrod =
            (77.0 * (p.fa + p.fb) + 432.0 * (fmll + fmrr) + 625.0 * (fml + fmr) + 672.0 * fm) * (h / 1470.0);
        const double err = detail::error_norm(kronrod - lobatto);
        const double estimate = detail::magnitude(accepted + pending_sum + kronrod);
        const double share = tol.target(estimate) * ((p.b - p.a) / width);
        first = false;

        if (err <= share || !splittable) {
            accepted += kronrod;
            err_sum += err;
            continue;
        }
        const std::array<double, 7> nodes = {p.a, mll, ml, m, mr, mrr, p.b};
        const std::array<V, 7> values = {p.fa, fmll, fml, fm, fmr, fmrr, p.fb};
        for (std::size_t j = 6; j-- > 0;) {
            const double w = nodes[j + 1] - nodes[j];
            const V trap = (values[j] + values[j + 1]) * (0.5 * w);
            stack.push_back({nodes[j], nodes[j + 1], values[j], values[j + 1], trap, err * (w / (p.b - p.a))});
            pending_sum += trap;
        }
    }

    result.value = accepted;
    result.error_estimate = err_sum;
    result.fevals = eval.fevals();
    eval.annotate(result.warnings);
    result.elapsed = std::chrono::steady_clock::now() - start;
    return result;
}

/// Number of trapezoid subintervals for step h on [a,b]; (b-a)/h must be an
/// integer up to a few ulps.
inline std::size_t trapezoid_panels(double a, double b, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("trapezoid step must be positive");
    if (h > b - a) throw std::invalid_argument("trapezoid step exceeds the interval length");
    const double q = (b - a) / h;
    const double n = std::round(q);
    const double ulp = std::nextafter(q, std::numeric_limits<double>::infinity()) - q;
    if (std::abs(q - n) > 4.0 * ulp) {
        throw std::invalid_argument("interval length is not an integer multiple of the trapezoid step");
    }
    return static_cast<std::size_t>(n);
}

/// Composite trapezoid on the uniform grid x_k = a + k (b-a)/n, x_n = b.
/// Values are summed left to right and scaled by the step once. The error
/// estimate |T(h) - T(2h)| / 3 is informational (zero when n is odd).
template <class F>
auto trapezoid(const F& f, double a, double b, double h) {
    using V = detail::integrand_value_t<F>;
    detail::check_interval(a, b);
    const std::size_t n = trapezoid_panels(a, b, h);
    const auto start = std::chrono::steady_clock::now();

    detail::CountingEvaluator<F> eval(f);
    const double step = (b - a) / static_cast<double>(n);
    V sum{};
    V coarse{};
    for (std::size_t k = 0; k <= n; ++k) {
        const double x = (k == n) ? b : a + static_cast<double>(k) * step;
        const V y = eval(x);
        const double weight = (k == 0 || k == n) ? 0.5 : 1.0;
        sum += y * weight;
        if (k % 2 == 0) coarse += y * weight;
    }

    QuadratureResult<V> result;
    result.value = sum * step;
    if (n % 2 == 0) {
        const V coarse_value = coarse * (2.0 * step);
        result.error_estimate = detail::error_norm(result.value - coarse_value) / 3.0;
    }
    result.fevals = eval.fevals();
    eval.annotate(result.warnings);
    result.elapsed = std::chrono::steady_clock::now() - start;
    return result;
}

/// Runs `rule` on f over [a,b].
template <class F>
auto integrate(const F& f, double a, double b, const RuleId& rule, Tolerances tol = {}, Limits limits = {}) {
    switch (rule.kind) {
        case RuleId::Kind::GK15: return gauss_kronrod_15(f, a, b, tol, limits);
        case RuleId::Kind::AdaptiveSimpson: return adaptive_simpson(f, a, b, tol, limits);
        case RuleId::Kind::AdaptiveLobatto: return adaptive_lobatto(f, a, b, tol, limits);
        case RuleId::Kind::Trapezoid: return trapezoid(f, a, b, rule.step);
    }
    throw std::invalid_argument("unknown rule");
}

/// Integral of f(u + i/2) over u in [0, L] for the pricing integrand.
inline QuadratureResult<std::complex<double>> integrate_contour(const FinanceParams& p, double L, const RuleId& rule,
                                                                const PrecisionContext& ctx, Tolerances tol = {},
                                                                Limits limits = {}) {
    if (!(L > 0.0)) throw std::invalid_argument("contour length L must be positive");
    const FinanceIntegrand f(p, ctx);
    return integrate(f, 0.0, L, rule, tol, limits);
}

}  // namespace quadbench
