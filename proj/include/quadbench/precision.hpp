#pragma once

// Dual-regime scalar arithmetic: IEEE double and MPFR-backed high precision.
//
// Every integrand in the library is written once against an "arithmetic"
// policy (DoubleArithmetic or MultiPrecision) and the caller picks the regime
// through a PrecisionContext. High-precision values are rounded back to double
// at the integrand boundary, exactly like evaluating in vpa and calling
// double() on the result.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace quadbench {

enum class Regime { Double, HighPrecision };

inline constexpr int kDefaultDigits = 32;

/// Evaluation regime. `digits` counts significant decimal digits and only
/// matters for HighPrecision.
struct PrecisionContext {
    Regime regime = Regime::Double;
    int digits = 0;

    static PrecisionContext double_precision() { return {Regime::Double, 0}; }

    static PrecisionContext high_precision(int digits = kDefaultDigits) {
        if (digits < 16) {
            throw std::invalid_argument("high precision needs at least 16 significant digits, got " +
                                        std::to_string(digits));
        }
        return {Regime::HighPrecision, digits};
    }

    bool is_double() const { return regime == Regime::Double; }

    /// Binary precision backing `digits`: ceil(digits * log2(10)) + 8 guard bits.
    mpfr_prec_t binary_bits() const {
        return static_cast<mpfr_prec_t>(std::ceil(digits * 3.321928094887362347870319429489390)) + 8;
    }

    std::string name() const { return is_double() ? "double" : "hiprec(" + std::to_string(digits) + ")"; }

    friend bool operator==(const PrecisionContext&, const PrecisionContext&) = default;
};

/// Default digit count, honoring QUADBENCH_DIGITS when set to a valid value.
inline int default_digits() {
    if (const char* env = std::getenv("QUADBENCH_DIGITS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 16 && v <= 100000) {
            return static_cast<int>(v);
        }
    }
    return kDefaultDigits;
}

/// 2^-52, the spacing of doubles just above 1.
constexpr double machine_epsilon() { return 0x1p-52; }

// Conditions raised while evaluating an integrand. They travel next to the
// value so that a quadrature can surface them as warnings.
enum EvalFlag : std::uint8_t {
    kFlagNone = 0,
    kFlagRadicandClamped = 1u << 0,
    kFlagOverflow = 1u << 1,
    kFlagDomainError = 1u << 2,
};

template <class T>
struct Flagged {
    T value{};
    std::uint8_t flags = kFlagNone;

    bool has(EvalFlag f) const { return (flags & f) != 0; }
};

/// Multiprecision real with its own binary precision. Results of binary
/// operations carry the larger of the two operand precisions. All operations
/// round to nearest (ties to even) and MPFR's elementary functions are
/// correctly rounded, so every operation is within half an ulp of the exact
/// result at the working precision.
class HpReal {
public:
    HpReal() : HpReal(static_cast<mpfr_prec_t>(53)) {}

    explicit HpReal(mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        mpfr_set_zero(v_, 1);
    }

    HpReal(double x, mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        mpfr_set_d(v_, x, MPFR_RNDN);
    }

    /// Parses a decimal string, rounding to nearest at `bits`.
    HpReal(const std::string& decimal, mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        if (mpfr_set_str(v_, decimal.c_str(), 10, MPFR_RNDN) != 0) {
            mpfr_clear(v_);
            throw std::invalid_argument("not a decimal number: " + decimal);
        }
    }

    HpReal(const HpReal& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }

    HpReal(HpReal&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }

    HpReal& operator=(const HpReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }

    HpReal& operator=(HpReal&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }

    ~HpReal() { mpfr_clear(v_); }

    static HpReal pi(mpfr_prec_t bits) {
        HpReal r(bits);
        mpfr_const_pi(r.v_, MPFR_RNDN);
        return r;
    }

    mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
    mpfr_srcptr get() const { return v_; }
    mpfr_ptr get() { return v_; }

    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    std::string to_string(int digits = 40) const {
        char buf[8] = "%.*Rg";
        char* out = nullptr;
        if (mpfr_asprintf(&out, buf, digits, v_) < 0) {
            throw std::runtime_error("mpfr_asprintf failed");
        }
        std::string s(out);
        mpfr_free_str(out);
        return s;
    }

    HpReal operator-() const {
        HpReal r(precision());
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }

    HpReal& operator+=(const HpReal& o) { return *this = *this + o; }
    HpReal& operator-=(const HpReal& o) { return *this = *this - o; }
    HpReal& operator*=(const HpReal& o) { return *this = *this * o; }
    HpReal& operator/=(const HpReal& o) { return *this = *this / o; }

#define QUADBENCH_HP_BINOP(op, fn, fn_d, d_fn)                                \
    friend HpReal operator op(const HpReal& a, const HpReal& b) {             \
        HpReal r(std::max(a.precision(), b.precision()));                     \
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);                                      \
        return r;                                                             \
    }                                                                         \
    friend HpReal operator op(const HpReal& a, double b) {                    \
        HpReal r(a.precision());                                              \
        fn_d(r.v_, a.v_, b, MPFR_RNDN);                                       \
        return r;                                                             \
    }                                                                         \
    friend HpReal operator op(double a, const HpReal& b) {                    \
        HpReal r(b.precision());                                              \
        d_fn(r.v_, a, b.v_, MPFR_RNDN);                                       \
        return r;                                                             \
    }

    QUADBENCH_HP_BINOP(+, mpfr_add, mpfr_add_d, detail_d_add)
    QUADBENCH_HP_BINOP(-, mpfr_sub, mpfr_sub_d, mpfr_d_sub)
    QUADBENCH_HP_BINOP(*, mpfr_mul, mpfr_mul_d, detail_d_mul)
    QUADBENCH_HP_BINOP(/, mpfr_div, mpfr_div_d, mpfr_d_div)
#undef QUADBENCH_HP_BINOP

    friend int compare(const HpReal& a, const HpReal& b) { return mpfr_cmp(a.v_, b.v_); }
    friend bool operator==(const HpReal& a, const HpReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend bool operator<(const HpReal& a, const HpReal& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
    friend bool operator>(const HpReal& a, const HpReal& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
    friend bool operator<=(const HpReal& a, const HpReal& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
    friend bool operator>=(const HpReal& a, const HpReal& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
    friend bool operator==(const HpReal& a, double b) { return mpfr_cmp_d(a.v_, b) == 0; }
    friend bool operator<(const HpReal& a, double b) { return mpfr_cmp_d(a.v_, b) < 0; }
    friend bool operator>(const HpReal& a, double b) { return mpfr_cmp_d(a.v_, b) > 0; }
    friend bool operator<=(const HpReal& a, double b) { return mpfr_cmp_d(a.v_, b) <= 0; }
    friend bool operator>=(const HpReal& a, double b) { return mpfr_cmp_d(a.v_, b) >= 0; }

#define QUADBENCH_HP_UNARY(name, fn)                 \
    friend HpReal name(const HpReal& a) {            \
        HpReal r(a.precision());                     \
        fn(r.v_, a.v_, MPFR_RNDN);                   \
        return r;                                    \
    }

    QUADBENCH_HP_UNARY(sqrt, mpfr_sqrt)
    QUADBENCH_HP_UNARY(exp, mpfr_exp)
    QUADBENCH_HP_UNARY(log, mpfr_log)
    QUADBENCH_HP_UNARY(sin, mpfr_sin)
    QUADBENCH_HP_UNARY(cos, mpfr_cos)
    QUADBENCH_HP_UNARY(abs, mpfr_abs)
#undef QUADBENCH_HP_UNARY

    friend HpReal atan2(const HpReal& y, const HpReal& x) {
        HpReal r(std::max(y.precision(), x.precision()));
        mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
        return r;
    }

    friend HpReal hypot(const HpReal& x, const HpReal& y) {
        HpReal r(std::max(y.precision(), x.precision()));
        mpfr_hypot(r.v_, x.v_, y.v_, MPFR_RNDN);
        return r;
    }

    friend HpReal pow(const HpReal& x, const HpReal& y) {
        HpReal r(std::max(y.precision(), x.precision()));
        mpfr_pow(r.v_, x.v_, y.v_, MPFR_RNDN);
        return r;
    }

    friend HpReal copysign(const HpReal& x, const HpReal& y) {
        HpReal r(x.precision());
        mpfr_copysign(r.v_, x.v_, y.v_, MPFR_RNDN);
        return r;
    }

private:
    static int detail_d_add(mpfr_ptr r, double a, mpfr_srcptr b, mpfr_rnd_t rnd) { return mpfr_add_d(r, b, a, rnd); }
    static int detail_d_mul(mpfr_ptr r, double a, mpfr_srcptr b, mpfr_rnd_t rnd) { return mpfr_mul_d(r, b, a, rnd); }

    mpfr_t v_;
};

/// Nearest double (ties to even). Finite values beyond the double range come
/// back as +-infinity with kFlagOverflow set.
inline Flagged<double> to_double(const HpReal& x) {
    Flagged<double> out;
    out.value = mpfr_get_d(x.get(), MPFR_RNDN);
    if (x.is_finite() && !std::isfinite(out.value)) {
        out.flags |= kFlagOverflow;
    }
    return out;
}

inline Flagged<double> to_double(double x) { return {x, kFlagNone}; }

// Arithmetic policies. `lift` turns a double parameter into the working type;
// doubles are exact in both regimes so parameters mean the same number.

struct DoubleArithmetic {
    using real = double;

    real lift(double x) const { return x; }
    real pi() const { return 3.141592653589793238462643383279502884; }
};

struct MultiPrecision {
    using real = HpReal;

    mpfr_prec_t bits = 115;

    real lift(double x) const { return HpReal(x, bits); }
    real pi() const { return HpReal::pi(bits); }
};

/// Calls `fn` with the arithmetic policy selected by `ctx`.
template <class Fn>
decltype(auto) with_arithmetic(const PrecisionContext& ctx, Fn&& fn) {
    if (ctx.is_double()) {
        return std::forward<Fn>(fn)(DoubleArithmetic{});
    }
    return std::forward<Fn>(fn)(MultiPrecision{ctx.binary_bits()});
}

inline bool is_finite_value(double x) { return std::isfinite(x); }
inline bool is_finite_value(const HpReal& x) { return x.is_finite(); }

}  // namespace quadbench
