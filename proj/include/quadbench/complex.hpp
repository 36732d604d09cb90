#pragma once

// Minimal complex type usable with both double and HpReal components.
// std::complex<T> is unspecified for non-floating T, so the integrands use
// this one in both regimes. exp/log/sqrt take principal branches.

#include <complex>

#include "quadbench/precision.hpp"

namespace quadbench {

template <class R>
struct Complex {
    R re;
    R im;

    Complex operator-() const { return {-re, -im}; }

    friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
    friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
    friend Complex operator*(const Complex& a, const Complex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Complex operator/(const Complex& a, const Complex& b) {
        // Smith's algorithm keeps the intermediate scale bounded.
        using std::abs;
        if (abs(b.re) >= abs(b.im)) {
            const R r = b.im / b.re;
            const R den = b.re + b.im * r;
            return {(a.re + a.im * r) / den, (a.im - a.re * r) / den};
        }
        const R r = b.re / b.im;
        const R den = b.re * r + b.im;
        return {(a.re * r + a.im) / den, (a.im * r - a.re) / den};
    }

    friend Complex operator+(const Complex& a, const R& s) { return {a.re + s, a.im}; }
    friend Complex operator+(const R& s, const Complex& a) { return {s + a.re, a.im}; }
    friend Complex operator-(const Complex& a, const R& s) { return {a.re - s, a.im}; }
    friend Complex operator-(const R& s, const Complex& a) { return {s - a.re, -a.im}; }
    friend Complex operator*(const Complex& a, const R& s) { return {a.re * s, a.im * s}; }
    friend Complex operator*(const R& s, const Complex& a) { return {s * a.re, s * a.im}; }
    friend Complex operator/(const Complex& a, const R& s) { return {a.re / s, a.im / s}; }
    friend Complex operator/(const R& s, const Complex& a) { return Complex{s, s * 0.0} / a; }

    bool is_zero() const { return re == 0.0 && im == 0.0; }
};

template <class R>
R abs(const Complex<R>& z) {
    using std::hypot;
    return hypot(z.re, z.im);
}

template <class R>
Complex<R> exp(const Complex<R>& z) {
    using std::cos;
    using std::exp;
    using std::sin;
    const R m = exp(z.re);
    return {m * cos(z.im), m * sin(z.im)};
}

template <class R>
Complex<R> log(const Complex<R>& z) {
    using std::atan2;
    using std::hypot;
    using std::log;
    return {log(hypot(z.re, z.im)), atan2(z.im, z.re)};
}

/// Principal square root (branch cut along the negative real axis).
template <class R>
Complex<R> sqrt(const Complex<R>& z) {
    using std::abs;
    using std::copysign;
    using std::hypot;
    using std::sqrt;
    if (z.re == 0.0 && z.im == 0.0) {
        return {z.re * 0.0, z.im};
    }
    const R r = hypot(z.re, z.im);
    if (z.re >= 0.0) {
        const R t = sqrt((r + z.re) * 0.5);
        return {t, z.im / (t * 2.0)};
    }
    const R t = sqrt((r - z.re) * 0.5);
    return {abs(z.im) / (t * 2.0), copysign(t, z.im)};
}

template <class R>
bool is_finite_value(const Complex<R>& z) {
    return is_finite_value(z.re) && is_finite_value(z.im);
}

inline Flagged<std::complex<double>> to_double(const Complex<double>& z) { return {{z.re, z.im}, kFlagNone}; }

inline Flagged<std::complex<double>> to_double(const Complex<HpReal>& z) {
    const auto re = to_double(z.re);
    const auto im = to_double(z.im);
    return {{re.value, im.value}, static_cast<std::uint8_t>(re.flags | im.flags)};
}

}  // namespace quadbench
