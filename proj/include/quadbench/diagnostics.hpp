#pragma once

// Cheap pre-integration check for corrupted double evaluation: compare the
// double and high-precision paths of an integrand on a uniform grid and
// recommend an evaluation regime.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "quadbench/precision.hpp"
#include "quadbench/quadrature.hpp"

namespace quadbench {

enum class Recommendation { DoubleOk, EscalatePrecision, Collapsed };

inline std::string recommendation_name(Recommendation r) {
    switch (r) {
        case Recommendation::DoubleOk: return "DoubleOk";
        case Recommendation::EscalatePrecision: return "EscalatePrecision";
        case Recommendation::Collapsed: return "Collapsed";
    }
    return "?";
}

inline Recommendation parse_recommendation(const std::string& s) {
    for (auto r : {Recommendation::DoubleOk, Recommendation::EscalatePrecision, Recommendation::Collapsed}) {
        if (recommendation_name(r) == s) return r;
    }
    throw std::invalid_argument("unknown recommendation: " + s);
}

inline constexpr double kDefaultNoiseThreshold = 1e-10;
inline constexpr int kDefaultNoiseGrid = 129;

struct NoiseReport {
    double max_abs_dev = 0.0;
    double max_rel_dev = 0.0;  // relative to max |high-precision value| on the grid
    bool collapse = false;     // every double value is 0 while the reference is not
    int grid_size = 0;
    Recommendation recommendation = Recommendation::DoubleOk;
    bool nonfinite_double = false;

    friend bool operator==(const NoiseReport&, const NoiseReport&) = default;
};

namespace detail {

template <class F>
Flagged<double> call_flagged(const F& f, double x) {
    using R = std::decay_t<std::invoke_result_t<const F&, double>>;
    if constexpr (std::is_same_v<R, double>) {
        return {f(x), kFlagNone};
    } else {
        return f(x);
    }
}

}  // namespace detail

/// Evaluates both paths on grid_size uniform points of [a,b] (endpoints
/// included). Throws if the high-precision path produces a non-finite value;
/// a non-finite double value forces EscalatePrecision.
template <class FDouble, class FHigh>
NoiseReport noise_floor(const FDouble& f_double, const FHigh& f_hiprec, double a, double b,
                        int grid_size = kDefaultNoiseGrid, double threshold = kDefaultNoiseThreshold) {
    if (grid_size < 16) throw std::invalid_argument("noise_floor needs grid_size >= 16");
    if (!(threshold > 0.0)) throw std::invalid_argument("noise_floor threshold must be positive");
    detail::check_interval(a, b);

    NoiseReport report;
    report.grid_size = grid_size;
    double max_ref = 0.0;
    bool all_double_zero = true;
    const double step = (b - a) / (grid_size - 1);
    for (int i = 0; i < grid_size; ++i) {
        const double x = (i == grid_size - 1) ? b : a + i * step;
        const double hi = detail::call_flagged(f_hiprec, x).value;
        if (!std::isfinite(hi)) {
            throw std::runtime_error("high-precision integrand is not finite at x = " + std::to_string(x));
        }
        const double lo = detail::call_flagged(f_double, x).value;
        if (!std::isfinite(lo)) {
            report.nonfinite_double = true;
            all_double_zero = false;
            continue;
        }
        max_ref = std::max(max_ref, std::abs(hi));
        report.max_abs_dev = std::max(report.max_abs_dev, std::abs(lo - hi));
        if (lo != 0.0) all_double_zero = false;
    }

    if (max_ref > 0.0) {
        report.max_rel_dev = report.max_abs_dev / max_ref;
    } else {
        report.max_rel_dev = report.max_abs_dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    report.collapse = all_double_zero && max_ref > 0.0;

    if (report.collapse) {
        report.recommendation = Recommendation::Collapsed;
    } else if (report.nonfinite_double || report.max_rel_dev > threshold) {
        report.recommendation = Recommendation::EscalatePrecision;
    } else {
        report.recommendation = Recommendation::DoubleOk;
    }
    return report;
}

/// DoubleOk keeps double; anything else escalates to the default 32 digits.
inline PrecisionContext recommend_regime(const NoiseReport& report, const Tolerances& /*tol*/ = {}) {
    if (report.recommendation == Recommendation::DoubleOk) return PrecisionContext::double_precision();
    return PrecisionContext::high_precision(kDefaultDigits);
}

inline nlohmann::ordered_json to_json(const NoiseReport& r) {
    nlohmann::ordered_json j;
    j["max_abs_dev"] = r.max_abs_dev;
    j["max_rel_dev"] = r.max_rel_dev;
    j["collapse"] = r.collapse;
    j["grid_size"] = r.grid_size;
    j["recommendation"] = recommendation_name(r.recommendation);
    return j;
}

inline NoiseReport noise_report_from_json(const nlohmann::ordered_json& j) {
    NoiseReport r;
    r.max_abs_dev = j.at("max_abs_dev").get<double>();
    r.max_rel_dev = j.at("max_rel_dev").get<double>();
    r.collapse = j.at("collapse").get<bool>();
    r.grid_size = j.at("grid_size").get<int>();
    r.recommendation = parse_recommendation(j.at("recommendation").get<std::string>());
    return r;
}

}  // namespace quadbench
