#pragma once

// Separation-of-variables solution of
//   u_t = alpha u_xx on [0,1] x [-1,1],  u(t,±1) = 0,  u(0,x) = phi(x),
// u(t,x) = sum_n A_n exp(-alpha t ((2n-1)pi/2)^2) g_n(x), with the
// coefficients A_n integrated by any rule/regime combination.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quadbench/csv.hpp"
#include "quadbench/integrands.hpp"
#include "quadbench/precision.hpp"
#include "quadbench/quadrature.hpp"

namespace quadbench {

inline constexpr double kDefaultAlpha = 0.1;

struct HeatConfig {
    double alpha = kDefaultAlpha;
    int N = 50;
    RuleId coeff_rule = RuleId::gk15();
    PrecisionContext coeff_ctx = PrecisionContext::high_precision();
    QuarticParams quartic{};
    IntegrandVariant variant = IntegrandVariant::QuarticHighPrec;
    Tolerances tol{};
    Limits limits{};

    /// High-precision coefficients of phi_delta.
    static HeatConfig clean(double delta, int N = 50, int digits = kDefaultDigits) {
        HeatConfig c;
        c.N = N;
        c.quartic.delta = delta;
        c.variant = IntegrandVariant::QuarticHighPrec;
        c.coeff_ctx = PrecisionContext::high_precision(digits);
        return c;
    }

    /// Double-evaluated coefficients of phi_delta.
    static HeatConfig corrupted(double delta, int N = 50) {
        HeatConfig c;
        c.N = N;
        c.quartic.delta = delta;
        c.variant = IntegrandVariant::QuarticDouble;
        c.coeff_ctx = PrecisionContext::double_precision();
        return c;
    }

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
        if (N < 1) throw std::invalid_argument("truncation order N must be >= 1");
        if (!is_quartic(variant)) throw std::invalid_argument("heat initial condition must be a quartic variant");
        if (variant == IntegrandVariant::QuarticDouble && !coeff_ctx.is_double()) {
            throw std::invalid_argument("double variant requires the double regime");
        }
        if (variant == IntegrandVariant::QuarticHighPrec && coeff_ctx.is_double()) {
            throw std::invalid_argument("hiprec variant requires a high-precision regime");
        }
        if (variant != IntegrandVariant::QuarticExact) quartic.validate();
        tol.validate();
        if (coeff_rule.kind == RuleId::Kind::Trapezoid) trapezoid_panels(-1.0, 1.0, coeff_rule.step);
    }

    QuarticIntegrand initial_condition() const {
        const int digits = coeff_ctx.is_double() ? kDefaultDigits : coeff_ctx.digits;
        return QuarticIntegrand(variant, quartic, digits);
    }
};

struct FourierSeries {
    std::vector<double> coefficients;                 // A_1..A_N
    std::vector<QuadratureResult<double>> metadata;  // one per coefficient

    std::size_t size() const { return coefficients.size(); }

    double coefficient(int n) const { return coefficients.at(static_cast<std::size_t>(n - 1)); }

    WarningSet warnings() const {
        WarningSet all;
        for (const auto& m : metadata) {
            for (Warning w : m.warnings.list()) all.insert(w);
        }
        return all;
    }

    double abs_sum() const {
        double s = 0.0;
        for (double a : coefficients) s += std::abs(a);
        return s;
    }
};

/// A_n = integral over [-1,1] of phi(x) g_n(x).
inline std::pair<double, QuadratureResult<double>> fourier_coefficient(int n, const HeatConfig& cfg) {
    if (n < 1) throw std::invalid_argument("basis index must be >= 1");
    cfg.validate();
    const ProjectedIntegrand integrand(cfg.initial_condition(), n);
    auto result = integrate(integrand, -1.0, 1.0, cfg.coeff_rule, cfg.tol, cfg.limits);
    return {result.value, result};
}

/// Computes A_1..A_N, distinct n in parallel. `threads` = 0 uses the
/// hardware concurrency.
inline FourierSeries compute_series(const HeatConfig& cfg, unsigned threads = 0) {
    cfg.validate();
    const auto N = static_cast<std::size_t>(cfg.N);
    FourierSeries series;
    series.coefficients.resize(N);
    series.metadata.resize(N);

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, N));

    auto work = [&](std::size_t first) {
        for (std::size_t i = first; i < N; i += threads) {
            auto [value, meta] = fourier_coefficient(static_cast<int>(i + 1), cfg);
            series.coefficients[i] = value;
            series.metadata[i] = std::move(meta);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }

    for (std::size_t i = 0; i < N; ++i) {
        if (!std::isfinite(series.coefficients[i])) {
            throw std::runtime_error("Fourier coefficient A_" + std::to_string(i + 1) + " is not finite");
        }
    }
    return series;
}

/// Decay rate ((2n-1) pi / 2)^2 of mode n.
inline double mode_eigenvalue(int n) {
    const double k = (2.0 * n - 1.0) * std::numbers::pi / 2.0;
    return k * k;
}

/// u_n(t,x) = A_n exp(-alpha t lambda_n) g_n(x).
inline double mode(int n, double t, double x, double A_n, double alpha) {
    if (n < 1) throw std::invalid_argument("basis index must be >= 1");
    return A_n * std::exp(-alpha * t * mode_eigenvalue(n)) * basis_g(n, x);
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2) throw std::invalid_argument("a grid needs at least two points");
    std::vector<double> g(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + static_cast<double>(i) * step;
    g.back() = hi;
    return g;
}

inline std::vector<double> default_t_grid() { return uniform_grid(0.0, 1.0, 101); }
inline std::vector<double> default_x_grid() { return uniform_grid(-1.0, 1.0, 201); }

struct SolutionGrid {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> u;  // row-major: u[i * x.size() + j] = u^N(t[i], x[j])
    double alpha = kDefaultAlpha;
    WarningSet warnings;    // union of the coefficient-level warnings

    double at(std::size_t i, std::size_t j) const { return u.at(i * x.size() + j); }

    std::vector<double> row(std::size_t i) const {
        const auto first = u.begin() + static_cast<std::ptrdiff_t>(i * x.size());
        return {first, first + static_cast<std::ptrdiff_t>(x.size())};
    }
};

/// u^N on the tensor grid, summed n = 1..N in double.
inline SolutionGrid solution_grid(const FourierSeries& series, double alpha, const std::vector<double>& t_grid,
                                  const std::vector<double>& x_grid) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    for (double t : t_grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t grid point outside [0,1]");
    }
    for (double x : x_grid) {
        if (!(x >= -1.0 && x <= 1.0)) throw std::invalid_argument("x grid point outside [-1,1]");
    }
    SolutionGrid grid{t_grid, x_grid, std::vector<double>(t_grid.size() * x_grid.size(), 0.0), alpha,
                      series.warnings()};
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        for (std::size_t j = 0; j < x_grid.size(); ++j) {
            double s = 0.0;
            for (std::size_t n = 1; n <= series.size(); ++n) {
                s += mode(static_cast<int>(n), t_grid[i], x_grid[j], series.coefficients[n - 1], alpha);
            }
            grid.u[i * x_grid.size() + j] = s;
        }
    }
    return grid;
}

inline SolutionGrid solution_grid(const HeatConfig& cfg, const std::vector<double>& t_grid = default_t_grid(),
                                  const std::vector<double>& x_grid = default_x_grid()) {
    return solution_grid(compute_series(cfg), cfg.alpha, t_grid, x_grid);
}

/// Per-time-slice sup_x |clean - corrupted|.
inline std::vector<std::pair<double, double>> bias_profile(const SolutionGrid& clean, const SolutionGrid& corrupted) {
    if (clean.t != corrupted.t || clean.x != corrupted.x || clean.u.size() != corrupted.u.size()) {
        throw std::invalid_argument("bias_profile: solution grids are not conformable");
    }
    std::vector<std::pair<double, double>> profile;
    profile.reserve(clean.t.size());
    const std::size_t nx = clean.x.size();
    for (std::size_t i = 0; i < clean.t.size(); ++i) {
        double sup = 0.0;
        for (std::size_t j = 0; j < nx; ++j) {
            sup = std::max(sup, std::abs(clean.u[i * nx + j] - corrupted.u[i * nx + j]));
        }
        profile.emplace_back(clean.t[i], sup);
    }
    return profile;
}

/// sup_x |u^N(t_i, x) - phi_exact(x)| for row i.
inline double initial_error(const SolutionGrid& grid, std::size_t i = 0) {
    double sup = 0.0;
    for (std::size_t j = 0; j < grid.x.size(); ++j) {
        sup = std::max(sup, std::abs(grid.at(i, j) - phi_exact(grid.x[j])));
    }
    return sup;
}

// ---------------------------------------------------------------------------
// exports

inline void write_solution_csv(std::ostream& os, const SolutionGrid& grid) {
    CsvWriter w(os);
    w.comment("alpha=" + format_roundtrip(grid.alpha));
    w.row({"t", "x", "u"});
    for (std::size_t i = 0; i < grid.t.size(); ++i) {
        for (std::size_t j = 0; j < grid.x.size(); ++j) {
            w.row({format_roundtrip(grid.t[i]), format_roundtrip(grid.x[j]), format_roundtrip(grid.at(i, j))});
        }
    }
}

/// Inverse of write_solution_csv; requires the full tensor grid in t-major order.
inline SolutionGrid read_solution_csv(std::istream& is) {
    const CsvTable table = read_csv(is);
    if (table.header != std::vector<std::string>{"t", "x", "u"}) {
        throw std::runtime_error("solution CSV must have header t,x,u");
    }
    SolutionGrid grid;
    if (auto a = table.comment_value("alpha")) grid.alpha = parse_double(*a);
    for (const auto& r : table.rows) {
        const double t = parse_double(r.at(0));
        const double x = parse_double(r.at(1));
        if (grid.t.empty() || grid.t.back() != t) grid.t.push_back(t);
        if (grid.t.size() == 1) grid.x.push_back(x);
        grid.u.push_back(parse_double(r.at(2)));
    }
    if (grid.t.size() * grid.x.size() != grid.u.size()) {
        throw std::runtime_error("solution CSV is not a full tensor grid");
    }
    return grid;
}

inline void write_bias_csv(std::ostream& os, const std::vector<std::pair<double, double>>& profile, double alpha) {
    CsvWriter w(os);
    w.comment("alpha=" + format_roundtrip(alpha));
    w.row({"t", "sup_abs_diff"});
    for (const auto& [t, d] : profile) w.row({format_roundtrip(t), format_roundtrip(d)});
}

inline nlohmann::ordered_json coefficients_json(const HeatConfig& cfg, const FourierSeries& series) {
    nlohmann::ordered_json j;
    j["alpha"] = cfg.alpha;
    j["N"] = cfg.N;
    j["rule"] = cfg.coeff_rule.name();
    if (cfg.coeff_rule.kind == RuleId::Kind::Trapezoid) j["step"] = cfg.coeff_rule.step;
    j["regime"] = cfg.coeff_ctx.name();
    j["variant"] = std::string(variant_name(cfg.variant));
    j["delta"] = cfg.quartic.delta;
    j["coefficients"] = series.coefficients;
    auto fevals = nlohmann::ordered_json::array();
    for (const auto& m : series.metadata) fevals.push_back(m.fevals);
    j["fevals"] = fevals;
    auto warnings = nlohmann::ordered_json::array();
    for (const auto& m : series.metadata) warnings.push_back(m.warnings.to_string());
    j["warnings"] = warnings;
    return j;
}

}  // namespace quadbench
