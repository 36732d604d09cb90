#pragma once

// Parameter sweeps over (rule x parameter x variant) and their rendering as
// comparison tables: Markdown, CSV and JSON.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "quadbench/csv.hpp"
#include "quadbench/integrands.hpp"
#include "quadbench/precision.hpp"
#include "quadbench/quadrature.hpp"

namespace quadbench {

enum class SweepIntegrand { Quartic, Fourier, Finance };

inline std::string sweep_integrand_name(SweepIntegrand s) {
    switch (s) {
        case SweepIntegrand::Quartic: return "quartic";
        case SweepIntegrand::Fourier: return "fourier";
        case SweepIntegrand::Finance: return "finance";
    }
    return "?";
}

inline SweepIntegrand parse_sweep_integrand(const std::string& s) {
    for (auto k : {SweepIntegrand::Quartic, SweepIntegrand::Fourier, SweepIntegrand::Finance}) {
        if (sweep_integrand_name(k) == s) return k;
    }
    throw std::invalid_argument("unknown integrand: " + s);
}

/// "gk15", "simpson", "lobatto" or "trapz-<h>".
inline std::string rule_label(const RuleId& r) {
    if (r.kind == RuleId::Kind::Trapezoid) return "trapz-" + format_roundtrip(r.step);
    return r.name();
}

inline RuleId parse_rule_label(const std::string& s) {
    if (s == "gk15") return RuleId::gk15();
    if (s == "simpson") return RuleId::simpson();
    if (s == "lobatto") return RuleId::lobatto();
    if (s.rfind("trapz-", 0) == 0) return RuleId::trapezoid(parse_double(s.substr(6)));
    throw std::invalid_argument("unknown rule: " + s);
}

/// Integers print without exponent ("250000"); everything else round-trips.
inline std::string format_param(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    return format_roundtrip(v);
}

inline IntegrandVariant parse_variant(const std::string& name, SweepIntegrand integrand) {
    const bool finance = integrand == SweepIntegrand::Finance;
    if (name == "double") return finance ? IntegrandVariant::FinanceDouble : IntegrandVariant::QuarticDouble;
    if (name == "hiprec") return finance ? IntegrandVariant::FinanceHighPrec : IntegrandVariant::QuarticHighPrec;
    if (name == "exact" && !finance) return IntegrandVariant::QuarticExact;
    throw std::invalid_argument("variant '" + name + "' is not available for integrand " +
                                sweep_integrand_name(integrand));
}

struct SweepRow {
    int mode = 0;  // Fourier index n; 0 for the plain integrands
    RuleId rule;
    double param = 0.0;  // delta, or sigma for the pricing integrand
    IntegrandVariant variant = IntegrandVariant::QuarticDouble;
    std::complex<double> value{};
    std::complex<double> error_vs_reference{};
    double elapsed_seconds = 0.0;
    std::size_t fevals = 0;
    WarningSet warnings;

    static SweepRow cell(int mode, RuleId rule, double param, IntegrandVariant variant) {
        SweepRow r;
        r.mode = mode;
        r.rule = rule;
        r.param = param;
        r.variant = variant;
        return r;
    }

    bool is_reference() const { return rule == RuleId::gk15() && variant_name(variant) == "hiprec"; }

    /// Deterministic row order: (mode, rule, param, variant).
    static bool order(const SweepRow& a, const SweepRow& b) {
        auto key = [](const SweepRow& r) {
            return std::make_tuple(r.mode, static_cast<int>(r.rule.kind), r.rule.step, r.param,
                                   static_cast<int>(r.variant));
        };
        return key(a) < key(b);
    }
};

struct SweepReport {
    SweepIntegrand integrand = SweepIntegrand::Quartic;
    std::vector<SweepRow> rows;

    bool complex_valued() const { return integrand == SweepIntegrand::Finance; }
    std::string param_name() const { return integrand == SweepIntegrand::Finance ? "sigma" : "delta"; }

    const SweepRow& reference_for(int mode, double param) const {
        for (const auto& r : rows) {
            if (r.mode == mode && r.param == param && r.is_reference()) return r;
        }
        throw std::out_of_range("no reference row");
    }
};

struct SweepSpec {
    SweepIntegrand integrand = SweepIntegrand::Quartic;
    std::vector<RuleId> rules;
    std::vector<double> params;  // delta values, or sigma values for finance
    std::vector<IntegrandVariant> variants;
    std::vector<int> modes;  // Fourier indices (Fourier sweeps only)
    double contour_length = 100.0;
    int digits = kDefaultDigits;
    Tolerances tol{};
    Limits limits{};
    unsigned threads = 0;

    void validate() const {
        if (rules.empty()) throw std::invalid_argument("sweep needs at least one rule");
        if (params.empty()) throw std::invalid_argument("sweep needs at least one parameter value");
        if (variants.empty()) throw std::invalid_argument("sweep needs at least one variant");
        if (integrand == SweepIntegrand::Fourier) {
            if (modes.empty()) throw std::invalid_argument("Fourier sweep needs at least one mode");
            for (int n : modes) {
                if (n < 1) throw std::invalid_argument("Fourier mode must be >= 1");
            }
        }
        for (auto v : variants) {
            if (is_quartic(v) == (integrand == SweepIntegrand::Finance)) {
                throw std::invalid_argument("variant does not match the integrand");
            }
        }
        for (double p : params) {
            if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("sweep parameters must be positive");
        }
        for (const auto& r : rules) {
            if (r.kind == RuleId::Kind::Trapezoid) {
                trapezoid_panels(integrand == SweepIntegrand::Finance ? 0.0 : -1.0,
                                 integrand == SweepIntegrand::Finance ? contour_length : 1.0, r.step);
            }
        }
        PrecisionContext::high_precision(digits);
        tol.validate();
    }
};

namespace detail {

inline QuadratureResult<std::complex<double>> widen(const QuadratureResult<double>& r) {
    return {r.value, r.error_estimate, r.fevals, r.warnings, r.elapsed};
}

inline QuadratureResult<std::complex<double>> run_cell(const SweepSpec& spec, int mode, const RuleId& rule,
                                                       double param, IntegrandVariant variant) {
    switch (spec.integrand) {
        case SweepIntegrand::Quartic:
            return widen(integrate(QuarticIntegrand(variant, QuarticParams{param}, spec.digits), -1.0, 1.0, rule,
                                   spec.tol, spec.limits));
        case SweepIntegrand::Fourier:
            return widen(integrate(ProjectedIntegrand(QuarticIntegrand(variant, QuarticParams{param}, spec.digits), mode),
                                   -1.0, 1.0, rule, spec.tol, spec.limits));
        case SweepIntegrand::Finance: {
            const auto ctx = variant == IntegrandVariant::FinanceDouble ? PrecisionContext::double_precision()
                                                                        : PrecisionContext::high_precision(spec.digits);
            return integrate_contour(FinanceParams::defaults(param), spec.contour_length, rule, ctx, spec.tol,
                                     spec.limits);
        }
    }
    throw std::logic_error("unknown integrand");
}

/// Runs job(i) for i in [0, count) on up to `threads` workers; rethrows the
/// first exception.
template <class Job>
void parallel_for(std::size_t count, unsigned threads, const Job& job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// One row per (mode x rule x param x variant). The GK15/hiprec reference
/// of every (mode, param) is computed first; a non-finite reference aborts.
inline SweepReport run_sweep(const SweepSpec& spec) {
    spec.validate();
    const std::vector<int> modes = spec.integrand == SweepIntegrand::Fourier ? spec.modes : std::vector<int>{0};
    const IntegrandVariant ref_variant = spec.integrand == SweepIntegrand::Finance ? IntegrandVariant::FinanceHighPrec
                                                                                   : IntegrandVariant::QuarticHighPrec;

    std::vector<SweepRow> refs;
    for (int m : modes) {
        for (double p : spec.params) refs.push_back(SweepRow::cell(m, RuleId::gk15(), p, ref_variant));
    }
    detail::parallel_for(refs.size(), spec.threads, [&](std::size_t i) {
        auto& r = refs[i];
        const auto res = detail::run_cell(spec, r.mode, r.rule, r.param, r.variant);
        if (!std::isfinite(res.value.real()) || !std::isfinite(res.value.imag())) {
            throw std::runtime_error("reference integration failed for " + format_param(r.param));
        }
        r.value = res.value;
        r.elapsed_seconds = res.elapsed.count();
        r.fevals = res.fevals;
        r.warnings = res.warnings;
    });

    SweepReport report;
    report.integrand = spec.integrand;
    for (int m : modes) {
        for (const auto& rule : spec.rules) {
            for (double p : spec.params) {
                for (auto v : spec.variants) report.rows.push_back(SweepRow::cell(m, rule, p, v));
            }
        }
    }
    std::sort(report.rows.begin(), report.rows.end(), SweepRow::order);

    auto find_ref = [&](int m, double p) -> const SweepRow& {
        for (const auto& r : refs) {
            if (r.mode == m && r.param == p) return r;
        }
        throw std::logic_error("missing reference");
    };

    detail::parallel_for(report.rows.size(), spec.threads, [&](std::size_t i) {
        auto& r = report.rows[i];
        const SweepRow& ref = find_ref(r.mode, r.param);
        if (r.is_reference()) {
            r.value = ref.value;
            r.elapsed_seconds = ref.elapsed_seconds;
            r.fevals = ref.fevals;
            r.warnings = ref.warnings;
        } else {
            const auto res = detail::run_cell(spec, r.mode, r.rule, r.param, r.variant);
            r.value = res.value;
            r.elapsed_seconds = res.elapsed.count();
            r.fevals = res.fevals;
            r.warnings = res.warnings;
        }
        r.error_vs_reference = r.value - ref.value;
    });
    return report;
}

// ---------------------------------------------------------------------------
// rendering

inline std::vector<std::string> sweep_csv_header(const SweepReport& report) {
    std::vector<std::string> h = {"integrand", "mode", "rule", report.param_name(), "variant"};
    if (report.complex_valued()) {
        h.insert(h.end(), {"value_re", "value_im", "error_re", "error_im"});
    } else {
        h.insert(h.end(), {"value", "error"});
    }
    h.insert(h.end(), {"elapsed_seconds", "fevals", "warnings"});
    return h;
}

inline void write_sweep_csv(std::ostream& os, const SweepReport& report) {
    CsvWriter w(os);
    w.row(sweep_csv_header(report));
    for (const auto& r : report.rows) {
        std::vector<std::string> f = {sweep_integrand_name(report.integrand), std::to_string(r.mode),
                                      rule_label(r.rule), format_param(r.param),
                                      std::string(variant_name(r.variant))};
        f.push_back(format_fixed(r.value.real()));
        if (report.complex_valued()) f.push_back(format_fixed(r.value.imag()));
        f.push_back(format_fixed(r.error_vs_reference.real()));
        if (report.complex_valued()) f.push_back(format_fixed(r.error_vs_reference.imag()));
        f.push_back(format_fixed(r.elapsed_seconds, 3));
        f.push_back(std::to_string(r.fevals));
        f.push_back(r.warnings.to_string());
        w.row(f);
    }
}

/// Inverse of write_sweep_csv (values come back at their printed precision).
inline SweepReport read_sweep_csv(std::istream& is) {
    const CsvTable t = read_csv(is);
    SweepReport report;
    if (t.rows.empty()) {
        report.integrand = t.header.at(3) == "sigma" ? SweepIntegrand::Finance : SweepIntegrand::Quartic;
        return report;
    }
    report.integrand = parse_sweep_integrand(t.rows.front().at(0));
    if (t.header != sweep_csv_header(report)) throw std::runtime_error("unexpected sweep CSV header");
    const bool cplx = report.complex_valued();
    for (const auto& f : t.rows) {
        SweepRow r;
        std::size_t c = 1;
        r.mode = std::stoi(f.at(c++));
        r.rule = parse_rule_label(f.at(c++));
        r.param = parse_double(f.at(c++));
        r.variant = parse_variant(f.at(c++), report.integrand);
        const double vre = parse_double(f.at(c++));
        const double vim = cplx ? parse_double(f.at(c++)) : 0.0;
        const double ere = parse_double(f.at(c++));
        const double eim = cplx ? parse_double(f.at(c++)) : 0.0;
        r.value = {vre, vim};
        r.error_vs_reference = {ere, eim};
        r.elapsed_seconds = parse_double(f.at(c++));
        r.fevals = std::stoull(f.at(c++));
        r.warnings = WarningSet::parse(f.at(c++));
        report.rows.push_back(r);
    }
    return report;
}

inline void write_sweep_markdown(std::ostream& os, const SweepReport& report) {
    const bool fourier = report.integrand == SweepIntegrand::Fourier;
    const bool cplx = report.complex_valued();
    os << '|';
    if (fourier) os << " n |";
    os << " Method | " << report.param_name() << " | Variant | Value |";
    if (cplx) os << " Value (imag) |";
    os << " Error |";
    if (cplx) os << " Error (imag) |";
    os << " Time [s] | Fevals | Warnings |\n|";
    const int columns = 8 + (fourier ? 1 : 0) + (cplx ? 2 : 0);
    for (int i = 0; i < columns; ++i) os << "---|";
    os << '\n';
    for (const auto& r : report.rows) {
        os << '|';
        if (fourier) os << ' ' << r.mode << " |";
        os << ' ' << rule_label(r.rule) << " | " << format_param(r.param) << " | " << variant_label(r.variant)
           << " | " << format_fixed(r.value.real()) << " |";
        if (cplx) os << ' ' << format_fixed(r.value.imag()) << " |";
        os << ' ' << format_fixed(r.error_vs_reference.real()) << " |";
        if (cplx) os << ' ' << format_fixed(r.error_vs_reference.imag()) << " |";
        os << ' ' << format_fixed(r.elapsed_seconds, 3) << " | " << r.fevals << " | "
           << (r.warnings.empty() ? "No" : r.warnings.to_string()) << " |\n";
    }
}

inline nlohmann::ordered_json to_json(const SweepReport& report) {
    nlohmann::ordered_json j;
    j["integrand"] = sweep_integrand_name(report.integrand);
    j["param_name"] = report.param_name();
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["mode"] = r.mode;
        row["rule"] = rule_label(r.rule);
        row["param"] = r.param;
        row["variant"] = std::string(variant_name(r.variant));
        if (report.complex_valued()) {
            row["value"] = {r.value.real(), r.value.imag()};
            row["error_vs_reference"] = {r.error_vs_reference.real(), r.error_vs_reference.imag()};
        } else {
            row["value"] = r.value.real();
            row["error_vs_reference"] = r.error_vs_reference.real();
        }
        row["elapsed_seconds"] = r.elapsed_seconds;
        row["fevals"] = r.fevals;
        row["warnings"] = r.warnings.to_string();
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

}  // namespace quadbench
