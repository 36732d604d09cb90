#pragma once

// Command-line front end. run_cli() is the whole program; the executable in
// tools/ only forwards argv and the standard streams.
//
// Exit codes: 0 clean, 2 at least one quadrature warning (messages on the
// error stream), 64 usage error, 1 runtime failure (I/O, aborted reference).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadbench/csv.hpp"
#include "quadbench/diagnostics.hpp"
#include "quadbench/heat.hpp"
#include "quadbench/integrands.hpp"
#include "quadbench/precision.hpp"
#include "quadbench/quadrature.hpp"
#include "quadbench/report.hpp"
#include "quadbench/sobol.hpp"

namespace quadbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitWarnings = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitFailure = 1;

inline constexpr int kInitialPoints = 50;
inline constexpr int kBoundaryPoints = 25;
inline constexpr int kInteriorPoints = 10000;

/// Parsed invocation, validated before any computation.
struct RunConfig {
    std::string command;
    std::string integrand = "quartic";
    std::vector<std::string> variants;
    std::vector<std::string> rules;
    double step = 0.01;
    std::vector<double> deltas;
    std::vector<double> sigmas;
    std::vector<int> fourier_n;
    double length = 100.0;
    int digits = default_digits();
    double abstol = Tolerances{}.abs_tol;
    double reltol = Tolerances{}.rel_tol;
    double alpha = kDefaultAlpha;
    int modes = 50;
    int grid = kDefaultNoiseGrid;
    double threshold = kDefaultNoiseThreshold;
    std::string out;
    std::string format = "md";
    unsigned seed = 0;
    unsigned threads = 0;

    Tolerances tolerances() const {
        Tolerances t{abstol, reltol};
        t.validate();
        return t;
    }

    RuleId rule(const std::string& name) const {
        if (name == "trapz") return RuleId::trapezoid(step);
        return parse_rule_label(name);
    }
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace cli_detail {

inline void emit_warnings(const WarningSet& w, std::ostream& err) {
    for (Warning x : w.list()) err << "warning: " << warning_message(x) << '\n';
}

/// Writes through `render` either to cfg.out or to `out`.
template <class Render>
void write_output(const RunConfig& cfg, std::ostream& out, const Render& render) {
    if (cfg.out.empty()) {
        render(out);
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + cfg.out + " for writing");
    render(f);
    if (!f) throw std::runtime_error("failed writing " + cfg.out);
}

inline std::ofstream open_in_dir(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
    return f;
}

inline SweepIntegrand integrand_kind(const RunConfig& cfg) {
    try {
        return parse_sweep_integrand(cfg.integrand);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

inline double single(const std::vector<double>& v, double fallback, const char* flag) {
    if (v.empty()) return fallback;
    if (v.size() != 1) throw UsageError(std::string(flag) + " takes a single value for this command");
    return v.front();
}

// --------------------------------------------------------------------------

inline int cmd_integrate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const SweepIntegrand kind = integrand_kind(cfg);
    if (cfg.variants.size() > 1 || cfg.rules.size() > 1) throw UsageError("integrate takes one variant and one rule");
    const std::string variant_str = cfg.variants.empty() ? "hiprec" : cfg.variants.front();
    const std::string rule_str = cfg.rules.empty() ? "gk15" : cfg.rules.front();
    const bool finance = kind == SweepIntegrand::Finance;
    if (kind == SweepIntegrand::Fourier && cfg.fourier_n.size() != 1) {
        throw UsageError("--n takes exactly one mode for integrate");
    }

    SweepSpec spec;
    spec.integrand = kind;
    spec.rules = {cfg.rule(rule_str)};
    spec.params = {finance ? single(cfg.sigmas, 1e-5, "--sigma") : single(cfg.deltas, 1000.0, "--delta")};
    spec.variants = {parse_variant(variant_str, kind)};
    spec.modes = cfg.fourier_n;
    spec.contour_length = cfg.length;
    spec.digits = cfg.digits;
    spec.tol = cfg.tolerances();
    spec.validate();

    const int mode = kind == SweepIntegrand::Fourier ? cfg.fourier_n.front() : 0;
    const auto res = detail::run_cell(spec, mode, spec.rules.front(), spec.params.front(), spec.variants.front());

    const std::string param_name = finance ? "sigma" : "delta";
    write_output(cfg, out, [&](std::ostream& os) {
        if (cfg.format == "json") {
            nlohmann::ordered_json j;
            j["integrand"] = cfg.integrand;
            if (mode) j["mode"] = mode;
            j["rule"] = rule_label(spec.rules.front());
            j[param_name] = spec.params.front();
            j["variant"] = variant_str;
            if (finance) {
                j["value"] = {res.value.real(), res.value.imag()};
            } else {
                j["value"] = res.value.real();
            }
            j["error_estimate"] = res.error_estimate;
            j["elapsed_seconds"] = res.elapsed.count();
            j["fevals"] = res.fevals;
            j["warnings"] = res.warnings.to_string();
            os << j.dump(2) << '\n';
            return;
        }
        std::vector<std::string> header = {"rule", param_name, "variant", finance ? "value_re" : "value"};
        std::vector<std::string> row = {rule_label(spec.rules.front()), format_param(spec.params.front()),
                                        variant_str, format_fixed(res.value.real())};
        if (finance) {
            header.push_back("value_im");
            row.push_back(format_fixed(res.value.imag()));
        }
        header.insert(header.end(), {"error_estimate", "elapsed_seconds", "fevals", "warnings"});
        row.insert(row.end(), {format_fixed(res.error_estimate), format_fixed(res.elapsed.count(), 3),
                               std::to_string(res.fevals), res.warnings.to_string()});
        if (cfg.format == "csv") {
            CsvWriter w(os);
            w.row(header);
            w.row(row);
        } else {
            if (row.back().empty()) row.back() = "No";
            os << '|';
            for (const auto& h : header) os << ' ' << h << " |";
            os << "\n|";
            for (std::size_t i = 0; i < header.size(); ++i) os << "---|";
            os << "\n|";
            for (const auto& c : row) os << ' ' << c << " |";
            os << '\n';
        }
    });
    emit_warnings(res.warnings, err);
    return res.warnings.empty() ? kExitOk : kExitWarnings;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const SweepIntegrand kind = integrand_kind(cfg);
    const bool finance = kind == SweepIntegrand::Finance;

    SweepSpec spec;
    spec.integrand = kind;
    const std::vector<std::string> rules =
        cfg.rules.empty() ? std::vector<std::string>{"gk15", "simpson", "lobatto", "trapz"} : cfg.rules;
    for (const auto& r : rules) spec.rules.push_back(cfg.rule(r));
    if (finance) {
        spec.params = cfg.sigmas.empty() ? std::vector<double>{1e-5} : cfg.sigmas;
    } else {
        spec.params = cfg.deltas.empty() ? std::vector<double>{1000.0, 10000.0, 100000.0, 250000.0} : cfg.deltas;
    }
    const std::vector<std::string> variants =
        !cfg.variants.empty() ? cfg.variants
        : finance             ? std::vector<std::string>{"double", "hiprec"}
                              : std::vector<std::string>{"double", "hiprec", "exact"};
    for (const auto& v : variants) spec.variants.push_back(parse_variant(v, kind));
    spec.modes = cfg.fourier_n.empty() && kind == SweepIntegrand::Fourier ? std::vector<int>{1, 2} : cfg.fourier_n;
    spec.contour_length = cfg.length;
    spec.digits = cfg.digits;
    spec.tol = cfg.tolerances();
    spec.threads = cfg.threads;
    spec.validate();

    const SweepReport report = run_sweep(spec);
    write_output(cfg, out, [&](std::ostream& os) {
        if (cfg.format == "csv") {
            write_sweep_csv(os, report);
        } else if (cfg.format == "json") {
            os << to_json(report).dump(2) << '\n';
        } else {
            write_sweep_markdown(os, report);
        }
    });
    WarningSet all;
    for (const auto& r : report.rows) {
        for (Warning w : r.warnings.list()) all.insert(w);
    }
    emit_warnings(all, err);
    return all.empty() ? kExitOk : kExitWarnings;
}

inline int cmd_heat(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.rules.size() > 1) throw UsageError("heat takes one rule");
    const double delta = single(cfg.deltas, 100000.0, "--delta");
    const RuleId rule = cfg.rule(cfg.rules.empty() ? "gk15" : cfg.rules.front());

    HeatConfig clean = HeatConfig::clean(delta, cfg.modes, cfg.digits);
    HeatConfig corrupted = HeatConfig::corrupted(delta, cfg.modes);
    for (HeatConfig* c : {&clean, &corrupted}) {
        c->alpha = cfg.alpha;
        c->coeff_rule = rule;
        c->tol = cfg.tolerances();
        c->validate();
    }

    const auto t_grid = default_t_grid();
    const auto x_grid = default_x_grid();
    const FourierSeries s_clean = compute_series(clean, cfg.threads);
    const FourierSeries s_corrupted = compute_series(corrupted, cfg.threads);
    const SolutionGrid g_clean = solution_grid(s_clean, cfg.alpha, t_grid, x_grid);
    const SolutionGrid g_corrupted = solution_grid(s_corrupted, cfg.alpha, t_grid, x_grid);
    const auto profile = bias_profile(g_clean, g_corrupted);

    const std::filesystem::path dir = cfg.out.empty() ? "." : cfg.out;
    {
        auto f = open_in_dir(dir, "solution_clean.csv");
        write_solution_csv(f, g_clean);
    }
    {
        auto f = open_in_dir(dir, "solution_corrupted.csv");
        write_solution_csv(f, g_corrupted);
    }
    {
        auto f = open_in_dir(dir, "bias_profile.csv");
        write_bias_csv(f, profile, cfg.alpha);
    }
    {
        auto f = open_in_dir(dir, "coefficients_clean.json");
        f << coefficients_json(clean, s_clean).dump(2) << '\n';
    }
    {
        auto f = open_in_dir(dir, "coefficients_corrupted.json");
        f << coefficients_json(corrupted, s_corrupted).dump(2) << '\n';
    }

    out << "clean t=0 error vs phi_exact:     " << format_fixed(initial_error(g_clean)) << '\n'
        << "corrupted t=0 error vs phi_exact: " << format_fixed(initial_error(g_corrupted)) << '\n'
        << "bias at t=0: " << format_fixed(profile.front().second) << ", at t=1: "
        << format_fixed(profile.back().second) << '\n'
        << "wrote " << (dir / "solution_clean.csv").string() << ", solution_corrupted.csv, bias_profile.csv, "
        << "coefficients_clean.json, coefficients_corrupted.json\n";

    WarningSet all = g_clean.warnings;
    for (Warning w : g_corrupted.warnings.list()) all.insert(w);
    emit_warnings(all, err);
    return all.empty() ? kExitOk : kExitWarnings;
}

inline int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
    const SweepIntegrand kind = integrand_kind(cfg);
    if (kind != SweepIntegrand::Quartic) throw UsageError("diagnose supports --integrand quartic");
    const double delta = single(cfg.deltas, 100000.0, "--delta");
    const QuarticIntegrand f_double(IntegrandVariant::QuarticDouble, QuarticParams{delta});
    const QuarticIntegrand f_hiprec(IntegrandVariant::QuarticHighPrec, QuarticParams{delta}, cfg.digits);
    const NoiseReport report = noise_floor(f_double, f_hiprec, -1.0, 1.0, cfg.grid, cfg.threshold);
    const PrecisionContext regime = recommend_regime(report, cfg.tolerances());
    write_output(cfg, out, [&](std::ostream& os) {
        auto j = to_json(report);
        if (cfg.format == "json") {
            os << j.dump(2) << '\n';
        } else if (cfg.format == "csv") {
            CsvWriter w(os);
            w.row({"delta", "max_abs_dev", "max_rel_dev", "collapse", "grid_size", "recommendation", "regime"});
            w.row({format_param(delta), format_roundtrip(report.max_abs_dev), format_roundtrip(report.max_rel_dev),
                   report.collapse ? "true" : "false", std::to_string(report.grid_size),
                   recommendation_name(report.recommendation), regime.name()});
        } else {
            os << "| delta | max_abs_dev | max_rel_dev | collapse | grid_size | recommendation | regime |\n"
               << "|---|---|---|---|---|---|---|\n"
               << "| " << format_param(delta) << " | " << format_roundtrip(report.max_abs_dev) << " | "
               << format_roundtrip(report.max_rel_dev) << " | " << (report.collapse ? "true" : "false") << " | "
               << report.grid_size << " | " << recommendation_name(report.recommendation) << " | "
               << regime.name() << " |\n";
        }
    });
    return kExitOk;
}

inline int cmd_emit_training_data(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
    if (cfg.variants.size() > 1) throw UsageError("emit-training-data takes one variant");
    if (!(cfg.alpha > 0.0)) throw UsageError("--alpha must be positive");
    const std::string variant_str = cfg.variants.empty() ? "exact" : cfg.variants.front();
    const IntegrandVariant variant = parse_variant(variant_str, SweepIntegrand::Quartic);
    const double delta = single(cfg.deltas, 100000.0, "--delta");

    const std::filesystem::path dir = cfg.out.empty() ? "." : cfg.out;
    auto header = [&](CsvWriter& w) {
        w.comment("alpha=" + format_roundtrip(cfg.alpha));
        w.comment("variant=" + variant_str);
        w.comment("delta=" + format_roundtrip(delta));
        w.comment("seed=" + std::to_string(cfg.seed));
    };
    {
        auto f = open_in_dir(dir, "initial.csv");
        CsvWriter w(f);
        header(w);
        w.row({"t", "x", "u"});
        const auto samples =
            sample_initial_condition(variant, QuarticParams{delta}, uniform_grid(-1.0, 1.0, kInitialPoints), cfg.digits);
        for (const auto& [x, u] : samples) w.row({"0", format_roundtrip(x), format_roundtrip(u)});
    }
    {
        auto f = open_in_dir(dir, "boundary.csv");
        CsvWriter w(f);
        header(w);
        w.row({"t", "x", "u"});
        for (double xb : {-1.0, 1.0}) {
            for (double t : uniform_grid(0.0, 1.0, kBoundaryPoints)) {
                w.row({format_roundtrip(t), format_roundtrip(xb), "0"});
            }
        }
    }
    {
        auto f = open_in_dir(dir, "interior.csv");
        CsvWriter w(f);
        header(w);
        w.row({"t", "x"});
        Sobol2D sobol;
        sobol.skip(1);  // index 0 is the corner (t=0, x=-1)
        for (int i = 0; i < kInteriorPoints; ++i) {
            const auto p = sobol.next();
            w.row({format_roundtrip(p[0]), format_roundtrip(2.0 * p[1] - 1.0)});
        }
    }
    out << "wrote " << (dir / "initial.csv").string() << " (" << kInitialPoints << "), boundary.csv ("
        << 2 * kBoundaryPoints << "), interior.csv (" << kInteriorPoints << ")\n";
    return kExitOk;
}

}  // namespace cli_detail

/// Parses argv and runs one command. Never throws.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"quadbench: quadrature under double and high-precision integrand evaluation"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--integrand", cfg.integrand, "quartic | fourier | finance")
            ->check(CLI::IsMember({"quartic", "fourier", "finance"}));
        sub->add_option("--variant", cfg.variants, "double | hiprec | exact (comma-separated for sweeps)")
            ->delimiter(',')
            ->check(CLI::IsMember({"double", "hiprec", "exact"}));
        sub->add_option("--rule", cfg.rules, "gk15 | simpson | lobatto | trapz (comma-separated for sweeps)")
            ->delimiter(',')
            ->check(CLI::IsMember({"gk15", "simpson", "lobatto", "trapz"}));
        sub->add_option("--step", cfg.step, "trapezoid step h")->check(CLI::PositiveNumber);
        sub->add_option("--delta", cfg.deltas, "quartic parameter delta (comma-separated for sweeps)")
            ->delimiter(',')
            ->check(CLI::PositiveNumber);
        sub->add_option("--sigma", cfg.sigmas, "pricing-integrand sigma (comma-separated for sweeps)")
            ->delimiter(',')
            ->check(CLI::PositiveNumber);
        sub->add_option("--n", cfg.fourier_n, "Fourier mode index for --integrand fourier")
            ->delimiter(',')
            ->check(CLI::PositiveNumber);
        sub->add_option("--length", cfg.length, "contour length L for --integrand finance")->check(CLI::PositiveNumber);
        sub->add_option("--digits", cfg.digits, "significant digits of the high-precision regime")
            ->check(CLI::Range(16, 100000));
        sub->add_option("--abstol", cfg.abstol, "absolute tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--reltol", cfg.reltol, "relative tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--alpha", cfg.alpha, "heat diffusivity")->check(CLI::PositiveNumber);
        sub->add_option("--modes", cfg.modes, "heat truncation order N")->check(CLI::Range(1, 100000));
        sub->add_option("--out", cfg.out, "output file (directory for heat / emit-training-data)");
        sub->add_option("--format", cfg.format, "csv | md | json")->check(CLI::IsMember({"csv", "md", "json"}));
        sub->add_option("--seed", cfg.seed, "seed recorded for PINN sample shuffling");
        sub->add_option("--threads", cfg.threads, "worker threads (0 = hardware concurrency)");
    };

    auto* integrate = app.add_subcommand("integrate", "run one integration");
    auto* sweep = app.add_subcommand("sweep", "rule x parameter x variant comparison table");
    auto* heat = app.add_subcommand("heat", "clean vs corrupted heat-equation solutions and bias profile");
    auto* diagnose = app.add_subcommand("diagnose", "double vs high-precision noise-floor report");
    auto* emit = app.add_subcommand("emit-training-data", "initial/boundary/interior CSVs for the PINN demo");
    for (auto* sub : {integrate, sweep, heat, diagnose, emit}) add_common(sub);
    diagnose->add_option("--grid", cfg.grid, "grid size (>= 16)")->check(CLI::Range(16, 100000000));
    diagnose->add_option("--threshold", cfg.threshold, "relative escalation threshold")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*integrate) return cli_detail::cmd_integrate(cfg, out, err);
        if (*sweep) return cli_detail::cmd_sweep(cfg, out, err);
        if (*heat) return cli_detail::cmd_heat(cfg, out, err);
        if (*diagnose) return cli_detail::cmd_diagnose(cfg, out, err);
        if (*emit) return cli_detail::cmd_emit_training_data(cfg, out, err);
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace quadbench
