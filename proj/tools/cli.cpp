#include "cli.hpp"

#include "ccf/error.hpp"
#include "ccf/experiments.hpp"
#include "ccf/operators.hpp"
#include "ccf/regularity.hpp"
#include "ccf/solver.hpp"
#include "ccf/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <set>

namespace ccf::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using spectral::RealField;
using spectral::SpectralField;
using spectral::TorusGrid;

namespace {

/// Values given on the command line. Each override is applied only when its
/// flag was seen, so config-file values survive otherwise.
struct Overrides {
    std::string config_path;
    std::vector<double> gamma;
    std::vector<std::size_t> n;
    double t_end = 0.0;
    double alpha = 0.0;
    std::vector<std::string> datum;
    bool inviscid = false;
    std::string out_dir;
    std::uint64_t seed = 1;
    unsigned jobs = 1;

    CLI::Option* o_gamma = nullptr;
    CLI::Option* o_n = nullptr;
    CLI::Option* o_t_end = nullptr;
    CLI::Option* o_alpha = nullptr;
    CLI::Option* o_datum = nullptr;
    CLI::Option* o_out_dir = nullptr;
};

fs::path resolve_out_dir(const Overrides& o) {
    if (o.o_out_dir && o.o_out_dir->count() > 0) return o.out_dir;
    if (const char* env = std::getenv("CCF_OUT_DIR"); env && *env) return env;
    return "ccf_out";
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config", "'" + path + "' is not valid JSON: " + e.what());
    }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError("config", where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ValidationError("config", "unknown key '" + key + "' in " + where);
}

template <class F>
auto from_json_checked(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ValidationError("config", std::string("wrong value type: ") + e.what());
    }
}

std::set<std::string> run_config_keys() {
    const auto defaults = experiments::config_to_json(experiments::RunConfig{});
    std::set<std::string> keys;
    for (const auto& [k, v] : defaults.items()) keys.insert(k);
    return keys;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const Overrides& o, std::ostream& out) {
    experiments::RunConfig cfg;
    if (!o.config_path.empty()) {
        const json j = load_json(o.config_path);
        reject_unknown_keys(j, run_config_keys(), o.config_path);
        cfg = from_json_checked([&] { return experiments::config_from_json(j); });
    }
    if (o.o_gamma->count()) cfg.params.gamma = o.gamma.front();
    if (o.o_n->count()) cfg.params.n = o.n.front();
    if (o.o_t_end->count()) cfg.control.t_end = o.t_end;
    if (o.o_alpha->count()) cfg.alpha = o.alpha;
    if (o.o_datum->count()) cfg.datum = experiments::InitialDatum::parse(o.datum.front());
    if (o.inviscid) cfg.params.dissipation_on = false;

    const auto record = experiments::execute(cfg);
    const fs::path store = resolve_out_dir(o) / "records.jsonl";
    experiments::append_record(store, record);

    out << "config " << record.config_hash << ": " << experiments::config_to_json(cfg).dump() << '\n';
    out << "outcome " << solver::to_string(record.outcome);
    if (!record.detail.empty()) out << " (" << record.detail << ")";
    out << "\nsteps " << record.step_count << ", t_final "
        << (record.samples.empty() ? 0.0 : record.samples.back().t) << ", wall " << fmt(record.wall_time, "%.3f")
        << " s\n";
    if (record.t_star_predicted) out << "T* (predicted) " << fmt(*record.t_star_predicted) << '\n';
    if (record.t_local_predicted) out << "T1 (predicted) " << fmt(*record.t_local_predicted) << '\n';
    out << "record appended to " << store.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const Overrides& o, std::ostream& out) {
    experiments::SweepPlan plan;
    experiments::RunConfig base;
    plan.gamma_values = {base.params.gamma};
    plan.data = {base.datum};
    plan.resolutions = {base.params.n};

    if (!o.config_path.empty()) {
        const json j = load_json(o.config_path);
        reject_unknown_keys(j,
                            {"gamma_values", "data", "resolutions", "constants", "cfl", "dt_max", "t_end",
                             "snapshot_every", "dissipation_on", "dealias_on", "alpha"},
                            o.config_path);
        from_json_checked([&] {
            if (j.contains("gamma_values")) plan.gamma_values = j.at("gamma_values").get<std::vector<double>>();
            if (j.contains("resolutions")) plan.resolutions = j.at("resolutions").get<std::vector<std::size_t>>();
            if (j.contains("data")) {
                plan.data.clear();
                for (const auto& d : j.at("data")) plan.data.push_back(experiments::config_from_json({{"datum", d}}).datum);
            }
            if (j.contains("constants")) {
                plan.constants.clear();
                for (const auto& c : j.at("constants"))
                    plan.constants.push_back(experiments::config_from_json({{"constants", c}}).constants);
            }
            // Scalar run settings share the run-config reader.
            json scalars = json::object();
            for (const char* k : {"cfl", "dt_max", "t_end", "snapshot_every", "dissipation_on", "dealias_on", "alpha"})
                if (j.contains(k)) scalars[k] = j.at(k);
            const auto s = experiments::config_from_json(scalars);
            plan.control = s.control;
            plan.dissipation_on = s.params.dissipation_on;
            plan.dealias_on = s.params.dealias_on;
            plan.alpha = s.alpha;
            return 0;
        });
    }
    if (o.o_gamma->count()) plan.gamma_values = o.gamma;
    if (o.o_n->count()) plan.resolutions = o.n;
    if (o.o_t_end->count()) plan.control.t_end = o.t_end;
    if (o.o_alpha->count()) plan.alpha = o.alpha;
    if (o.o_datum->count()) {
        plan.data.clear();
        for (const auto& d : o.datum) plan.data.push_back(experiments::InitialDatum::parse(d));
    }
    if (o.inviscid) plan.dissipation_on = false;
    plan.parallelism = o.jobs;

    // Reject bad cells before any simulation starts.
    for (const auto& cell : plan.cells()) {
        cell.params.validate();
        cell.constants.validate();
        if (cell.alpha && !(cell.params.gamma < 1.0))
            throw ValidationError("gamma", "an explicit alpha needs gamma < 1, got " + fmt(cell.params.gamma));
    }

    const fs::path store = resolve_out_dir(o) / "records.jsonl";
    const auto summary = experiments::sweep(plan, store);
    out << "sweep: " << summary.records.size() << " cells, " << summary.simulated << " simulated, "
        << summary.skipped << " already stored\n";
    for (const auto& r : summary.records)
        out << "  " << r.config_hash << "  gamma=" << r.config.params.gamma << " n=" << r.config.params.n << ' '
            << r.config.datum.label() << "  " << solver::to_string(r.outcome) << '\n';
    out << "records in " << store.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct Check {
    std::string name;
    double residual;
    double tolerance;
    bool ok() const { return residual < tolerance; }
};

/// Random real trigonometric polynomial with modes 1..band and 1/m amplitudes.
RealField random_field(const TorusGrid& grid, std::mt19937_64& rng, int band, double mean) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
    std::vector<std::pair<double, double>> modes;
    for (int m = 1; m <= band; ++m) modes.emplace_back(amp(rng) / m, phase(rng));
    return RealField::sample(grid, [&](double x) {
        double v = mean;
        for (int m = 1; m <= band; ++m) v += modes[m - 1].first * std::cos(m * x + modes[m - 1].second);
        return v;
    });
}

double rel_max_diff(const RealField& a, const RealField& b) {
    return spectral::max_abs_diff(a, b) / std::max(1.0, b.max_abs());
}

std::vector<Check> verify_suite(std::size_t n, std::uint64_t seed, const std::vector<double>& gammas) {
    using namespace ops;
    const TorusGrid grid(n);
    std::mt19937_64 rng(seed);
    std::vector<Check> checks;

    double hh = 0.0, skew = 0.0, lam = 0.0, comp = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_field(grid, rng, 16, 0.0);
        const auto g = random_field(grid, rng, 16, 0.0);
        const auto F = spectral::forward(f), G = spectral::forward(g);
        hh = std::max(hh, rel_max_diff(spectral::inverse(hilbert(hilbert(F))), -1.0 * f));
        const auto Hf = spectral::inverse(hilbert(F)), Hg = spectral::inverse(hilbert(G));
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            a += Hf[j] * g[j];
            b += f[j] * Hg[j];
        }
        skew = std::max(skew, std::abs(a + b) * grid.spacing());
        lam = std::max(lam, rel_max_diff(spectral::inverse(frac_laplacian_spectral(F, 1.0)),
                                         spectral::inverse(hilbert(spectral::derivative(F)))));
        comp = std::max(comp, rel_max_diff(spectral::inverse(frac_laplacian_spectral(frac_laplacian_spectral(F, 0.4), 0.7)),
                                           spectral::inverse(frac_laplacian_spectral(F, 1.1))));
    }
    checks.push_back({"H(H f) = -f (mean-free, 20 fields)", hh, 1e-10});
    checks.push_back({"<Hf,g> = -<f,Hg>", skew, 1e-10});
    checks.push_back({"Lambda^1 = H d/dx", lam, 1e-10});
    checks.push_back({"Lambda^0.4 Lambda^0.7 = Lambda^1.1", comp, 1e-10});

    const auto cosx = RealField::sample(grid, [](double x) { return std::cos(x); });
    const auto mixed = RealField::sample(grid, [](double x) { return 1.0 + std::cos(x) + 0.3 * std::cos(3.0 * x); });
    for (double gamma : gammas) {
        const auto cal = calibrate_cgamma(gamma, grid);
        const std::string tag = " [gamma=" + fmt(gamma, "%.3g") + "]";
        checks.push_back({"c_gamma calibration residual (mode 1)" + tag, cal.residual, 1e-3});
        checks.push_back({"quadrature mismatch on mode 2" + tag, cross_mode_mismatch(cal, grid, 2), 1e-2});
        checks.push_back({"Cordoba identity, cos x" + tag, cordoba_identity_residual(cosx, gamma, cal), 5e-2});
        checks.push_back(
            {"Cordoba identity, 1+cos x+0.3cos 3x" + tag, cordoba_identity_residual(mixed, gamma, cal), 5e-2});
        const auto closed = RealField::sample(
            grid, [gamma](double x) { return 1.0 + (1.0 - std::pow(2.0, gamma - 1.0)) * std::cos(2.0 * x); });
        checks.push_back({"D_gamma(cos) closed form" + tag, spectral::max_abs_diff(dgamma(cosx, 0, gamma, cal), closed),
                          1e-2});
    }
    return checks;
}

int cmd_verify(const Overrides& o, std::ostream& out) {
    const std::size_t n = o.o_n->count() ? o.n.front() : 256;
    const std::vector<double> gammas = o.o_gamma->count() ? o.gamma : std::vector<double>{0.5, 0.7, 0.9, 1.0};
    for (double g : gammas)
        if (!(g > 0.0 && g < 2.0)) throw ValidationError("gamma", "must lie in (0, 2), got " + fmt(g));
    const auto checks = verify_suite(n, o.seed, gammas);

    std::size_t width = 0;
    for (const auto& c : checks) width = std::max(width, c.name.size());
    out << "identity residuals (n = " << n << ", seed = " << o.seed << ")\n";
    bool all = true;
    for (const auto& c : checks) {
        out << "  " << c.name << std::string(width - c.name.size() + 2, ' ') << fmt(c.residual, "%.3e") << "  < "
            << fmt(c.tolerance, "%.0e") << "  " << (c.ok() ? "ok" : "FAIL") << '\n';
        all = all && c.ok();
    }
    out << (all ? "all identities within tolerance\n" : "some identities exceed tolerance\n");
    return all ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------
// calibrate

int cmd_calibrate(const Overrides& o, std::ostream& out) {
    const std::size_t n = o.o_n->count() ? o.n.front() : 256;
    const std::vector<double> gammas = o.o_gamma->count() ? o.gamma : std::vector<double>{0.5, 0.7, 0.9};
    const TorusGrid grid(n);
    json rows = json::array();
    for (double g : gammas) {
        const auto cal = ops::calibrate_cgamma(g, grid);
        rows.push_back({{"gamma", g},
                        {"c_gamma", cal.c_gamma},
                        {"residual_mode1", cal.residual},
                        {"mismatch_mode2", ops::cross_mode_mismatch(cal, grid, 2)},
                        {"n", n},
                        {"image_count", ops::QuadratureConfig{}.image_count}});
    }
    out << rows.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const Overrides& o, std::ostream& out) {
    const fs::path dir = resolve_out_dir(o);
    const auto records = experiments::load_records(dir / "records.jsonl");
    if (records.empty()) throw Error("no records found in " + (dir / "records.jsonl").string());
    const auto bundle = experiments::report(records, dir);
    out << "summary: " << bundle.csv.string() << " (" << records.size() << " rows)\n";
    out << "charts:  " << bundle.charts.size() << " SVG files in " << (dir / "charts").string() << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and verification tool for a 1D transport equation with fractional dissipation",
                 "ccf"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    Overrides o;
    auto add_model_flags = [&o](CLI::App* cmd, bool multi) {
        o.o_gamma = cmd->add_option("--gamma", o.gamma, multi ? "Dissipation exponents" : "Dissipation exponent");
        o.o_n = cmd->add_option("--n", o.n, multi ? "Grid sizes" : "Grid size (even, >= 32)");
        if (!multi) {
            o.o_gamma->expected(1);
            o.o_n->expected(1);
        }
    };
    auto add_run_flags = [&o, &add_model_flags](CLI::App* cmd, bool multi) {
        cmd->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
        add_model_flags(cmd, multi);
        o.o_t_end = cmd->add_option("--t-end", o.t_end, "Final time");
        o.o_alpha = cmd->add_option("--alpha", o.alpha, "Holder exponent in [1 - gamma, 1) for T*");
        o.o_datum = cmd->add_option("--datum", o.datum,
                                    "Initial data: cosine:a,b | vonmises:kappa | lirodrigo:scale | custom:v0;v1;...");
        if (!multi) o.o_datum->expected(1);
        cmd->add_flag("--inviscid", o.inviscid, "Drop the dissipation term");
    };
    auto add_out_dir = [&o](CLI::App* cmd) {
        o.o_out_dir = cmd->add_option("--out-dir", o.out_dir, "Output directory (default $CCF_OUT_DIR or ./ccf_out)");
    };

    // Subcommand callbacks capture which one ran; option handles are rebound
    // per subcommand so only the selected subcommand's handles are consulted.
    struct Bound {
        CLI::App* app;
        CLI::Option *gamma, *n, *t_end, *alpha, *datum, *out_dir;
    };
    std::vector<Bound> bound;
    auto bind = [&](CLI::App* cmd) {
        bound.push_back({cmd, o.o_gamma, o.o_n, o.o_t_end, o.o_alpha, o.o_datum, o.o_out_dir});
        o.o_gamma = o.o_n = o.o_t_end = o.o_alpha = o.o_datum = o.o_out_dir = nullptr;
    };

    auto* run = app.add_subcommand("run", "Integrate one configuration and append its record");
    add_run_flags(run, false);
    add_out_dir(run);
    bind(run);

    auto* sweep = app.add_subcommand("sweep", "Run the Cartesian product of parameter lists, resuming stored cells");
    add_run_flags(sweep, true);
    add_out_dir(sweep);
    sweep->add_option("--jobs", o.jobs, "Concurrent simulations (default 1)")->check(CLI::PositiveNumber);
    bind(sweep);

    auto* verify = app.add_subcommand("verify", "Print the operator identity residual table");
    add_model_flags(verify, true);
    o.o_gamma->description("Exponents for the quadrature checks (default 0.5 0.7 0.9 1)");
    o.o_n->expected(1);
    verify->add_option("--seed", o.seed, "Seed for the random test fields");
    bind(verify);

    auto* calibrate = app.add_subcommand("calibrate", "Calibrate the singular-integral constant c_gamma");
    add_model_flags(calibrate, true);
    o.o_n->expected(1);
    bind(calibrate);

    auto* report = app.add_subcommand("report", "Write summary.csv and SVG charts from stored records");
    add_out_dir(report);
    bind(report);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitValidation;
    }

    try {
        for (const auto& b : bound) {
            if (!b.app->parsed()) continue;
            o.o_gamma = b.gamma;
            o.o_n = b.n;
            o.o_t_end = b.t_end;
            o.o_alpha = b.alpha;
            o.o_datum = b.datum;
            o.o_out_dir = b.out_dir;
            if (b.app == run) return cmd_run(o, out);
            if (b.app == sweep) return cmd_sweep(o, out);
            if (b.app == verify) return cmd_verify(o, out);
            if (b.app == calibrate) return cmd_calibrate(o, out);
            if (b.app == report) return cmd_report(o, out);
        }
        err << "error: no subcommand selected\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        err << "invalid " << e.what() << '\n';
        return kExitValidation;
    } catch (const CalibrationError& e) {
        err << "calibration failed (residual " << e.residual() << "): " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "runtime failure: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace ccf::cli
