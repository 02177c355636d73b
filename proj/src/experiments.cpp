#include "ccf/experiments.hpp"

#include "ccf/error.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace ccf::experiments {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<double> parse_numbers(const std::string& s, char sep, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size())
            throw ValidationError("datum", "cannot parse number '" + item + "' in " + what);
        out.push_back(v);
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_even(const RealField& f, const char* kind) {
    const std::size_t n = f.size();
    for (std::size_t j = 1; j < n; ++j)
        if (std::abs(f[j] - f[n - j]) > 1e-12 * std::max(1.0, f.max_abs()))
            throw ValidationError("datum", std::string(kind) + " must be even: f(x) != f(-x) at index " +
                                               std::to_string(j));
}

// 64-bit FNV-1a.
std::string digest(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

double num_from(const json& j, const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

ordered_json datum_to_json(const InitialDatum& d) {
    return std::visit(
        [](const auto& k) -> ordered_json {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, CosinePositive>) return {{"kind", "cosine"}, {"a", k.a}, {"b", k.b}};
            if constexpr (std::is_same_v<T, VonMisesBump>) return {{"kind", "vonmises"}, {"kappa", k.kappa}};
            if constexpr (std::is_same_v<T, LiRodrigoType>) return {{"kind", "lirodrigo"}, {"scale", k.scale}};
            if constexpr (std::is_same_v<T, CustomSamples>) return {{"kind", "custom"}, {"samples", k.samples}};
        },
        d.kind);
}

InitialDatum datum_from_json(const json& j) {
    if (j.is_string()) return InitialDatum::parse(j.get<std::string>());
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "cosine") return {CosinePositive{j.at("a").get<double>(), j.at("b").get<double>()}};
    if (kind == "vonmises") return {VonMisesBump{j.at("kappa").get<double>()}};
    if (kind == "lirodrigo") return {LiRodrigoType{j.at("scale").get<double>()}};
    if (kind == "custom") return {CustomSamples{j.at("samples").get<std::vector<double>>()}};
    throw ValidationError("datum", "unknown datum kind '" + kind + "'");
}

ordered_json sample_to_json(const regularity::DiagnosticsSample& s) {
    ordered_json holder = ordered_json::array();
    for (const auto& [a, v] : s.holder) holder.push_back({{"alpha", a}, {"value", v}});
    return {{"t", s.t},
            {"l2", s.l2},
            {"linf", s.linf},
            {"mean", s.mean},
            {"hdot_half", s.hdot_half},
            {"hdot_three_half", s.hdot_three_half},
            {"hdot_mid", s.hdot_mid},
            {"holder", holder},
            {"tail_fraction", s.tail_fraction},
            {"min_value", s.min_value},
            {"max_value", s.max_value},
            {"grad_linf", s.grad_linf}};
}

regularity::DiagnosticsSample sample_from_json(const json& j) {
    regularity::DiagnosticsSample s;
    s.t = num_from(j, "t");
    s.l2 = num_from(j, "l2");
    s.linf = num_from(j, "linf");
    s.mean = num_from(j, "mean");
    s.hdot_half = num_from(j, "hdot_half");
    s.hdot_three_half = num_from(j, "hdot_three_half");
    s.hdot_mid = num_from(j, "hdot_mid");
    for (const auto& h : j.at("holder")) s.holder.emplace_back(num_from(h, "alpha"), num_from(h, "value"));
    s.tail_fraction = num_from(j, "tail_fraction");
    s.min_value = num_from(j, "min_value");
    s.max_value = num_from(j, "max_value");
    s.grad_linf = num_from(j, "grad_linf");
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Initial data

InitialDatum InitialDatum::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "cosine") {
        const auto v = parse_numbers(args, ',', spec);
        if (v.size() != 2) throw ValidationError("datum", "cosine takes two parameters a,b");
        return {CosinePositive{v[0], v[1]}};
    }
    if (kind == "vonmises") {
        const auto v = parse_numbers(args, ',', spec);
        if (v.size() != 1) throw ValidationError("datum", "vonmises takes one parameter kappa");
        return {VonMisesBump{v[0]}};
    }
    if (kind == "lirodrigo") {
        const auto v = parse_numbers(args, ',', spec);
        if (v.size() != 1) throw ValidationError("datum", "lirodrigo takes one parameter scale");
        return {LiRodrigoType{v[0]}};
    }
    if (kind == "custom") return {CustomSamples{parse_numbers(args, ';', spec)}};
    throw ValidationError("datum", "unknown datum kind '" + kind + "' (cosine, vonmises, lirodrigo, custom)");
}

std::string InitialDatum::label() const {
    return std::visit(
        [](const auto& k) -> std::string {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, CosinePositive>) return "cosine:" + fmt(k.a) + "," + fmt(k.b);
            if constexpr (std::is_same_v<T, VonMisesBump>) return "vonmises:" + fmt(k.kappa);
            if constexpr (std::is_same_v<T, LiRodrigoType>) return "lirodrigo:" + fmt(k.scale);
            if constexpr (std::is_same_v<T, CustomSamples>)
                return "custom[" + std::to_string(k.samples.size()) + "]";
        },
        kind);
}

RealField make_datum(const InitialDatum& d, const TorusGrid& grid) {
    return std::visit(
        [&grid](const auto& k) -> RealField {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, CosinePositive>) {
                if (!(k.b > 0.0 && k.a >= k.b))
                    throw ValidationError("datum", "cosine_positive requires a >= b > 0 (non-negative data)");
                auto f = RealField::sample(grid, [&](double x) { return k.a + k.b * std::cos(x); });
                if (f.min() < -1e-14 * k.a) throw ValidationError("datum", "cosine_positive sampled negative");
                return f;
            } else if constexpr (std::is_same_v<T, VonMisesBump>) {
                if (!(k.kappa > 0.0) || !std::isfinite(k.kappa))
                    throw ValidationError("datum", "von_mises_bump requires kappa > 0");
                auto f = RealField::sample(grid, [&](double x) { return std::exp(k.kappa * (std::cos(x) - 1.0)); });
                if (!(f.min() > 0.0)) throw ValidationError("datum", "von_mises_bump must be positive everywhere");
                check_even(f, "von_mises_bump");
                return f;
            } else if constexpr (std::is_same_v<T, LiRodrigoType>) {
                if (!(k.scale > 0.0) || !std::isfinite(k.scale))
                    throw ValidationError("datum", "li_rodrigo_type requires scale > 0");
                auto f = RealField::sample(grid, [&](double x) {
                    const double s = std::sin(0.5 * x);
                    return -k.scale * s * s;
                });
                if (f.max() > 0.0) throw ValidationError("datum", "li_rodrigo_type must be non-positive");
                if (f[0] != 0.0) throw ValidationError("datum", "li_rodrigo_type must vanish at x = 0");
                check_even(f, "li_rodrigo_type");
                return f;
            } else {
                if (k.samples.size() != grid.size())
                    throw ValidationError("datum", "custom datum has " + std::to_string(k.samples.size()) +
                                                       " samples, grid has " + std::to_string(grid.size()));
                try {
                    return RealField(grid, k.samples);
                } catch (const NumericalError& e) {
                    throw ValidationError("datum", e.what());
                }
            }
        },
        d.kind);
}

// ---------------------------------------------------------------------------
// Configuration

double RunConfig::effective_alpha() const { return alpha ? *alpha : regularity::alpha_policy(params.gamma); }

solver::DiagnosticPlan RunConfig::plan() const {
    solver::DiagnosticPlan p =
        holder_alphas.empty() ? solver::DiagnosticPlan::for_gamma(params.gamma) : solver::DiagnosticPlan{holder_alphas};
    const double a = effective_alpha();
    if (a > 0.0 && a <= 1.0 &&
        std::find(p.holder_alphas.begin(), p.holder_alphas.end(), a) == p.holder_alphas.end()) {
        p.holder_alphas.push_back(a);
        std::sort(p.holder_alphas.begin(), p.holder_alphas.end());
    }
    return p;
}

ordered_json config_to_json(const RunConfig& c) {
    const auto& k = c.constants;
    return {{"gamma", c.params.gamma},
            {"n", c.params.n},
            {"dissipation_on", c.params.dissipation_on},
            {"dealias_on", c.params.dealias_on},
            {"nonlinear_on", c.params.nonlinear_on},
            {"cfl", c.control.cfl},
            {"dt_max", c.control.dt_max},
            {"t_end", c.control.t_end},
            {"snapshot_every", c.control.snapshot_every},
            {"constants",
             {{"k1", k.k1}, {"k2", k.k2}, {"c0", k.c0}, {"C_star", k.C_star}, {"C1", k.C1}, {"C3", k.C3}}},
            {"datum", datum_to_json(c.datum)},
            {"alpha", opt_json(c.alpha)},
            {"holder_alphas", c.holder_alphas}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.params.gamma = j.value("gamma", c.params.gamma);
    c.params.n = j.value("n", c.params.n);
    c.params.dissipation_on = j.value("dissipation_on", c.params.dissipation_on);
    c.params.dealias_on = j.value("dealias_on", c.params.dealias_on);
    c.params.nonlinear_on = j.value("nonlinear_on", c.params.nonlinear_on);
    c.control.cfl = j.value("cfl", c.control.cfl);
    c.control.dt_max = j.value("dt_max", c.control.dt_max);
    c.control.t_end = j.value("t_end", c.control.t_end);
    c.control.snapshot_every = j.value("snapshot_every", c.control.snapshot_every);
    if (j.contains("constants")) {
        const auto& k = j.at("constants");
        auto& o = c.constants;
        o.k1 = k.value("k1", o.k1);
        o.k2 = k.value("k2", o.k2);
        o.c0 = k.value("c0", o.c0);
        o.C_star = k.value("C_star", o.C_star);
        o.C1 = k.value("C1", o.C1);
        o.C3 = k.value("C3", o.C3);
    }
    if (j.contains("datum")) c.datum = datum_from_json(j.at("datum"));
    c.alpha = opt_from(j, "alpha");
    if (j.contains("holder_alphas")) c.holder_alphas = j.at("holder_alphas").get<std::vector<double>>();
    return c;
}

std::string config_hash(const RunConfig& c) { return digest(config_to_json(c).dump()); }

// ---------------------------------------------------------------------------
// Records

ordered_json record_to_json(const RunRecord& r) {
    ordered_json samples = ordered_json::array();
    for (const auto& s : r.samples) samples.push_back(sample_to_json(s));
    return {{"schema_version", kSchemaVersion},
            {"config_hash", r.config_hash},
            {"config", config_to_json(r.config)},
            {"outcome", solver::to_string(r.outcome)},
            {"detail", r.detail},
            {"step_count", r.step_count},
            {"t_star_predicted", opt_json(r.t_star_predicted)},
            {"t_local_predicted", opt_json(r.t_local_predicted)},
            {"samples", samples},
            {"wall_time", r.wall_time}};
}

RunRecord record_from_json(const json& j) {
    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer())
        throw SchemaError("record has no integer schema_version");
    const int v = j.at("schema_version").get<int>();
    if (v != kSchemaVersion)
        throw SchemaError("unsupported record schema_version " + std::to_string(v) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    try {
        RunRecord r;
        r.config = config_from_json(j.at("config"));
        r.config_hash = j.at("config_hash").get<std::string>();
        r.outcome = solver::outcome_from_string(j.at("outcome").get<std::string>());
        r.detail = j.value("detail", "");
        r.step_count = j.value("step_count", std::size_t{0});
        r.t_star_predicted = opt_from(j, "t_star_predicted");
        r.t_local_predicted = opt_from(j, "t_local_predicted");
        for (const auto& s : j.at("samples")) r.samples.push_back(sample_from_json(s));
        r.wall_time = j.value("wall_time", 0.0);
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed record: ") + e.what());
    }
}

RunRecord execute(const RunConfig& cfg) {
    cfg.params.validate();
    cfg.control.validate();
    cfg.constants.validate();
    const double gamma = cfg.params.gamma;
    if (cfg.alpha) {
        if (!(gamma < 1.0))
            throw ValidationError("gamma", "an explicit alpha needs gamma < 1 (T* is undefined for gamma >= 1), got " +
                                               std::to_string(gamma));
        if (!(*cfg.alpha >= 1.0 - gamma && *cfg.alpha < 1.0))
            throw ValidationError("alpha", "must lie in [1 - gamma, 1), got " + std::to_string(*cfg.alpha));
    }
    for (double a : cfg.holder_alphas)
        if (!(a > 0.0 && a <= 1.0)) throw ValidationError("holder_alphas", "entries must lie in (0, 1]");

    const TorusGrid grid(cfg.params.n);
    const RealField theta0 = make_datum(cfg.datum, grid);

    RunRecord r;
    r.config = cfg;
    r.config_hash = config_hash(cfg);

    const double linf0 = theta0.max_abs();
    const double alpha = cfg.effective_alpha();
    if (gamma > 0.0 && gamma < 1.0 && linf0 > 0.0 && alpha >= 1.0 - gamma && alpha < 1.0)
        r.t_star_predicted = regularity::t_star(gamma, alpha, linf0, cfg.constants);
    const auto theta0_hat = spectral::forward(theta0);
    const double l2 = regularity::sobolev_norm(theta0_hat, 0.0);
    const double h32 = regularity::sobolev_norm(theta0_hat, 1.5);
    if (l2 > 0.0 && h32 > 0.0) r.t_local_predicted = regularity::t_local(gamma, l2, h32, cfg.constants);

    const auto start = std::chrono::steady_clock::now();
    auto result = solver::run(theta0, cfg.params, cfg.control, cfg.plan());
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    r.samples = std::move(result.samples);
    r.outcome = result.outcome;
    r.detail = std::move(result.detail);
    r.step_count = result.step_count;
    return r;
}

void append_record(const std::filesystem::path& path, const RunRecord& r) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot open " + path.string() + " for appending");
    out << record_to_json(r).dump() << '\n';
}

std::vector<RunRecord> load_records(const std::filesystem::path& path) {
    std::vector<RunRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        out.push_back(record_from_json(j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepPlan::validate() const {
    if (gamma_values.empty()) throw ValidationError("gamma_values", "sweep axis is empty");
    if (data.empty()) throw ValidationError("data", "sweep axis is empty");
    if (resolutions.empty()) throw ValidationError("resolutions", "sweep axis is empty");
    if (constants.empty()) throw ValidationError("constants", "sweep axis is empty");
    if (parallelism == 0) throw ValidationError("jobs", "parallelism must be >= 1");
    control.validate();
}

std::vector<RunConfig> SweepPlan::cells() const {
    std::vector<RunConfig> out;
    for (double g : gamma_values)
        for (const auto& d : data)
            for (std::size_t n : resolutions)
                for (const auto& k : constants) {
                    RunConfig c;
                    c.params.gamma = g;
                    c.params.n = n;
                    c.params.dissipation_on = dissipation_on;
                    c.params.dealias_on = dealias_on;
                    c.control = control;
                    c.constants = k;
                    c.datum = d;
                    c.alpha = alpha;
                    out.push_back(std::move(c));
                }
    return out;
}

SweepSummary sweep(const SweepPlan& plan, const std::filesystem::path& store) {
    plan.validate();
    const auto cells = plan.cells();

    std::map<std::string, RunRecord> existing;
    for (auto& r : load_records(store)) existing.emplace(r.config_hash, std::move(r));

    SweepSummary summary;
    std::vector<std::optional<RunRecord>> slots(cells.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto it = existing.find(config_hash(cells[i]));
        if (it != existing.end()) {
            slots[i] = it->second;
            ++summary.skipped;
        } else {
            todo.push_back(i);
        }
    }
    std::vector<bool> is_new(cells.size(), false);
    for (std::size_t i : todo) is_new[i] = true;

    // Completed cells are flushed strictly in cell order so the store is
    // byte-identical regardless of scheduling.
    std::mutex sink;
    std::size_t flushed = 0;
    auto flush_ready = [&] {
        while (flushed < cells.size() && slots[flushed]) {
            if (is_new[flushed]) append_record(store, *slots[flushed]);
            ++flushed;
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= todo.size()) return;
            const std::size_t i = todo[t];
            RunRecord r;
            try {
                r = execute(cells[i]);
            } catch (const std::exception& e) {
                r = RunRecord{};
                r.config = cells[i];
                r.config_hash = config_hash(cells[i]);
                r.outcome = solver::Outcome::Failed;
                r.detail = e.what();
            }
            std::lock_guard lock(sink);
            slots[i] = std::move(r);
            flush_ready();
        }
    };

    {
        std::lock_guard lock(sink);
        flush_ready();
    }
    const unsigned threads = std::min<unsigned>(plan.parallelism, static_cast<unsigned>(std::max<std::size_t>(todo.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    summary.simulated = todo.size();
    for (auto& s : slots) summary.records.push_back(std::move(*s));
    return summary;
}

}  // namespace ccf::experiments
