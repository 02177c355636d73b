#include "ccf/error.hpp"
#include "ccf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ccf::experiments {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_row(const std::string& line, std::size_t lineno) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw SchemaError("summary line " + std::to_string(lineno) + ": unterminated quote");
    cells.push_back(std::move(cur));
    return cells;
}

double parse_double(const std::string& s, std::size_t lineno) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw SchemaError("summary line " + std::to_string(lineno) + ": bad number '" + s + "'");
    return v;
}

std::optional<double> parse_opt(const std::string& s, std::size_t lineno) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, lineno);
}

double series_value(const regularity::DiagnosticsSample& s, std::string_view name) {
    if (name == "l2") return s.l2;
    if (name == "linf") return s.linf;
    if (name == "hdot_half") return s.hdot_half;
    if (name == "hdot_three_half") return s.hdot_three_half;
    return s.hdot_mid;
}

constexpr const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

SummaryRow summarize(const RunRecord& r) {
    SummaryRow row;
    row.config_hash = r.config_hash;
    row.gamma = r.config.params.gamma;
    row.n = r.config.params.n;
    row.datum = r.config.datum.label();
    row.outcome = solver::to_string(r.outcome);
    row.t_star = r.t_star_predicted;
    row.t_local = r.t_local_predicted;

    const double gamma = row.gamma;
    const double alpha = r.config.effective_alpha();
    if (gamma < 1.0 && alpha >= 1.0 - gamma && alpha < 1.0) row.alpha = alpha;

    if (row.alpha && row.t_star) {
        std::optional<double> best;
        for (const auto& s : r.samples) {
            if (!(s.t > *row.t_star)) continue;
            for (const auto& [a, v] : s.holder)
                if (a == *row.alpha) best = best ? std::max(*best, v) : v;
        }
        row.max_holder_after_tstar = best;
    }

    if (r.outcome == solver::Outcome::Completed) {
        try {
            row.fitted_C = regularity::energy_inequality_probe(r.samples, gamma).fitted_C;
        } catch (const NumericalError&) {
            row.fitted_C = std::nullopt;
        }
    }
    return row;
}

std::string emit_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        os << quote(r.config_hash) << ',' << num(r.gamma) << ',' << r.n << ',' << quote(r.datum) << ','
           << quote(r.outcome) << ',' << opt(r.alpha) << ',' << opt(r.max_holder_after_tstar) << ','
           << opt(r.fitted_C) << ',' << opt(r.t_star) << ',' << opt(r.t_local) << '\n';
    }
    return os.str();
}

std::vector<SummaryRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kSummaryHeader) throw SchemaError("summary CSV has an unexpected header");
    std::vector<SummaryRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c = split_row(line, lineno);
        if (c.size() != 10)
            throw SchemaError("summary line " + std::to_string(lineno) + ": expected 10 fields, got " +
                              std::to_string(c.size()));
        SummaryRow r;
        r.config_hash = c[0];
        r.gamma = parse_double(c[1], lineno);
        r.n = static_cast<std::size_t>(parse_double(c[2], lineno));
        r.datum = c[3];
        r.outcome = c[4];
        r.alpha = parse_opt(c[5], lineno);
        r.max_holder_after_tstar = parse_opt(c[6], lineno);
        r.fitted_C = parse_opt(c[7], lineno);
        r.t_star = parse_opt(c[8], lineno);
        r.t_local = parse_opt(c[9], lineno);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string emit_svg(const RunRecord& r) {
    constexpr double W = 640, H = 400, L = 60, R = 150, T = 30, B = 40;
    double t0 = 0.0, t1 = 1.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    if (!r.samples.empty()) {
        t0 = r.samples.front().t;
        t1 = r.samples.back().t;
    }
    if (!(t1 > t0)) t1 = t0 + 1.0;
    for (const auto& s : r.samples)
        for (const char* name : kChartSeries) {
            const double v = series_value(s, name);
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    if (!(hi >= lo)) lo = 0.0, hi = 1.0;
    if (hi == lo) hi = lo + 1.0;

    auto px = [&](double t) { return L + (t - t0) / (t1 - t0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - lo) / (hi - lo) * (H - T - B); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
       << W << ' ' << H << "\">\n";
    os << "<title>" << r.config.datum.label() << " gamma=" << num(r.config.params.gamma)
       << " n=" << r.config.params.n << " (" << solver::to_string(r.outcome) << ")</title>\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L << "\" y=\"" << H - 10 << "\" font-size=\"11\">t = " << num(t0) << " .. " << num(t1)
       << "</text>\n";
    os << "<text x=\"5\" y=\"" << T - 10 << "\" font-size=\"11\">range " << num(lo) << " .. " << num(hi)
       << "</text>\n";

    for (std::size_t k = 0; k < kChartSeries.size(); ++k) {
        os << "<polyline id=\"" << kChartSeries[k] << "\" fill=\"none\" stroke=\"" << kColours[k]
           << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& s : r.samples) {
            const double v = series_value(s, kChartSeries[k]);
            if (!std::isfinite(v)) continue;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(s.t), py(v));
            os << buf;
            first = false;
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 18 * (k + 1) << "\" font-size=\"12\" fill=\""
           << kColours[k] << "\">" << kChartSeries[k] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

ReportBundle report(const std::vector<RunRecord>& records, const std::filesystem::path& out_dir, bool charts) {
    std::filesystem::create_directories(out_dir);
    ReportBundle bundle;
    std::vector<SummaryRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(summarize(r));

    bundle.csv = out_dir / "summary.csv";
    {
        std::ofstream out(bundle.csv, std::ios::trunc);
        if (!out) throw Error("cannot write " + bundle.csv.string());
        out << emit_csv(rows);
    }
    if (charts) {
        const auto dir = out_dir / "charts";
        std::filesystem::create_directories(dir);
        for (const auto& r : records) {
            const auto path = dir / (r.config_hash + ".svg");
            std::ofstream out(path, std::ios::trunc);
            if (!out) throw Error("cannot write " + path.string());
            out << emit_svg(r);
            bundle.charts.push_back(path);
        }
    }
    return bundle;
}

}  // namespace ccf::experiments
