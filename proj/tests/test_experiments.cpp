#include "ccf/error.hpp"
#include "ccf/experiments.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace ccf;
using namespace ccf::experiments;
namespace fs = std::filesystem;
using testgen::kPi;

namespace {

/// Fresh directory under the build tree, removed on scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("ccf_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string validation_parameter(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.parameter();
    }
    return "none";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config(double gamma = 0.9, std::size_t n = 64, double t_end = 0.2) {
    RunConfig c;
    c.params.gamma = gamma;
    c.params.n = n;
    c.control.t_end = t_end;
    c.control.snapshot_every = 0.05;
    return c;
}

/// Record with wall_time cleared, as comparable JSON text.
std::string canonical(RunRecord r) {
    r.wall_time = 0.0;
    return record_to_json(r).dump();
}

}  // namespace

TEST_CASE("datum parsing and labels") {
    const auto c = InitialDatum::parse("cosine:1,1");
    REQUIRE(std::holds_alternative<CosinePositive>(c.kind));
    CHECK(std::get<CosinePositive>(c.kind).a == 1.0);
    CHECK(c.label() == "cosine:1,1");
    CHECK(InitialDatum::parse("vonmises:5").label() == "vonmises:5");
    CHECK(InitialDatum::parse("lirodrigo:2.5").label() == "lirodrigo:2.5");
    const auto custom = InitialDatum::parse("custom:1;2;3");
    CHECK(std::get<CustomSamples>(custom.kind).samples == std::vector<double>{1, 2, 3});
    for (const char* bad : {"cosine:1", "cosine:a,b", "vonmises:", "spline:1", "lirodrigo:1,2", "cosine:1,2x"})
        CHECK(validation_parameter([&] { InitialDatum::parse(bad); }) == "datum");
}

TEST_CASE("datum sampling enforces the sign invariants") {
    const TorusGrid g(64);
    const auto c = make_datum(InitialDatum::parse("cosine:1,1"), g);
    CHECK(c.min() == doctest::Approx(0.0));
    CHECK(c.max() == doctest::Approx(2.0));
    CHECK(testgen::max_abs_diff(c, [](double x) { return 1 + std::cos(x); }) < 1e-15);

    const auto v = make_datum(InitialDatum::parse("vonmises:5"), g);
    CHECK(v[0] == 1.0);
    CHECK(v.max() == 1.0);
    CHECK(v.min() > 0.0);
    for (std::size_t j = 1; j < 64; ++j) CHECK(std::abs(v[j] - v[64 - j]) <= 1e-12);

    const auto l = make_datum(InitialDatum::parse("lirodrigo:1"), g);
    CHECK(l[0] == 0.0);
    CHECK(l.max() <= 0.0);
    CHECK(l.min() == doctest::Approx(-1.0));
    CHECK(testgen::max_abs_diff(l, [](double x) { return -(1 - std::cos(x)) / 2; }) < 1e-15);

    for (const char* bad : {"cosine:1,2", "cosine:1,0", "vonmises:-1", "lirodrigo:0"})
        CHECK(validation_parameter([&] { make_datum(InitialDatum::parse(bad), g); }) == "datum");
    CHECK(validation_parameter([&] { make_datum(InitialDatum::parse("custom:1;2"), g); }) == "datum");
}

TEST_CASE("config JSON round-trip and hash") {
    RunConfig c = small_config();
    c.datum = InitialDatum::parse("vonmises:3");
    c.alpha = 0.3;
    c.holder_alphas = {0.25, 0.75};
    c.constants.k2 = 2.0;
    const auto j = config_to_json(c);
    const auto back = config_from_json(nlohmann::json::parse(j.dump()));
    CHECK(config_to_json(back).dump() == j.dump());
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    // Every parameter participates in the hash.
    std::vector<std::function<void(RunConfig&)>> edits = {
        [](RunConfig& r) { r.params.gamma = std::nextafter(r.params.gamma, 1.0); },
        [](RunConfig& r) { r.params.n = 128; },
        [](RunConfig& r) { r.params.dissipation_on = false; },
        [](RunConfig& r) { r.params.dealias_on = false; },
        [](RunConfig& r) { r.control.cfl = 0.25; },
        [](RunConfig& r) { r.control.dt_max = 0.02; },
        [](RunConfig& r) { r.control.t_end = 0.3; },
        [](RunConfig& r) { r.control.snapshot_every = 0.1; },
        [](RunConfig& r) { r.constants.C1 = 3.0; },
        [](RunConfig& r) { r.constants.C_star = 3.0; },
        [](RunConfig& r) { r.datum = InitialDatum::parse("vonmises:3.0000001"); },
        [](RunConfig& r) { r.alpha.reset(); },
        [](RunConfig& r) { r.holder_alphas.push_back(1.0); },
    };
    for (const auto& edit : edits) {
        RunConfig d = c;
        edit(d);
        CHECK(config_hash(d) != config_hash(c));
    }
    // Datum may be given as its spec string.
    CHECK(config_from_json({{"datum", "cosine:2,1"}}).datum.label() == "cosine:2,1");
}

TEST_CASE("execute fills predictions and validates") {
    const auto r = execute(small_config());
    CHECK(r.outcome == solver::Outcome::Completed);
    CHECK(r.samples.size() == 5);
    REQUIRE(r.t_star_predicted.has_value());
    CHECK(*r.t_star_predicted == doctest::Approx(regularity::t_star(0.9, 0.2, 2.0)));
    REQUIRE(r.t_local_predicted.has_value());
    CHECK(r.wall_time >= 0.0);
    CHECK(r.config_hash == config_hash(r.config));

    auto bad = small_config(1.5);
    bad.alpha = 0.9;
    CHECK(validation_parameter([&] { execute(bad); }) == "gamma");
    auto bad_alpha = small_config(0.8);
    bad_alpha.alpha = 0.1;
    CHECK(validation_parameter([&] { execute(bad_alpha); }) == "alpha");
    CHECK(validation_parameter([&] { execute(small_config(0.9, 30)); }) == "n");

    // gamma >= 1 without an explicit alpha simply has no T*.
    const auto critical = execute(small_config(1.0));
    CHECK_FALSE(critical.t_star_predicted.has_value());
    CHECK(critical.t_local_predicted.has_value());
}

TEST_CASE("record JSON round-trip and schema version") {
    const auto r = execute(small_config());
    const auto j = record_to_json(r);
    CHECK(j.at("schema_version") == kSchemaVersion);
    const auto back = record_from_json(nlohmann::json::parse(j.dump()));
    CHECK(record_to_json(back).dump() == j.dump());

    auto wrong = nlohmann::json::parse(j.dump());
    wrong["schema_version"] = kSchemaVersion + 1;
    CHECK_THROWS_AS(record_from_json(wrong), SchemaError);
    wrong.erase("schema_version");
    CHECK_THROWS_AS(record_from_json(wrong), SchemaError);
    auto broken = nlohmann::json::parse(j.dump());
    broken.erase("samples");
    CHECK_THROWS_AS(record_from_json(broken), SchemaError);
}

TEST_CASE("JSONL store") {
    TempDir dir("store");
    const auto path = dir.path / "sub" / "records.jsonl";
    CHECK(load_records(path).empty());
    const auto a = execute(small_config(0.7)), b = execute(small_config(0.9));
    append_record(path, a);
    append_record(path, b);
    const auto loaded = load_records(path);
    REQUIRE(loaded.size() == 2);
    CHECK(canonical(loaded[0]) == canonical(a));
    CHECK(canonical(loaded[1]) == canonical(b));
    std::ofstream(path, std::ios::app) << "{not json\n";
    CHECK_THROWS_AS(load_records(path), SchemaError);
}

TEST_CASE("sweep runs every cell once and resumes") {
    TempDir dir("sweep");
    SweepPlan plan;
    plan.gamma_values = {0.6, 0.9};
    plan.data = {InitialDatum::parse("cosine:1,1")};
    plan.resolutions = {256};
    plan.control.t_end = 1.0;
    const auto store = dir.path / "records.jsonl";
    const auto first = sweep(plan, store);
    CHECK(first.simulated == 2);
    CHECK(first.skipped == 0);
    REQUIRE(first.records.size() == 2);
    for (const auto& r : first.records) CHECK(r.outcome == solver::Outcome::Completed);
    CHECK(first.records[0].config.params.gamma == 0.6);

    const auto again = sweep(plan, store);
    CHECK(again.simulated == 0);
    CHECK(again.skipped == 2);
    CHECK(load_records(store).size() == 2);

    plan.gamma_values.push_back(0.95);
    const auto grown = sweep(plan, store);
    CHECK(grown.simulated == 1);
    CHECK(load_records(store).size() == 3);
}

TEST_CASE("sweep output does not depend on parallelism") {
    TempDir dir("determinism");
    SweepPlan plan;
    plan.gamma_values = {0.6, 0.7, 0.8, 0.9};
    plan.data = {InitialDatum::parse("cosine:1,1"), InitialDatum::parse("vonmises:2")};
    plan.resolutions = {64};
    plan.control.t_end = 0.2;
    std::vector<std::vector<std::string>> outputs;
    for (unsigned jobs : {1u, 3u, 8u}) {
        plan.parallelism = jobs;
        const auto store = dir.path / ("jobs" + std::to_string(jobs) + ".jsonl");
        sweep(plan, store);
        std::vector<std::string> lines;
        for (const auto& r : load_records(store)) lines.push_back(canonical(r));
        outputs.push_back(lines);
    }
    CHECK(outputs[0].size() == 8);
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0] == outputs[2]);
}

TEST_CASE("failed cells are recorded without aborting") {
    TempDir dir("failures");
    SweepPlan plan;
    plan.gamma_values = {0.9};
    plan.data = {InitialDatum::parse("custom:1;2;3"), InitialDatum::parse("cosine:1,1")};
    plan.resolutions = {64};
    plan.control.t_end = 0.1;
    const auto s = sweep(plan, dir.path / "r.jsonl");
    REQUIRE(s.records.size() == 2);
    CHECK(s.records[0].outcome == solver::Outcome::Failed);
    CHECK(s.records[0].detail.find("datum") != std::string::npos);
    CHECK(s.records[1].outcome == solver::Outcome::Completed);

    plan.gamma_values.clear();
    CHECK(validation_parameter([&] { sweep(plan, dir.path / "r.jsonl"); }) == "gamma_values");
}

TEST_CASE("inviscid sweep cell trips the detector") {
    TempDir dir("inviscid");
    SweepPlan plan;
    plan.gamma_values = {0.9};
    plan.data = {InitialDatum::parse("vonmises:5")};
    plan.resolutions = {256};
    plan.dissipation_on = false;
    plan.control.t_end = 10.0;
    const auto s = sweep(plan, dir.path / "r.jsonl");
    const auto o = s.records.at(0).outcome;
    CHECK((o == solver::Outcome::BlowupSuspected || o == solver::Outcome::UnderResolved));
}

TEST_CASE("summary rows") {
    auto cfg = small_config(0.9, 128, 0.5);
    const auto r = execute(cfg);
    const auto row = summarize(r);
    CHECK(row.config_hash == r.config_hash);
    CHECK(row.gamma == 0.9);
    CHECK(row.n == 128);
    CHECK(row.datum == "cosine:1,1");
    CHECK(row.outcome == "Completed");
    REQUIRE(row.alpha.has_value());
    CHECK(*row.alpha == doctest::Approx(0.2));
    REQUIRE(row.max_holder_after_tstar.has_value());
    double best = 0.0;
    for (const auto& s : r.samples)
        if (s.t > *r.t_star_predicted)
            for (auto [a, v] : s.holder)
                if (a == *row.alpha) best = std::max(best, v);
    CHECK(*row.max_holder_after_tstar == best);
    CHECK(row.fitted_C.has_value());
    CHECK(row.t_star == r.t_star_predicted);

    auto inviscid = small_config(0.9, 256, 10.0);
    inviscid.params.dissipation_on = false;
    inviscid.datum = InitialDatum::parse("vonmises:5");
    const auto irow = summarize(execute(inviscid));
    CHECK_FALSE(irow.fitted_C.has_value());
    CHECK(irow.outcome != "Completed");

    const auto crit = summarize(execute(small_config(1.2)));
    CHECK_FALSE(crit.alpha.has_value());
    CHECK_FALSE(crit.max_holder_after_tstar.has_value());
}

TEST_CASE("CSV round-trip") {
    testgen::FieldGen gen(17);
    std::vector<SummaryRow> rows;
    for (int i = 0; i < 30; ++i) {
        SummaryRow r;
        r.config_hash = "h" + std::to_string(i);
        r.gamma = gen.uniform(0, 2);
        r.n = 32u << (i % 4);
        r.datum = i % 3 ? "cosine:" + std::to_string(i) + ",1" : "custom[\"q\"]";
        r.outcome = solver::to_string(static_cast<solver::Outcome>(i % 5));
        auto maybe = [&](int k) -> std::optional<double> {
            if ((i + k) % 4 == 0) return std::nullopt;
            return gen.uniform(-1e3, 1e3) * std::pow(10.0, (i % 7) - 3);
        };
        r.alpha = maybe(0);
        r.max_holder_after_tstar = maybe(1);
        r.fitted_C = maybe(2);
        r.t_star = maybe(3);
        r.t_local = i == 5 ? std::optional<double>(INFINITY) : maybe(1);
        rows.push_back(r);
    }
    const auto text = emit_csv(rows);
    CHECK(text.substr(0, text.find('\n')) == kSummaryHeader);
    CHECK(parse_csv(text) == rows);
    CHECK_THROWS_AS(parse_csv("wrong,header\n"), SchemaError);
    CHECK_THROWS_AS(parse_csv(std::string(kSummaryHeader) + "\na,b\n"), SchemaError);
    CHECK_THROWS_AS(parse_csv(std::string(kSummaryHeader) + "\na,x,1,d,o,,,,,\n"), SchemaError);
}

TEST_CASE("report bundle and SVG charts") {
    TempDir dir("report");
    const std::vector<RunRecord> records = {execute(small_config(0.7)), execute(small_config(0.9))};
    const auto bundle = report(records, dir.path / "out");
    const auto csv = slurp(bundle.csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(parse_csv(csv).size() == 2);
    REQUIRE(bundle.charts.size() == 2);
    for (const auto& chart : bundle.charts) {
        const auto svg = slurp(chart);
        CHECK(svg.find("href") == std::string::npos);
        boost::property_tree::ptree tree;
        std::istringstream in(svg);
        REQUIRE_NOTHROW(boost::property_tree::read_xml(in, tree));
        const auto& root = tree.get_child("svg");
        std::vector<std::string> ids;
        for (const auto& [tag, node] : root)
            if (tag == "polyline") {
                ids.push_back(node.get<std::string>("<xmlattr>.id"));
                const auto pts = node.get<std::string>("<xmlattr>.points");
                CHECK(std::count(pts.begin(), pts.end(), ',') == 5);
            }
        CHECK(ids == std::vector<std::string>(kChartSeries.begin(), kChartSeries.end()));
    }
    CHECK(report(records, dir.path / "nocharts", false).charts.empty());
}
