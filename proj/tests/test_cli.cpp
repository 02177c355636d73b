#include "cli.hpp"

#include "ccf/experiments.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using ccf::cli::run_cli;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("ccf_cli_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty();
    return n;
}

/// Sets an environment variable for the lifetime of the guard.
struct EnvGuard {
    std::string name;
    EnvGuard(const std::string& n, const std::string& value) : name(n) { ::setenv(n.c_str(), value.c_str(), 1); }
    ~EnvGuard() { ::unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("run writes one record") {
    TempDir dir("run");
    const auto r = cli({"run", "--gamma", "0.9", "--n", "256", "--t-end", "1", "--datum", "cosine:1,1", "--out-dir",
                        dir.path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("Completed") != std::string::npos);
    const auto store = dir.path / "records.jsonl";
    CHECK(line_count(store) == 1);
    const auto rec = ccf::experiments::load_records(store).at(0);
    CHECK(rec.config.params.gamma == 0.9);
    CHECK(rec.config.params.n == 256);
    CHECK(rec.config.control.t_end == 1.0);
    // Effective values are echoed.
    CHECK(r.out.find("\"gamma\":0.9") != std::string::npos);
}

TEST_CASE("validation failures exit 1 and name the parameter") {
    TempDir dir("invalid");
    const auto out = dir.path.string();
    auto r = cli({"run", "--gamma", "1.5", "--alpha", "0.9", "--out-dir", out});
    CHECK(r.code == 1);
    CHECK(r.err.find("gamma") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.path / "records.jsonl"));

    r = cli({"run", "--n", "31", "--out-dir", out});
    CHECK(r.code == 1);
    CHECK(r.err.find("n:") != std::string::npos);

    r = cli({"run", "--datum", "cosine:1,3", "--out-dir", out});
    CHECK(r.code == 1);
    CHECK(r.err.find("datum") != std::string::npos);

    r = cli({"run", "--gamma", "0.8", "--alpha", "0.05", "--out-dir", out});
    CHECK(r.code == 1);
    CHECK(r.err.find("alpha") != std::string::npos);
}

TEST_CASE("unknown flags and missing subcommands are errors") {
    CHECK(cli({"run", "--bogus"}).code == 1);
    CHECK(cli({"run", "--gamma"}).code == 1);
    CHECK(cli({"run", "--gamma", "abc"}).code == 1);
    CHECK(cli({}).code == 1);
    CHECK(cli({"launch"}).code == 1);
    CHECK(cli({"verify", "--inviscid"}).code == 1);
}

TEST_CASE("help lists every flag") {
    const auto top = cli({"--help"});
    CHECK(top.code == 0);
    for (const char* sub : {"run", "sweep", "verify", "calibrate", "report"}) CHECK(top.out.find(sub) != std::string::npos);
    const auto all = cli({"--help-all"});
    CHECK(all.code == 0);
    for (const char* flag : {"--config", "--gamma", "--n", "--t-end", "--alpha", "--datum", "--inviscid", "--out-dir",
                             "--seed", "--jobs"})
        CHECK(all.out.find(flag) != std::string::npos);
    const auto run = cli({"run", "--help"});
    CHECK(run.code == 0);
    CHECK(run.out.find("--t-end") != std::string::npos);
}

TEST_CASE("CCF_OUT_DIR is the fallback output directory") {
    TempDir dir("env");
    EnvGuard env("CCF_OUT_DIR", dir.path.string());
    CHECK(cli({"run", "--n", "64", "--t-end", "0.1"}).code == 0);
    CHECK(line_count(dir.path / "records.jsonl") == 1);
    TempDir other("env_flag");
    CHECK(cli({"run", "--n", "64", "--t-end", "0.1", "--out-dir", other.path.string()}).code == 0);
    CHECK(line_count(other.path / "records.jsonl") == 1);
    CHECK(line_count(dir.path / "records.jsonl") == 1);
}

TEST_CASE("config files with flag overrides") {
    TempDir dir("config");
    const auto cfg = dir.path / "run.json";
    std::ofstream(cfg) << R"({"gamma": 0.7, "n": 64, "t_end": 0.2, "datum": "vonmises:2", "constants": {"k1": 2.0}})";
    const auto r = cli({"run", "--config", cfg.string(), "--n", "128", "--out-dir", dir.path.string()});
    REQUIRE(r.code == 0);
    const auto rec = ccf::experiments::load_records(dir.path / "records.jsonl").at(0);
    CHECK(rec.config.params.gamma == 0.7);
    CHECK(rec.config.params.n == 128);
    CHECK(rec.config.control.t_end == 0.2);
    CHECK(rec.config.constants.k1 == 2.0);
    CHECK(rec.config.datum.label() == "vonmises:2");

    std::ofstream(dir.path / "typo.json") << R"({"gama": 0.7})";
    auto bad = cli({"run", "--config", (dir.path / "typo.json").string(), "--out-dir", dir.path.string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("gama") != std::string::npos);
    std::ofstream(dir.path / "broken.json") << "{";
    CHECK(cli({"run", "--config", (dir.path / "broken.json").string()}).code == 1);
    std::ofstream(dir.path / "types.json") << R"({"n": "many"})";
    CHECK(cli({"run", "--config", (dir.path / "types.json").string()}).code == 1);
    CHECK(cli({"run", "--config", (dir.path / "missing.json").string()}).code == 1);
}

TEST_CASE("sweep with jobs, resume, and report") {
    TempDir dir("sweep");
    const auto cfg = dir.path / "sweep.json";
    std::ofstream(cfg) << R"({"gamma_values": [0.6, 0.9], "data": ["cosine:1,1"], "resolutions": [64], "t_end": 0.2})";
    const auto out = dir.path.string();
    auto r = cli({"sweep", "--config", cfg.string(), "--jobs", "2", "--out-dir", out});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("2 simulated") != std::string::npos);
    r = cli({"sweep", "--config", cfg.string(), "--out-dir", out});
    CHECK(r.out.find("0 simulated") != std::string::npos);
    r = cli({"sweep", "--gamma", "0.6", "0.7", "--n", "64", "--t-end", "0.2", "--datum", "cosine:1,1", "--out-dir",
             out});
    CHECK(r.code == 0);
    CHECK(r.out.find("1 simulated") != std::string::npos);
    CHECK(cli({"sweep", "--jobs", "0", "--out-dir", out}).code == 1);
    CHECK(cli({"sweep", "--gamma", "1.5", "--alpha", "0.5", "--out-dir", out}).code == 1);

    r = cli({"report", "--out-dir", out});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir.path / "summary.csv"));
    CHECK(fs::exists(dir.path / "charts"));
    CHECK(line_count(dir.path / "summary.csv") == 4);
}

TEST_CASE("report without records is a runtime failure") {
    TempDir dir("empty");
    const auto r = cli({"report", "--out-dir", dir.path.string()});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("verify prints the residual table") {
    const auto r = cli({"verify", "--seed", "3"});
    CHECK(r.code == 0);
    for (const char* row : {"H(H f) = -f", "Lambda^1 = H d/dx", "Cordoba identity", "c_gamma calibration"})
        CHECK(r.out.find(row) != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(cli({"verify", "--gamma", "2.5"}).code == 1);
}

TEST_CASE("calibrate") {
    const auto r = cli({"calibrate", "--gamma", "0.5", "0.9", "--n", "128"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.size() == 2);
    CHECK(j[0]["c_gamma"].get<double>() > 0.0);
    CHECK(j[1]["residual_mode1"].get<double>() < 1e-3);
    CHECK(cli({"calibrate", "--gamma", "2.0"}).code == 1);
}
