#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zl/cli.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace zl;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& yaml) {
    try {
        parse_config(yaml);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("zl_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

const char* small_lap = R"(schema_version: 1
seed: 7
grid: {domain: half_line, n: 300, rmax: 150}
sweep: {emin: 1.0e-3, emax: 1, points: 7, args: 3}
scenarios:
  - name: lap
    params: {s_control: 0.6}
)";

} // namespace

TEST_CASE("config errors name line and key") {
    auto e = error_of("schema_version: 1\ngrid:\n  n: [1, 2\n");
    CHECK(e.find("line") != std::string::npos);

    e = error_of("schema_version: 1\ngrid:\n  n: 100\n  bogus: 3\n");
    CHECK(e.find("grid.bogus") != std::string::npos);
    CHECK(e.find("line 4") != std::string::npos);

    e = error_of("schema_version: 1\ngrid:\n  n: many\n");
    CHECK(e.find("grid.n") != std::string::npos);
    CHECK(e.find("line 3") != std::string::npos);

    CHECK(error_of("grid: {n: 100}\n").find("schema_version") != std::string::npos);
    CHECK(error_of("schema_version: 2\n").find("unsupported") != std::string::npos);

    e = error_of("schema_version: 1\nscenarios:\n  - lap\n  - nonsense\n");
    CHECK(e.find("scenarios[1]") != std::string::npos);
    CHECK(e.find("valid: lap") != std::string::npos);

    e = error_of("schema_version: 1\nscenarios:\n  - name: lap\n    params: {speed: 3}\n");
    CHECK(e.find("params.speed") != std::string::npos);

    e = error_of("schema_version: 1\nscenarios:\n  - microlocal\n");
    CHECK(e.find("full_line") != std::string::npos);

    CHECK(error_of("schema_version: 1\npotential: {mu: 2.5}\n").find("potential") != std::string::npos);
    CHECK(error_of("schema_version: 1\nsweep: {emin: 2}\n").find("sweep.emin") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/zl.yaml"), ConfigError);
}

TEST_CASE("defaults are filled in") {
    auto c = parse_config("schema_version: 1\nscenarios:\n  - lap\n  - name: wkb\n    params: {x1: 100}\n");
    REQUIRE(c.scenarios.size() == 2);
    CHECK(c.scenarios[0].params.at("s") == 1.3);
    CHECK(c.scenarios[1].params.at("x1") == 100.0);
    CHECK(c.scenarios[1].params.at("tol") == 0.05);
    CHECK(c.seed == 1);
}

TEST_CASE("empty scenario list") {
    auto c = parse_config("schema_version: 1\nscenarios: []\n");
    auto dir = scratch("empty");
    auto sum = run(c, dir.string(), 1);
    CHECK(sum.results.empty());
    CHECK(sum.all_pass());
    auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(j["checks"].empty());
    CHECK(j["pass"] == true);
    fs::remove_all(dir);
}

TEST_CASE("lap scenario table and summary") {
    auto c = parse_config(small_lap);
    auto r = run_scenario(c, c.scenarios[0], 1, 3);
    CHECK(r.error.empty());
    int lap = 0, control = 0;
    for (const auto& row : r.table.rows) {
        if (row[0] == "lap") ++lap;
        if (row[0] == "control") ++control;
    }
    CHECK(lap == 7 * 3);
    CHECK(control == 7 * 3);
    CHECK(r.table.docs.size() == r.table.columns.size());
    bool has_stat = false;
    for (const auto& ch : r.checks) has_stat = has_stat || ch.id == "statistic";
    CHECK(has_stat);
}

TEST_CASE("same seed gives byte identical output for any worker count") {
    auto c = parse_config(small_lap);
    auto d1 = scratch("w1"), d2 = scratch("w2"), d3 = scratch("w2b");
    run(c, d1.string(), 1);
    run(c, d2.string(), 2);
    run(c, d3.string(), 2);
    const auto a = slurp(d1 / "lap.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(d2 / "lap.csv"));
    CHECK(a == slurp(d3 / "lap.csv"));
    CHECK(slurp(d1 / "summary.json") == slurp(d2 / "summary.json"));
    for (auto& d : {d1, d2, d3}) fs::remove_all(d);
}

TEST_CASE("failed checks and scenario errors reach the summary") {
    auto c = parse_config(small_lap);
    c.scenarios[0].params["stat_max"] = 1e-9;
    auto dir = scratch("fail");
    auto sum = run(c, dir.string(), 1);
    CHECK_FALSE(sum.all_pass());
    auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(j["pass"] == false);
    bool found = false;
    for (const auto& ch : j["checks"])
        if (ch["check"] == "statistic") found = ch["pass"] == false && ch["threshold"] == 1e-9;
    CHECK(found);

    // a scenario that throws is reported, not fatal
    auto e = parse_config("schema_version: 1\nscenarios:\n  - name: wkb\n    params: {x0: -1}\n");
    auto s2 = run(e, dir.string(), 1);
    REQUIRE(s2.results.size() == 1);
    CHECK_FALSE(s2.results[0].error.empty());
    CHECK_FALSE(s2.all_pass());
    fs::remove_all(dir);
}

TEST_CASE("report formatting") {
    Table t;
    t.add_column("a", "first");
    t.add_column("b", "second");
    t.add_row({"1", "x,\"y\""});
    CHECK(t.csv() == "a,b\n1,\"x,\"\"y\"\"\"\n");
    CHECK_THROWS(t.add_row({"1"}));
    CHECK(fmt_num(0.1) == "0.1");
    CHECK(fmt_num(1e-4) == "1e-04");
    CHECK(make_check("s", "c", "r", 1.0, "<", 2.0).pass);
    CHECK_FALSE(make_check("s", "c", "r", 2.0, "<", 2.0).pass);
    CHECK(make_check("s", "c", "r", 2.0, "<=", 2.0).pass);
    CHECK_THROWS(make_check("s", "c", "r", 2.0, "~", 2.0));
}

TEST_CASE("describe") {
    for (const auto& n : scenario_names()) CHECK(!describe(n).empty());
    CHECK(describe("classical").find("0.9") != std::string::npos);
    CHECK(describe("decay").find("-2.3") != std::string::npos);
    try {
        describe("bogus");
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        const std::string m = e.what();
        CHECK(m.find("bogus") != std::string::npos);
        CHECK(m.find("classical") != std::string::npos);
    }
}

#ifdef ZLAB_PATH
TEST_CASE("zlab exit status") {
    auto dir = scratch("exe");
    fs::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };
    const std::string exe = ZLAB_PATH;
    auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    const auto ok = write("ok.yaml", "schema_version: 1\nscenarios: []\n");
    const auto bad = write("bad.yaml", "schema_version: 1\nscenarios: [nonsense]\n");
    std::string fail_cfg = small_lap;
    fail_cfg.replace(fail_cfg.find("s_control: 0.6"), 14, "stat_max: 1.0e-9");
    const auto failing = write("fail.yaml", fail_cfg);
    CHECK(status(exe + " run --config " + ok + " --out " + (dir / "o1").string()) == 0);
    CHECK(status(exe + " run --config " + failing + " --out " + (dir / "o2").string()) == 1);
    CHECK(status(exe + " run --config " + bad + " --out " + (dir / "o3").string()) == 2);
    CHECK(status(exe + " describe classical") == 0);
    CHECK(status(exe + " describe bogus") == 2);
    fs::remove_all(dir);
}
#endif
