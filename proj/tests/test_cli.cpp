#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evla/cli.hpp"

using namespace evla;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        out.push_back(cells);
    }
    return out;
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = "evla_test_" + name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("unknown preset lists the presets") {
    const Run r = run({"--preset", "nope", "fluence"});
    CHECK(r.code == kExitConfig);
    for (const char* n : {"810-15w", "980-15w", "980-10w", "1064-10w"}) CHECK(r.err.find(n) != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == kExitConfig);
    CHECK(run({"frobnicate"}).code == kExitConfig);
    CHECK(run({"--help"}).code == kExitOk);
    CHECK(run({"--preset", "810-15w", "--config", "x.toml", "fluence"}).code == kExitConfig);
    CHECK(run({"--times", "11", "fluence"}).code == kExitConfig);
    CHECK(run({"--times", "abc", "fluence"}).code == kExitConfig);
    CHECK(run({"--case", "3", "temperature"}).code == kExitConfig);
    CHECK(run({"damage", "--table3", "--map"}).code == kExitConfig);
}

TEST_CASE("fluence output is a deterministic CSV") {
    const Run a = run({"--times", "0,5", "fluence"});
    const Run b = run({"--times", "0,5", "fluence"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto t = rows(a.out);
    CHECK(t[0] == std::vector<std::string>{"r_mm", "z_mm", "t_s", "region", "phi_W_per_mm2"});
    CHECK(t.size() == 1 + 2 * (201 + 175));
    for (size_t k = 1; k < t.size(); ++k) CHECK(t[k].size() == 5);
}

TEST_CASE("fluence scales with laser power") {
    const auto hi = rows(run({"--preset", "980-15w", "--times", "2", "fluence"}).out);
    const auto lo = rows(run({"--preset", "980-10w", "--times", "2", "fluence"}).out);
    REQUIRE(hi.size() == lo.size());
    int compared = 0;
    for (size_t k = 1; k < hi.size(); ++k) {
        const double a = std::stod(hi[k][4]), b = std::stod(lo[k][4]);
        if (b == 0) continue;
        CHECK(a / b == doctest::Approx(1.5).epsilon(1e-7));
        ++compared;
    }
    CHECK(compared > 100);
}

TEST_CASE("grid option gives the full lattice") {
    const Run r = run({"--grid", "5,7", "--times", "1", "fluence"});
    REQUIRE(r.code == 0);
    CHECK(rows(r.out).size() == 1 + 5 * 7);
    CHECK(run({"--grid", "1,7", "fluence"}).code == kExitConfig);
}

TEST_CASE("fluence coefficients") {
    const Run r = run({"fluence", "--coefficients"});
    REQUIRE(r.code == 0);
    const auto t = rows(r.out);
    CHECK(t[0] == std::vector<std::string>{"family", "region", "name", "value"});
    CHECK(t.size() > 10);
}

TEST_CASE("temperature output and mode table") {
    const Run r = run({"--times", "1", "temperature"});
    REQUIRE(r.code == 0);
    CHECK(rows(r.out)[0][4] == "T_C");
    const Run m = run({"temperature", "--modes"});
    REQUIRE(m.code == 0);
    const auto t = rows(m.out);
    CHECK(t[0].size() == 11);
    CHECK(t.size() == 21);
}

TEST_CASE("flow case warns but succeeds") {
    const Run r = run({"--case", "2", "--times", "1", "temperature"});
    CHECK(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("critical time table") {
    const Run r = run({"damage"});
    REQUIRE(r.code == 0);
    const auto t = rows(r.out);
    CHECK(t[0] == std::vector<std::string>{"T_min_C", "region", "computed_s", "published_s", "rel_err"});
    REQUIRE(t.size() == 25);
    for (size_t k = 1; k < t.size(); ++k) CHECK(std::stod(t[k][4]) <= 0.05);
}

TEST_CASE("damage map") {
    const Run r = run({"--grid", "4,3", "damage", "--map"});
    REQUIRE(r.code == 0);
    const auto t = rows(r.out);
    CHECK(t[0] == std::vector<std::string>{"r_mm", "z_mm", "omega", "t_crit_s"});
    CHECK(t.size() == 1 + 12);
    const Run m = run({"--grid", "4,3", "damage", "--tmin", "60"});
    REQUIRE(m.code == 0);
    CHECK(rows(m.out)[0].size() == 6);
    CHECK(run({"damage", "--map", "--field", "bogus"}).code == kExitConfig);
}

TEST_CASE("registry listing") {
    const Run r = run({"registry"});
    REQUIRE(r.code == 0);
    const auto t = rows(r.out);
    CHECK(t[0] == std::vector<std::string>{"region", "wavelength", "key", "value", "unit", "provenance"});
    for (size_t k = 1; k < t.size(); ++k) CHECK(t[k].size() >= 5);
}

TEST_CASE("validate subset") {
    const Run r = run({"validate", "--only", "table3,A9"});
    CHECK(r.code == 0);
    CHECK(r.out.find("A1") != std::string::npos);
    CHECK(r.out.find("A9") != std::string::npos);
    CHECK(run({"validate", "--only", "A42"}).code == kExitConfig);
    CHECK(run({"validate", "--grid-refine", "7"}).code == kExitConfig);
}

TEST_CASE("config files") {
    const std::string good = write_temp("good.toml", "[protocol]\nwavelength = 1064\nP_laser = 10\n");
    CHECK(run({"--config", good, "--times", "0", "fluence"}).code == 0);
    const std::string bad = write_temp("bad.toml", "[protocol]\nP_laser = -1\n");
    const Run r = run({"--config", bad, "fluence"});
    CHECK(r.code == kExitConfig);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"--config", "does_not_exist.toml", "fluence"}).code == kExitConfig);
    std::remove(good.c_str());
    std::remove(bad.c_str());
}

TEST_CASE("output file") {
    const std::string path = "evla_test_out.csv";
    REQUIRE(run({"--out", path, "registry"}).code == 0);
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("region,", 0) == 0);
    std::remove(path.c_str());
}

TEST_CASE("executable exit codes") {
    const std::string exe = EVLA_CLI_PATH;
    CHECK(std::system((exe + " registry > /dev/null").c_str()) == 0);
    const int rc = std::system((exe + " --preset nope fluence 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == kExitConfig);
}
