#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <fstream>
#include <sstream>

#include "tasep/cli.hpp"

using namespace tasep;
using namespace tasep::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tasep_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// data rows only: the payload without '#' metadata
std::string payload(const std::string& csv) {
    std::istringstream is(csv);
    std::string line, out;
    while (std::getline(is, line))
        if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config grammar") {
    std::istringstream is("# comment\n\n  alpha = 0.7   # trailing\nn=1,2 , 3\nM = inf\n");
    const auto kv = parse_key_values(is);
    CHECK(kv.at("alpha") == "0.7");
    CHECK(kv.at("n") == "1,2 , 3");
    CHECK(kv.at("M") == "inf");
    std::istringstream bad("alpha 0.7\n");
    CHECK_THROWS_AS(parse_key_values(bad), ConfigError);
}

TEST_CASE("precedence: flags over file over defaults") {
    const fs::path dir = scratch_dir("precedence");
    {
        std::ofstream f(dir / "run.cfg");
        f << "alpha = 0.3\nseed = 5\n";
    }
    const auto c = make_config("simulate", (dir / "run.cfg").string(), {{"seed", "9"}});
    CHECK(c.real("alpha") == 0.3);
    CHECK(c.u64("seed") == 9);
    CHECK(c.integer("replicas") == 10);
    CHECK_THROWS_AS(make_config("simulate", "", {{"bogus", "1"}}), ConfigError);
    CHECK_THROWS_AS(make_config("nonsense", "", {}), ConfigError);
    CHECK_THROWS_AS(make_config("simulate", (dir / "missing.cfg").string(), {}), ConfigError);
}

TEST_CASE("config values parse strictly") {
    const auto c = make_config("simulate", "", {{"alpha", "0.5x"}, {"n", "1,2"}, {"t", "1.5"}});
    CHECK_THROWS_AS(c.real("alpha"), ConfigError);
    CHECK(c.integers("n") == std::vector<long>{1, 2});
    CHECK(c.reals("t") == std::vector<double>{1.5});
}

TEST_CASE("config hash tracks results, not output location") {
    const auto a = make_config("simulate", "", {{"out", "/tmp/a"}, {"workers", "1"}});
    const auto b = make_config("simulate", "", {{"out", "/tmp/b"}, {"workers", "4"}});
    const auto c = make_config("simulate", "", {{"seed", "2"}});
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
    CHECK(a.hash().size() == 16);
}

TEST_CASE("minimal simulate run") {
    const auto c = make_config("simulate", "", {{"M", "1"}, {"alpha", "0.5"}, {"n", "1"}, {"t", "1"}, {"replicas", "10"}, {"seed", "7"}});
    const auto out = cmd_simulate(c);
    REQUIRE(out.size() == 1);
    CHECK(out[0].rows.size() == 10);
    CHECK(out[0].pass());
    CHECK_THROWS_AS(cmd_simulate(make_config("simulate", "", {{"replicas", "0"}})), ConfigError);
}

TEST_CASE("reruns are byte-identical in their data and independent of workers") {
    const fs::path d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
    std::ostringstream log;
    const std::map<std::string, std::string> base{{"n", "1,3"}, {"t", "4,2"}, {"replicas", "200"}, {"seed", "11"}};
    auto o1 = base, o2 = base;
    o1["out"] = d1.string();
    o2["out"] = d2.string();
    o2["workers"] = "3";
    CHECK(execute(make_config("simulate", "", o1), log) == 0);
    CHECK(execute(make_config("simulate", "", o2), log) == 0);
    const std::string a = slurp(d1 / "simulate.csv"), b = slurp(d2 / "simulate.csv");
    CHECK(payload(a) == payload(b));
    CHECK(a.find("# config_hash: ") != std::string::npos);
    CHECK(a.find("# seed: 11") != std::string::npos);
    CHECK(a.find("# version: ") != std::string::npos);
    CHECK(fs::exists(d1 / "simulate.json"));
}

TEST_CASE("json mirrors csv") {
    const auto c = make_config("simulate", "", {{"replicas", "3"}});
    const auto out = cmd_simulate(c);
    std::ostringstream js;
    write_json(c, out[0], js);
    CHECK(js.str().find("\"schema\": \"tasep.output/1\"") != std::string::npos);
    CHECK(js.str().find("\"config_hash\": \"" + c.hash() + "\"") != std::string::npos);
}

TEST_CASE("exact: free particle, monotonicity and shock column") {
    const auto free = cmd_exact(make_config("exact", "", {{"M", "1"}, {"alpha", "0.7"}, {"n", "1"}, {"t", "3"}, {"a_lo", "0"}, {"a_hi", "8"}}));
    REQUIRE(free.size() == 1);
    CHECK(free[0].pass());
    CHECK(std::find(free[0].columns.begin(), free[0].columns.end(), "free_particle") != free[0].columns.end());
    const auto shock = cmd_exact(make_config("exact", "", {{"M", "1"}, {"alpha", "0.3"}, {"n", "4"}, {"t", "6"}}));
    CHECK(shock[0].pass());
    CHECK(std::find(shock[0].columns.begin(), shock[0].columns.end(), "shock") != shock[0].columns.end());
}

TEST_CASE("tables: Trans with M = 0 reproduces Airy 2->1") {
    const auto out = cmd_tables(make_config("tables", "", {{"law", "Trans"}, {"M", "0"}, {"kappa", "1"}, {"s_lo", "-4"}, {"s_hi", "2"}, {"s_step", "1"}}));
    REQUIRE(out.size() == 1);
    bool has_ref = false;
    for (const auto& ch : out[0].checks) {
        CAPTURE(ch.name);
        CHECK(ch.pass);
        has_ref = has_ref || ch.name.find("A21") != std::string::npos;
    }
    CHECK(has_ref);
}

TEST_CASE("diagram has no unclassified cell") {
    const auto out = cmd_diagram(make_config("diagram", "", {{"n_alpha", "40"}, {"n_nu", "40"}}));
    CHECK(out[0].rows.size() == 1600);
    CHECK(out[0].pass());
}

TEST_CASE("compare dispatches and reports") {
    const auto out = cmd_compare(make_config("compare", "", {{"experiment", "exact_mc"}, {"alpha", "0.3"}, {"n", "2"}, {"t", "5"}, {"replicas", "20000"}}));
    REQUIRE(out.size() == 1);
    CHECK(out[0].pass());
    CHECK_THROWS_AS(cmd_compare(make_config("compare", "", {{"experiment", "nothing"}})), ConfigError);
}

TEST_CASE("exit code reflects validation") {
    const fs::path d = scratch_dir("exit");
    std::ostringstream log;
    // a tolerance no table can meet
    CHECK(execute(make_config("tables", "", {{"law", "A2"}, {"s_lo", "-2"}, {"s_hi", "0"}, {"s_step", "1"}, {"endpoint_tol", "0"}, {"out", d.string()}}), log) == 1);
    CHECK(log.str().find("FAIL") != std::string::npos);
}

}
