#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "varent/generators.hpp"
#include "varent/report_io.hpp"
#include "varent/tree_io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(VARENT_TEST_TMP) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// env is a prefix like "VARENT_OUT_DIR=/x"; empty means the variable is unset.
Run run(const std::string& args, const std::string& env = "") {
    const fs::path dir = scratch("run");
    const std::string cmd = "env -u VARENT_OUT_DIR " + env + " '" + std::string(VARENT_BIN) + "' " + args + " >'" +
                            (dir / "out").string() + "' 2>'" + (dir / "err").string() + "'";
    const int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(dir / "out");
    r.err = slurp(dir / "err");
    return r;
}

}  // namespace

TEST_CASE("entropy bowen on the full shift brackets ln 2") {
    const auto r = run("entropy bowen --gen full:2 --m 1 --depth 24 --tol 1e-3");
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["unit"] == "nats");
    CHECK(j["s_low"].get<double>() <= std::log(2.0));
    CHECK(j["s_high"].get<double>() >= std::log(2.0));
    CHECK(j["s_high"].get<double>() - j["s_low"].get<double>() <= 1e-3);
    // Round trip through the loader.
    const auto est = varent::estimate_from_json(j);
    CHECK(est.value == j["value"].get<double>());
    auto core = j;
    core.erase("source");  // generator metadata added by the CLI
    CHECK(varent::estimate_to_json(est, {}).dump() == core.dump());
}

TEST_CASE("output is a pure function of the config") {
    const std::string args = "entropy packing --gen random:7 --depth 10 --tol 1e-4";
    const auto a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("--base2 adds bit display values") {
    const auto r = run("entropy capacity --gen full:2 --depth 12 --base2");
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["unit"] == "nats");
    REQUIRE(j.contains("display"));
    CHECK(j["display"]["value"].get<double>() == doctest::Approx(j["value"].get<double>() / std::log(2.0)));
}

TEST_CASE("tree gen writes the golden-mean counts") {
    const fs::path dir = scratch("tree_gen");
    const auto r = run("tree gen --gen sft:2:forbid=11 --depth 4 --out '" + (dir / "t.json").string() + "'");
    REQUIRE(r.code == 0);
    const auto summary = json::parse(r.out);
    CHECK(summary["depth_counts"] == json::array({1, 2, 3, 5, 8}));
    const auto t = varent::load_tree(dir / "t.json");
    CHECK(t.same_nodes(varent::golden_mean_tree(4)));

    const auto text = run("tree gen --gen sft:2:forbid=11 --depth 4 --format text --out '" + (dir / "t.txt").string() + "'");
    REQUIRE(text.code == 0);
    CHECK(varent::load_tree(dir / "t.txt").same_nodes(t));

    // A saved tree feeds back into the engines; depth 1 has the largest slope.
    const auto e = run("entropy capacity --tree '" + (dir / "t.json").string() + "' --N 1");
    REQUIRE(e.code == 0);
    CHECK(json::parse(e.out)["value"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("malformed tree file reports the line") {
    const fs::path dir = scratch("bad_tree");
    std::ofstream(dir / "bad.txt") << "# cylinder tree\nalphabet 2\ndepth 2\nnodes 6\n1\n2\n13\n";
    const auto r = run("entropy bowen --tree '" + (dir / "bad.txt").string() + "'");
    CHECK(r.code == 1);
    CHECK(r.err.find("line 7") != std::string::npos);
}

TEST_CASE("domain errors exit 1") {
    CHECK(run("entropy bowen --gen full:2 --tol 0").code == 1);
    CHECK(run("entropy bowen --gen full:2 --m 0").code == 1);
    CHECK(run("entropy bowen --gen nosuch:2").code == 1);
    const auto r = run("tree gen --gen besicovitch:0.5,0.5:0.01 --depth 5");
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("output directory from the environment") {
    const fs::path dir = scratch("env_out");
    const auto r = run("entropy bowen --gen full:2 --depth 12 --csv '" + (dir / "diag.csv").string() + "'",
                       "VARENT_OUT_DIR='" + dir.string() + "'");
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(dir / "entropy_bowen.json"));
    CHECK(json::parse(slurp(dir / "entropy_bowen.json"))["entropy"] == "bowen");
    CHECK(slurp(dir / "diag.csv").rfind("label,depth,N,m,s,value\n", 0) == 0);
}

TEST_CASE("vp bowen --assert passes on the full shift") {
    const auto r = run("vp bowen --gen full:2 --depth 26 --assert");
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["gap"].get<double>() <= 0.05);
}

TEST_CASE("suite run --seed 42 --count 200 --depth 12 --assert exits 0") {
    const fs::path dir = scratch("suite");
    const auto r = run("suite run --seed 42 --count 200 --depth 12 --assert --csv '" + (dir / "s.csv").string() + "'");
    CHECK(slurp(dir / "s.csv").rfind("tree,seed,invariant,pass,margin,detail\n", 0) == 0);
    CHECK(r.code == 0);
}
