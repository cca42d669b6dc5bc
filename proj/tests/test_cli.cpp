#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "plab/cli.hpp"
#include "plab/errors.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "polariton_lab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = plab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("plab_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string config(const std::string& name) { return (fs::path(PLAB_SOURCE_DIR) / "configs" / name).string(); }

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("parse_range") {
    CHECK(plab::cli::parse_range("0:1:lin:3") == std::vector<double>{0.0, 0.5, 1.0});
    const auto l = plab::cli::parse_range("1:100:log:3");
    CHECK(l[1] == doctest::Approx(10.0));
    CHECK(plab::cli::parse_range("1:2:lin:0").empty());
    CHECK_THROWS_AS(plab::cli::parse_range("1:2:cubic:3"), plab::ValidationError);
    CHECK_THROWS_AS(plab::cli::parse_range("0:1:log:3"), plab::ValidationError);
}

TEST_CASE("dispersion happy path writes bands and a manifest") {
    const auto dir = scratch("disp");
    const auto r = run({"--out-dir", dir.string(), "dispersion", "--config", config("eit.json"), "--kmax", "0.2",
                        "--points", "11"});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "bands.csv"));
    CHECK(fs::exists(dir / "dispersion_manifest.json"));
    const auto head = slurp(dir / "bands.csv").substr(0, 40);
    CHECK(head.rfind("k,branch_index,re_eigenvalue", 0) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "dispersion_manifest.json"));
    CHECK(m["subcommand"] == "dispersion");
    CHECK(m["outputs"].size() >= 2);
}

TEST_CASE("exit codes") {
    const auto dir = scratch("codes");
    const auto missing = run({"--out-dir", dir.string(), "dispersion", "--config", "/nonexistent/run.json"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("/nonexistent/run.json") != std::string::npos);

    CHECK(run({"dispersion", "--config", config("eit.json"), "--bogus"}).code == 64);
    CHECK(run({"frobnicate"}).code == 64);

    const auto big = run({"--out-dir", dir.string(), "manybody", "--spec", config("lattice_tg.json"), "--hilbert-cap",
                          "10"});
    CHECK(big.code == 3);
    CHECK(big.err.find("220") != std::string::npos);
}

TEST_CASE("empty sweep gives a header-only CSV") {
    const auto dir = scratch("sweep");
    const auto r = run({"--out-dir", dir.string(), "sweep", "--command", "dispersion", "--config", config("eit.json"),
                        "--param", "params.omega_R", "--range", "0.5:4:lin:0", "--out", "s.csv"});
    CHECK(r.code == 0);
    const auto body = slurp(dir / "s.csv");
    CHECK(std::count(body.begin(), body.end(), '\n') == 1);
    CHECK(body.rfind("params.omega_R,v_group,m_eff", 0) == 0);

    const auto bad = run({"--out-dir", dir.string(), "sweep", "--command", "dispersion", "--config",
                          config("eit.json"), "--param", "units", "--range", "0:1:lin:2"});
    CHECK(bad.code == 2);
}

TEST_CASE("replay reproduces outputs bit for bit") {
    const auto dir = scratch("replay");
    REQUIRE(run({"--out-dir", dir.string(), "--threads", "2", "manybody", "--spec", config("lattice_tg.json")}).code ==
            0);
    REQUIRE(run({"--out-dir", dir.string(), "bethe", "--gamma-grid", "0.1:100:log:5"}).code == 0);
    for (const char* m : {"manybody_manifest.json", "bethe_manifest.json"}) {
        const auto r = run({"replay", "--manifest", (dir / m).string(), "--check"});
        CHECK(r.code == 0);
        CHECK(r.out.find("identical") != std::string::npos);
    }
}
