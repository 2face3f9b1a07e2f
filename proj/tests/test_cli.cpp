#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "leakaudit/tabular.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(LEAKAUDIT_FIXTURES) / "mimic12";

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + LEAKAUDIT_CLI + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return status == 0 ? 0 : 1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const char* name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("synth, run and report end to end") {
    const auto dir = scratch("leakaudit_cli_e2e");
    const std::string d = dir.string();
    REQUIRE(cli("synth --out " + d + "/data --seed 3 --n-total 50 --n-minority 7") == 0);
    const auto ds = leakaudit::read_dataset(dir / "data" / "dataset.csv");
    CHECK(ds.rows() == 50);
    CHECK(ds.class_counts()[1] == 7);

    const std::string run = "run --data " + d + "/data/dataset.csv --setup all --folds 3 --trees 10 --seed 1";
    REQUIRE(cli(run + " --out " + d + "/a") == 0);
    REQUIRE(cli(run + " --out " + d + "/b") == 0);
    const std::string a = slurp(dir / "a" / "report.json");
    CHECK(a == slurp(dir / "b" / "report.json"));
    const auto j = nlohmann::json::parse(a);
    CHECK(j.at("setups").size() == 4);
    CHECK(j.at("config").at("folds") == 3);
    CHECK(j.at("config").at("forest").at("n_trees") == 10);

    REQUIRE(cli("run --data " + d + "/data/dataset.csv --setup ii --folds 3 --trees 10 --out " + d + "/ii") == 0);
    REQUIRE(cli("run --data " + d + "/data/dataset.csv --setup i --folds 3 --trees 10 --out " + d + "/i") == 0);
    REQUIRE(cli("report --in " + d + "/ii/report.json " + d + "/i/report.json --out " + d + "/merged") == 0);
    const std::string md = slurp(dir / "merged" / "report.md");
    CHECK(md.find("(i) ") < md.find("(ii) "));
    fs::remove_all(dir);
}

TEST_CASE("config file overrides and flags") {
    const auto dir = scratch("leakaudit_cli_config");
    const std::string d = dir.string();
    REQUIRE(cli("synth --out " + d + "/data --n-total 40 --n-minority 6") == 0);
    std::ofstream(dir / "run.cfg") << "# overrides\nfolds = 3\nforest.trees = 7\nadasyn.beta = 0.5\n";
    REQUIRE(cli("run --data " + d + "/data/dataset.csv --setup iii --config " + d + "/run.cfg --out " + d + "/r") == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "r" / "report.json"));
    CHECK(j.at("config").at("folds") == 3);
    CHECK(j.at("config").at("forest").at("n_trees") == 7);
    CHECK(j.at("config").at("adasyn").at("beta") == 0.5);
    CHECK(j.at("setups").at(0).at("synthetic_generated") == 14);  // round(0.5 * (34 - 6))
    fs::remove_all(dir);
}

TEST_CASE("etl on the fixture") {
    const auto dir = scratch("leakaudit_cli_etl");
    const std::string d = dir.string();
    REQUIRE(cli("etl --data-dir " + kFixture.string() + " --config " + (kFixture / "config.txt").string() +
                " --out " + d) == 0);
    const auto ds = leakaudit::read_dataset(dir / "cohort.csv");
    CHECK(ds.rows() == 5);
    CHECK(ds.class_counts()[1] == 3);
    fs::remove_all(dir);
}

TEST_CASE("errors exit nonzero") {
    const auto dir = scratch("leakaudit_cli_errors");
    const std::string d = dir.string();
    CHECK(cli("") != 0);
    CHECK(cli("run --data " + d + "/missing.csv --out " + d + "/x") != 0);
    CHECK(cli("etl --data-dir " + d + " --out " + d + "/x") != 0);
    REQUIRE(cli("synth --out " + d + "/data --n-total 30 --n-minority 5") == 0);
    CHECK(cli("run --data " + d + "/data/dataset.csv --setup v --out " + d + "/x") != 0);
    CHECK(cli("run --data " + d + "/data/dataset.csv --folds 1 --out " + d + "/x") != 0);
    CHECK(cli("report --in " + d + "/nothing.json --out " + d + "/x") != 0);
    std::ofstream(dir / "bad.cfg") << "no_such_key = 3\n";
    CHECK(cli("run --data " + d + "/data/dataset.csv --config " + d + "/bad.cfg --out " + d + "/x") != 0);
    fs::remove_all(dir);
}
