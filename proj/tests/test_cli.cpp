#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(ESBRP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("solve writes a solution and exits zero") {
    std::string inst = esbrp::test::data_path("one_stop.json");
    CHECK(run_cli("solve --instance " + inst + " --exact -o /tmp/esbrp_cli_one.json") == 0);
    CHECK(slurp("/tmp/esbrp_cli_one.json").find("\"visits\"") != std::string::npos);
    CHECK(run_cli("check --instance " + inst + " --solution /tmp/esbrp_cli_one.json") == 0);
}

TEST_CASE("a tampered solution exits one") {
    std::string inst = esbrp::test::data_path("one_stop.json");
    REQUIRE(run_cli("solve --instance " + inst + " --exact -o /tmp/esbrp_cli_tamper.json") == 0);
    std::string doc = slurp("/tmp/esbrp_cli_tamper.json");
    auto at = doc.find("0,");
    REQUIRE(at != std::string::npos);
    std::ofstream out("/tmp/esbrp_cli_tamper.json");
    out << doc.replace(at, 2, "1,"); // route no longer starts at the depot
    out.close();
    CHECK(run_cli("check --instance " + inst + " --solution /tmp/esbrp_cli_tamper.json") == 1);
}

TEST_CASE("infeasible inputs exit one, bad inputs two") {
    std::string chain = esbrp::test::data_path("tight_bell.json");
    CHECK(run_cli("solve --instance " + chain + " --exact --charge full") == 1);
    CHECK(run_cli("solve --instance /nonexistent.json --exact") == 2);
    std::ofstream bad("/tmp/esbrp_cli_bad.json");
    bad << "{\"format_version\": 1}";
    bad.close();
    CHECK(run_cli("solve --instance /tmp/esbrp_cli_bad.json --exact") == 2);
    CHECK(run_cli("solve --instance " + chain) == 2); // neither --exact nor --lns
}

TEST_CASE("gen emits identical files for identical seeds") {
    CHECK(run_cli("gen --stops 6 --seed 9 -o /tmp/esbrp_cli_gen_a.json") == 0);
    CHECK(run_cli("gen --stops 6 --seed 9 -o /tmp/esbrp_cli_gen_b.json") == 0);
    CHECK(slurp("/tmp/esbrp_cli_gen_a.json") == slurp("/tmp/esbrp_cli_gen_b.json"));
    CHECK(run_cli("check --instance /tmp/esbrp_cli_gen_a.json") == 0);
}

TEST_CASE("emit-lp writes the model and its stats sidecar") {
    std::string inst = esbrp::test::data_path("table4_network.json");
    CHECK(run_cli("emit-lp --instance " + inst + " --fleet ho -o /tmp/esbrp_cli.lp --stats /tmp/esbrp_cli_stats.csv") == 0);
    std::string lp = slurp("/tmp/esbrp_cli.lp");
    CHECK(lp.find("Minimize") != std::string::npos);
    CHECK(lp.rfind("End\n") == lp.size() - 4);
    CHECK(slurp("/tmp/esbrp_cli_stats.csv").find("section,key,count") == 0);
}

TEST_CASE("preprocess prints rule counts as CSV") {
    std::string inst = esbrp::test::data_path("table4_network.json");
    CHECK(run_cli("preprocess --instance " + inst + " -o /tmp/esbrp_cli_pre.csv") == 0);
    CHECK(slurp("/tmp/esbrp_cli_pre.csv").rfind("type,rule,removed_count", 0) == 0);
}

TEST_CASE("sweeps write report CSVs") {
    std::string inst = esbrp::test::data_path("table4_network.json");
    CHECK(run_cli("sweep-battery --instance " + inst + " --sizes 75 --solver lns --iters 300 -o /tmp/esbrp_cli_bat.csv") == 0);
    CHECK(slurp("/tmp/esbrp_cli_bat.csv").rfind("battery_kwh,", 0) == 0);
    CHECK(run_cli("compare-charging --instance " + esbrp::test::data_path("tight_bell.json") +
                  " --sizes 75 --solver exact -o /tmp/esbrp_cli_cmp.csv") == 0);
    CHECK(slurp("/tmp/esbrp_cli_cmp.csv").find("full charging infeasible") != std::string::npos);
}
