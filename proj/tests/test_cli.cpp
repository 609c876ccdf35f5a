#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

#include "cavcool/sweep.hpp"

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    const std::string out_path = "/tmp/cavcool_test_out.txt";
    const std::string err_path = "/tmp/cavcool_test_err.txt";
    const std::string cmd =
        std::string(CAVCOOL_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream of(out_path), ef(err_path);
    std::stringstream ob, eb;
    ob << of.rdbuf();
    eb << ef.rdbuf();
    r.out = ob.str();
    r.err = eb.str();
    return r;
}

}  // namespace

TEST_CASE("rates: default point reports cooling") {
    const RunResult r = run_cli("rates");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("regime = cooling") != std::string::npos);
    CHECK(r.out.find("nbar_ss") != std::string::npos);
}

TEST_CASE("rates: zero drive is an all-zero marginal report") {
    const RunResult r = run_cli("rates --set omega=0 --format json");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["regime"] == "marginal");
    CHECK(j["a_plus"] == 0.0);
    CHECK(j["a_minus"] == 0.0);
    CHECK(j["nbar_ss"].is_null());
}

TEST_CASE("rates: --opt at delta_c = -nu exits with the singularity code") {
    const RunResult r = run_cli("rates --set delta_c=-1 --opt");
    CHECK(r.exit_code == 3);
}

TEST_CASE("rates: invalid parameters exit 2") {
    CHECK(run_cli("rates --set kappa=-1").exit_code == 2);
    CHECK(run_cli("rates --set bogus=1").exit_code == 2);
}

TEST_CASE("params file round trip, SI variant and --set precedence") {
    {
        std::ofstream f("/tmp/cavcool_params.json");
        f << R"({"units":"si","mass":2.21e-25,"wavenumber":7374616.0,"trap_freq":3141592.653589793,
                "delta":0.0,"delta_c":0.0,"g":31415926.53589793,"omega":3141592.653589793,
                "gamma":31415926.53589793,"kappa":628318.5307179586,
                "phi_l":0.70710678118654752,"phi_c":0.70710678118654752,"alpha":0.4})";
    }
    const RunResult r =
        run_cli("rates --params /tmp/cavcool_params.json --set delta_c=0.5 --opt --format json");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["params"]["gamma"] == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(j["params"]["kappa"] == Catch::Approx(0.2).epsilon(1e-12));
    CHECK(j["params"]["delta_c"] == 0.5);  // --set wins over the file

    {
        std::ofstream f("/tmp/cavcool_bad.json");
        f << R"({"delta": 1.0, "typo_key": 2.0})";
    }
    CHECK(run_cli("rates --params /tmp/cavcool_bad.json").exit_code == 2);
}

TEST_CASE("sweep: CSV, sidecar and heatmap files") {
    const RunResult r = run_cli(
        "sweep --dc 0 1 0.5 --delta 20 40 5 --out /tmp/cavcool_sweep.csv "
        "--heatmap /tmp/cavcool_sweep.svg");
    CHECK(r.exit_code == 0);
    std::ifstream csv("/tmp/cavcool_sweep.csv");
    REQUIRE(csv.good());
    const auto recs = cavcool::parse_sweep_csv(csv);
    CHECK(recs.size() == 3 * 5);
    std::ifstream sidecar("/tmp/cavcool_sweep.csv.config.json");
    REQUIRE(sidecar.good());
    nlohmann::json cfg;
    sidecar >> cfg;
    CHECK(cfg["command"] == "sweep");
    CHECK(cfg["params"]["g"] == 7.0);
    std::ifstream svg("/tmp/cavcool_sweep.svg");
    std::stringstream sb;
    sb << svg.rdbuf();
    CHECK(sb.str().rfind("<svg", 0) == 0);
}

TEST_CASE("sweep: grid overflow exits 2 and writes nothing") {
    std::remove("/tmp/cavcool_overflow.csv");
    const RunResult r =
        run_cli("sweep --dc 0 1 1e-5 --delta 0 1 1e-4 --out /tmp/cavcool_overflow.csv");
    CHECK(r.exit_code == 2);
    std::ifstream f("/tmp/cavcool_overflow.csv");
    CHECK((!f.good() || f.peek() == std::ifstream::traits_type::eof()));
}

TEST_CASE("opt-curve: frozen optimal detunings") {
    const RunResult r = run_cli("opt-curve --dc 0 1 0.5");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("48.024999999999999") != std::string::npos);
    CHECK(r.out.find("23.5125") != std::string::npos);
}

TEST_CASE("cool: trajectory CSV shape") {
    const RunResult r = run_cli("cool --t-final 10 --samples 5");
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("time,mean_n,p0,leakage\n", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7);
}

TEST_CASE("check: trace oracle passes at the reference point") {
    const RunResult r = run_cli("check --mode trace");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.is_array());
    CHECK(j[0]["pass"] == true);
}

TEST_CASE("check: strong drive fails a strict trace tolerance with exit 4") {
    const RunResult r = run_cli("check --mode trace --set omega=3.5 --tolerance 1e-3");
    CHECK(r.exit_code == 4);
}

TEST_CASE("check: lindblad mode with eta = 0 is degenerate input") {
    const RunResult r = run_cli("check --mode lindblad --set eta=0");
    CHECK(r.exit_code == 2);
}

TEST_CASE("check: lindblad oracle at a small non-stiff point") {
    const RunResult r = run_cli(
        "check --mode lindblad --set g=2 --set gamma=1 --set kappa=0.1 --set omega=0.15 "
        "--set eta=0.05 --set delta_c=0.5 --set delta=1.6833333333333333 "
        "--cavity-dim 2 --motion-dim 5");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j[0]["pass"] == true);
    CHECK(j[0]["method"] == "lindblad");
}
