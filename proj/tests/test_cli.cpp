#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli_path() {
    const char* p = std::getenv("SPINORBIT_CLI");
    REQUIRE(p != nullptr);
    return p;
}

std::string src_dir() {
    const char* p = std::getenv("SPINORBIT_SRC");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run(const std::string& args) {
    const std::string out_path = "/tmp/spinorbit_cli_out.txt";
    const std::string err_path = "/tmp/spinorbit_cli_err.txt";
    const std::string cmd = cli_path() + " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

}  // namespace

TEST_CASE("equilibrium: table1 prints the observed obliquity") {
    const RunResult r = run("--params table1 equilibrium");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("eps_star_arcmin 2.059") != std::string::npos);
    CHECK(r.out.find("obliquity_implicit_arcmin 2.059") != std::string::npos);
    // global flags may also follow the subcommand
    const RunResult r2 = run("equilibrium --params table1");
    CHECK(r2.exit_code == 0);
    CHECK(r2.out == r.out);
}

TEST_CASE("params file loading matches the built-in set") {
    const RunResult a = run("--params table1 hamiltonian");
    const RunResult b = run("--params " + src_dir() + "/fixtures/table1.params hamiltonian");
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("missing params file: exit 2 with machine-readable error JSON") {
    const RunResult r = run("--params /nonexistent.params equilibrium");
    CHECK(r.exit_code == 2);
    const nlohmann::json j = nlohmann::json::parse(r.err);
    CHECK(j.at("kind") == "config");
    CHECK(j.at("message").get<std::string>().find("params") != std::string::npos);
}

TEST_CASE("usage error: unknown subcommand exits 2") {
    const RunResult r = run("frobnicate");
    CHECK(r.exit_code == 2);
}

TEST_CASE("stability: Fig-2 style files, resumable and byte-identical") {
    REQUIRE(std::system("rm -rf /tmp/spinorbit_cli_stab && mkdir -p /tmp/spinorbit_cli_stab") == 0);
    const std::string pre = "/tmp/spinorbit_cli_stab/fig2";
    const RunResult r =
        run("stability --r 4,6 --rho0 0:2:0.5 --out " + pre);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("log10T(rho0=1)") != std::string::npos);
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        REQUIRE(in.good());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string dat4 = slurp(pre + "_r4.dat");
    const std::string dat6 = slurp(pre + "_r6.dat");
    const std::string rep = slurp(pre + "_report.json");
    CHECK(dat4.find("# rho0  log10_T_years") == 0);
    // five grid values -> five data rows
    CHECK(std::count(dat4.begin(), dat4.end(), '\n') == 6);
    // deterministic rerun: byte-identical outputs
    const RunResult r2 =
        run("stability --r 4,6 --rho0 0:2:0.5 --out " + pre);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(pre + "_r4.dat") == dat4);
    CHECK(slurp(pre + "_r6.dat") == dat6);
    CHECK(slurp(pre + "_report.json") == rep);

    // normalform --out then stability --load-nf reproduces the direct run
    const RunResult n4 = run("normalform --r 4 --out " + pre);
    const RunResult n6 = run("normalform --r 6 --out " + pre);
    CHECK(n4.exit_code == 0);
    CHECK(n6.exit_code == 0);
    const RunResult r3 =
        run("stability --r 4,6 --rho0 0:2:0.5 --load-nf " + pre + " --out " + pre + "b");
    CHECK(r3.exit_code == 0);
    CHECK(slurp(pre + "b_r4.dat") == dat4);
    CHECK(slurp(pre + "b_r6.dat") == dat6);
}

TEST_CASE("equilibrium text blocks match the stored reference fixtures") {
    const RunResult r = run("equilibrium --out /tmp/spinorbit_cli_fix");
    CHECK(r.exit_code == 0);
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        REQUIRE(in.good());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    CHECK(slurp("/tmp/spinorbit_cli_fix_equilibrium.txt") ==
          slurp(src_dir() + "/fixtures/table1_equilibrium.txt"));
    CHECK(slurp("/tmp/spinorbit_cli_fix_untangled.txt") ==
          slurp(src_dir() + "/fixtures/table1_untangled.txt"));
}

TEST_CASE("equilibrium --dump-series emits the term-per-line format") {
    const std::string path = "/tmp/spinorbit_cli_series.txt";
    const RunResult r = run("equilibrium --order 4 --dump-series " + path);
    CHECK(r.exit_code == 0);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        std::istringstream ls(line);
        int l1, l3, k1, k3;
        char parity;
        double coeff;
        CHECK((ls >> l1 >> l3 >> k1 >> k3 >> parity >> coeff));
        CHECK((parity == 'c' || parity == 's'));
    }
    CHECK(rows > 10);
}

TEST_CASE("sweep: delegates to the exporter with the canonical naming") {
    REQUIRE(std::system("rm -rf /tmp/spinorbit_cli_sweep && mkdir -p /tmp/spinorbit_cli_sweep") == 0);
    const RunResult r =
        run("sweep --x om1dot --y ecc --r 10 --threads 2 --out /tmp/spinorbit_cli_sweep");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("sweep_om1dot-ecc:") != std::string::npos);
    for (const char* suffix : {"_grid.csv", "_iso.csv", "_summary.json"}) {
        std::ifstream in(std::string("/tmp/spinorbit_cli_sweep/sweep_om1dot-ecc") + suffix);
        CHECK(in.good());
    }
}
