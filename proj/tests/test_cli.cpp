#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kBinary = KEYLOG_SIM_BINARY;

struct RunResult {
    int exit_code;
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "keylog_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// run the binary, discarding stdout/stderr into files alongside the output
RunResult run(const std::string& args, const std::string& tag) {
    const fs::path out = scratch_dir() / (tag + ".stdout");
    const fs::path err = scratch_dir() / (tag + ".stderr");
    const std::string cmd = kBinary + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("superdense example writes the documented JSON schema") {
    const fs::path out = scratch_dir() / "sd.json";
    const auto r = run("superdense --bits 10 --output " + out.string(), "sd");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(slurp(out));
    CHECK(doc["protocol"] == "superdense");
    CHECK(doc["result"]["decoded"] == "10");
    CHECK(doc["result"]["zz_outcome"] == "11");
    CHECK(doc["version"].is_string());
    CHECK(doc["config"]["bits"] == "10");
    // the stdout summary is a single line
    const std::string summary = slurp(scratch_dir() / "sd.stdout");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 1);
}

TEST_CASE("qpe-standard example peaks at ell = 5") {
    const fs::path out = scratch_dir() / "qpe.json";
    const auto r = run("qpe-standard --n 3 --theta 1.9634954 --output " +
                           out.string(),
                       "qpe");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(slurp(out));
    REQUIRE(doc["result"]["distribution"].size() == 8);
    CHECK(double(doc["result"]["distribution"][5]) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(int(doc["result"]["ell"]) == 5);
}

TEST_CASE("CSV export matches the pinned byte format") {
    const fs::path out = scratch_dir() / "dist.csv";
    // exact backend, n = 1, Z letter against a real beta: p = (0, 1)
    const auto r = run(
        "qpe-oneshot --n 1 --letter Z --beta 1.2533141373155003,0 "
        "--backend exact --format csv --output " +
            out.string(),
        "csv");
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(out) ==
          "k,probability\n0,0.000000000000\n1,1.000000000000\n");
}

TEST_CASE("identical configs produce byte-identical output files") {
    const fs::path out1 = scratch_dir() / "det1.json";
    const fs::path out2 = scratch_dir() / "det2.json";
    const std::string args =
        "attack --letter X --n 1 --backend fock --delta 0.25 --cutoff 150 "
        "--seed 7 --output ";
    REQUIRE(run(args + out1.string(), "det1").exit_code == 0);
    REQUIRE(run(args + out2.string(), "det2").exit_code == 0);
    const std::string doc1 = slurp(out1);
    CHECK(doc1 == slurp(out2));
    CHECK(!doc1.empty());
    const json doc = json::parse(doc1);
    CHECK(doc["result"]["inferred_letter"] == "X");
    CHECK(double(doc["result"]["codeword_fidelity"]) >= 0.999999);
}

TEST_CASE("config file provides defaults, flags override") {
    const fs::path cfg = scratch_dir() / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "# sample configuration\n"
          << "n = 3\n"
          << "theta = 1.9634954\n"
          << "format = json\n";
    }
    const fs::path out = scratch_dir() / "cfg.json";
    const auto r = run("qpe-standard --config " + cfg.string() +
                           " --output " + out.string(),
                       "cfg");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(slurp(out));
    CHECK(int(doc["config"]["n"]) == 3);
    CHECK(int(doc["result"]["ell"]) == 5);

    // a flag on the command line beats the file
    const fs::path out2 = scratch_dir() / "cfg2.json";
    const auto r2 = run("qpe-standard --config " + cfg.string() +
                            " --n 1 --output " + out2.string(),
                        "cfg2");
    REQUIRE(r2.exit_code == 0);
    const json doc2 = json::parse(slurp(out2));
    CHECK(int(doc2["config"]["n"]) == 1);
}

TEST_CASE("config errors exit 1 with a machine-parseable error line") {
    const auto r = run("superdense --bits 7", "bad_bits");
    CHECK(r.exit_code == 1);
    const json err = json::parse(slurp(scratch_dir() / "bad_bits.stderr"));
    CHECK(int(err["code"]) == 1);
    CHECK(err["message"].is_string());
    CHECK(err["context"].is_string());

    CHECK(run("attack --n 1", "no_letter").exit_code == 1);
    CHECK(run("qpe-oneshot --letter Z --beta nonsense", "bad_beta")
              .exit_code == 1);
    CHECK(run("attack --letter Z --backend carrier-pigeon", "bad_backend")
              .exit_code == 1);
    CHECK(run("frobnicate", "bad_subcommand").exit_code == 1);
}

TEST_CASE("numerical failures exit 2 and leave no partial output") {
    const fs::path out = scratch_dir() / "never.json";
    // cutoff far too small for the delta = 0.25 GKP lattice
    const auto r = run(
        "attack --letter Z --n 1 --backend fock --delta 0.25 --cutoff 40 "
        "--output " +
            out.string(),
        "trunc");
    CHECK(r.exit_code == 2);
    CHECK(!fs::exists(out));
    const json err = json::parse(slurp(scratch_dir() / "trunc.stderr"));
    CHECK(int(err["code"]) == 2);
}

TEST_CASE("sweep emits one row per cell with failures recorded inline") {
    const fs::path out = scratch_dir() / "sweep.csv";
    const auto r = run(
        "sweep --letters Z --deltas 0.35 --cutoffs 100,40 --nvalues 1 "
        "--backend fock --workers 2 --format csv --output " +
            out.string(),
        "sweep");
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(out);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 cells
    CHECK(csv.find("Z,0.35,100,1,Z,") != std::string::npos);
    CHECK(csv.find("Z,0.35,40,1,,,,") != std::string::npos);  // failed cell
}
