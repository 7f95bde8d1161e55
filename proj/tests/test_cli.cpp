#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "tidecore/basis.hpp"
#include "tidecore/cli.hpp"
#include "tidecore/config.hpp"
#include "tidecore/io.hpp"

using namespace tidal;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("tidal_cli_test_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* kSmallConfig = R"({
  "domain": {"modes_x1": 2, "modes_x2": 2, "grid_x1": 7, "grid_x2": 7},
  "sim": {"dt": 0.01, "horizon": 0.1, "seed": 7}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
    CHECK(run_command({"frobnicate"}) == 2);
    CHECK(run_command({}) == 2);
    CHECK(run_command({"simulate", "--no-such-flag"}) == 2);
}

TEST_CASE("config errors exit with 2 and name the key") {
    TempDir tmp;
    write_text(tmp.path("bad.json"), R"({"domain": {"grid_x1": 3}})");
    CHECK(run_command({"-c", tmp.path("bad.json"), "-o", tmp.path("out"), "simulate"}) == 2);
    write_text(tmp.path("mangled.json"), "{nope");
    CHECK(run_command({"-c", tmp.path("mangled.json"), "-o", tmp.path("out"), "simulate"}) == 2);
    CHECK(run_command({"-c", tmp.path("missing.json"), "-o", tmp.path("out"), "simulate"}) == 2);
}

TEST_CASE("verify runs twice to identical reports") {
    TempDir tmp;
    write_text(tmp.path("cfg.json"), kSmallConfig);
    CHECK(run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("a"), "verify", "--samples",
                       "50", "--seed", "7"}) == 0);
    CHECK(run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("b"), "verify", "--samples",
                       "50", "--seed", "7"}) == 0);
    const std::string ra = read_text(tmp.path("a") + "/verify_report.json");
    const std::string rb = read_text(tmp.path("b") + "/verify_report.json");
    CHECK(ra == rb);
    CHECK(!ra.empty());
}

TEST_CASE("simulate matches the closed-form decay and re-runs from its manifest") {
    TempDir tmp;
    // linear preset: gamma = 0, g = 0, beta = 0, noise off
    write_text(tmp.path("cfg.json"), R"({
      "domain": {"modes_x1": 2, "modes_x2": 2, "grid_x1": 7, "grid_x2": 7},
      "model": {"alpha": 1.0, "beta": 0.0, "gravity": 0.0, "friction": 0.0},
      "wiener": {"q0": 0.0, "sigma_add": 0.0},
      "jumps": {"intensity": 0.0, "amp_add": 0.0},
      "initial": {"velocity_modes": [[1, 1, 1.0, 0.0]]},
      "sim": {"dt": 0.001, "horizon": 0.2, "seed": 3}
    })");
    CHECK(run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("run"), "simulate"}) == 0);

    const TdfField u = read_tdf(tmp.path("run") + "/u_final.tdf");
    CHECK(u.components == 2);
    DomainSpec spec;
    spec.modes_x1 = spec.modes_x2 = 2;
    spec.grid_x1 = spec.grid_x2 = 7;
    SpectralBasis basis(spec);
    const double lam = basis.lambda(1, 1);
    const double amp = std::pow(1.0 + 0.001 * lam, -200.0);
    ScalarModal c = basis.zero_scalar();
    c.at(1, 1) = amp;
    const ScalarField expected = basis.synthesize(c);
    const VectorField got = tdf_to_vector(u);
    for (std::size_t i = 0; i < expected.v.size(); ++i) {
        CHECK(std::abs(got.c1.v[i] - expected.v[i]) < 1e-8);
        CHECK(std::abs(got.c2.v[i]) < 1e-14);
    }

    // bitwise reproduction from the manifest
    CHECK(run_command({"--from-manifest", tmp.path("run") + "/manifest.json", "-o",
                       tmp.path("rerun"), "simulate"}) == 0);
    CHECK(read_text(tmp.path("run") + "/energies.csv") ==
          read_text(tmp.path("rerun") + "/energies.csv"));
    CHECK(read_text(tmp.path("run") + "/u_final.tdf") ==
          read_text(tmp.path("rerun") + "/u_final.tdf"));
}

TEST_CASE("modulus subcommand emits a curve") {
    TempDir tmp;
    write_text(tmp.path("cfg.json"), kSmallConfig);
    CHECK(run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("out"), "modulus", "--deltas",
                       "0.04,0.02"}) == 0);
    const CsvTable curve = read_csv(tmp.path("out") + "/modulus_curve.csv");
    REQUIRE(curve.rows.size() == 2);
    CHECK(curve.rows[0][0] == 0.04);
    CHECK(curve.rows[1][1] <= curve.rows[0][1] + 1e-12);
}

TEST_CASE("energy subcommand writes a report that references the manifest") {
    TempDir tmp;
    write_text(tmp.path("cfg.json"), kSmallConfig);
    CHECK(run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("out"), "energy", "--paths",
                       "8"}) == 0);
    const nlohmann::json rep = read_json(tmp.path("out") + "/energy_report.json");
    CHECK(rep.at("manifest") == "manifest.json");
    CHECK(rep.at("sup_estimate").at("satisfied").get<bool>());
    const nlohmann::json manifest = read_json(tmp.path("out") + "/manifest.json");
    CHECK(manifest.at("path_seeds").size() == 8);
    bool lists_report = false;
    for (const auto& a : manifest.at("artifacts"))
        if (a.get<std::string>() == "energy_report.json") lists_report = true;
    CHECK(lists_report);
}

TEST_CASE("optimize subcommand writes a nonincreasing trace") {
    TempDir tmp;
    write_text(tmp.path("cfg.json"), R"({
      "domain": {"modes_x1": 2, "modes_x2": 2, "grid_x1": 7, "grid_x2": 7},
      "model": {"alpha": 1.0, "beta": 0.0, "gravity": 0.0, "friction": 0.0},
      "wiener": {"q0": 0.0, "sigma_add": 0.0},
      "jumps": {"intensity": 0.0, "amp_add": 0.0},
      "control": {"modes": 1, "w_track": 0.0, "w_reg": 0.5, "ensemble": 1},
      "sim": {"dt": 0.01, "horizon": 0.1, "seed": 5}
    })");
    CHECK(run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("out"), "optimize", "--budget",
                       "60", "--method", "fd_gradient"}) == 0);
    const CsvTable trace = read_csv(tmp.path("out") + "/optimization_trace.csv");
    REQUIRE(!trace.rows.empty());
    for (std::size_t i = 1; i < trace.rows.size(); ++i)
        CHECK(trace.rows[i][1] <= trace.rows[i - 1][1]);
}

TEST_CASE("regularity subcommand writes a monotone table") {
    TempDir tmp;
    write_text(tmp.path("cfg.json"), R"({
      "domain": {"modes_x1": 2, "modes_x2": 2, "grid_x1": 7, "grid_x2": 7},
      "wiener": {"q0": 0.05, "sigma_add": 1.0},
      "jumps": {"intensity": 1.0, "amp_add": 0.05},
      "initial": {"velocity_modes": [[1, 1, 0.2, 0.0]]},
      "sim": {"dt": 0.005, "horizon": 0.2, "seed": 13}
    })");
    const int code = run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("out"),
                                  "regularity", "--paths", "16", "--thresholds", "2,4",
                                  "--horizons", "0.2,0.1,0.05"});
    CHECK(code == 0);
    const nlohmann::json rep = read_json(tmp.path("out") + "/regularity_report.json");
    CHECK(rep.at("monotone_in_horizon").get<bool>());
    const CsvTable table = read_csv(tmp.path("out") + "/regularity_table.csv");
    CHECK(table.rows.size() == 6);
}

TEST_CASE("tightness subcommand reports the Aldous fit") {
    TempDir tmp;
    write_text(tmp.path("cfg.json"), R"({
      "domain": {"modes_x1": 2, "modes_x2": 2, "grid_x1": 7, "grid_x2": 7},
      "wiener": {"q0": 0.1, "sigma_add": 1.0},
      "jumps": {"intensity": 1.0, "amp_add": 0.05},
      "sim": {"dt": 0.004, "horizon": 0.4, "seed": 19}
    })");
    const int code = run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("out"), "tightness",
                                  "--paths", "6", "--deltas", "0.1,0.05", "--thetas",
                                  "0.008,0.016,0.032"});
    CHECK(code == 0);
    const nlohmann::json rep = read_json(tmp.path("out") + "/tightness_report.json");
    CHECK(rep.at("aldous").at("alpha").get<double>() == 2.0);
    CHECK(rep.at("aldous").at("beta_hat").get<double>() > 0.0);
    CHECK(rep.at("modulus_curve").size() == 2);
}

TEST_CASE("divergent runs exit with 3") {
    TempDir tmp;
    write_text(tmp.path("cfg.json"), R"({
      "domain": {"modes_x1": 2, "modes_x2": 2, "grid_x1": 7, "grid_x2": 7},
      "model": {"alpha": 1.0, "beta": 0.0, "gravity": 0.0, "friction": 0.0,
                "forcing": {"preset": "oscillating", "omega": 0.0,
                             "modes": [[1, 1, 1e16, 0.0]]}},
      "wiener": {"q0": 0.0, "sigma_add": 0.0},
      "jumps": {"intensity": 0.0, "amp_add": 0.0},
      "sim": {"dt": 1.0, "horizon": 3.0, "seed": 5}
    })");
    CHECK(run_command({"-c", tmp.path("cfg.json"), "-o", tmp.path("out"), "simulate"}) == 3);
}

}  // TEST_SUITE
