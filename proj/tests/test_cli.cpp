#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* p = std::getenv("LOCNOT_CLI");
    return p ? p : "";
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("locnot_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

} // namespace

TEST_CASE("CLI end-to-end", "[cli]") {
    REQUIRE_FALSE(cli_path().empty());
    TempDir tmp;
    const std::string out = tmp.path.string();

    SECTION("fidelity-curve emits both model curves") {
        REQUIRE(run_cli("fidelity-curve --points 11 --seed 9 --out " + out) == 0);
        const std::string csv = slurp(tmp.path / "fidelity_curve.csv");
        CHECK(csv.starts_with("# seed=9\nv,f_model,f_werner\n"));
        CHECK(csv.find("\n1,1,1\n") != std::string::npos);        // V = 1 row
        CHECK(csv.find("\n0,0.25,0.25\n") != std::string::npos);  // V = 0 row
        CHECK(csv.find("\n0.9,0.863636363636,0.925\n") != std::string::npos);
    }

    SECTION("tomography pipeline emits counts, reconstruction, and report") {
        REQUIRE(run_cli("tomography --bell phi+ --eta 0.9 --shots 2000 --seed 5 --out " + out) == 0);
        CHECK(fs::exists(tmp.path / "tomography_phi_plus_counts.csv"));
        CHECK(fs::exists(tmp.path / "tomography_phi_plus_rho.json"));
        const json report = json::parse(slurp(tmp.path / "tomography_phi_plus_report.json"));
        CHECK(report.at("eta").get<double>() == Catch::Approx(0.9));
        CHECK(report.at("fidelity_model").get<double>() == Catch::Approx(0.8636363636).margin(1e-9));
        CHECK(report.at("mle_converged").get<bool>());
        CHECK(report.at("bell_threshold").get<double>() == Catch::Approx(0.7803300859).margin(1e-9));
    }

    SECTION("identical config and seed reproduce outputs bit-for-bit") {
        const fs::path out_a = tmp.path / "a", out_b = tmp.path / "b";
        REQUIRE(run_cli("tomography --bell psi- --eta 0.8 --shots 1000 --seed 21 --out " + out_a.string()) == 0);
        REQUIRE(run_cli("tomography --bell psi- --eta 0.8 --shots 1000 --seed 21 --out " + out_b.string()) == 0);
        CHECK(slurp(out_a / "tomography_psi_minus_counts.csv") ==
              slurp(out_b / "tomography_psi_minus_counts.csv"));
        CHECK(slurp(out_a / "tomography_psi_minus_rho.json") ==
              slurp(out_b / "tomography_psi_minus_rho.json"));
    }

    SECTION("truth tables and process bounds") {
        REQUIRE(run_cli("truth-table --basis all --eta 1 --out " + out) == 0);
        const json report = json::parse(slurp(tmp.path / "truth_table_report.json"));
        CHECK(report.at("fidelity_zz").get<double>() == Catch::Approx(1.0).margin(1e-12));
        CHECK(report.at("fidelity_xx").get<double>() == Catch::Approx(1.0).margin(1e-12));
        CHECK(report.at("fidelity_yy").get<double>() == Catch::Approx(1.0).margin(1e-12));
        CHECK(report.at("process_lower").get<double>() == Catch::Approx(1.0).margin(1e-12));
        CHECK(fs::exists(tmp.path / "truth_table_zz.csv"));
        CHECK(fs::exists(tmp.path / "truth_table_yy.csv"));
    }

    SECTION("chsh on the ideal Bell state") {
        REQUIRE(run_cli("chsh --eta 1 --out " + out) == 0);
        const json report = json::parse(slurp(tmp.path / "chsh_report.json"));
        CHECK(report.at("s_max").get<double>() == Catch::Approx(2.828427).margin(1e-4));
        CHECK(report.at("violates_chsh").get<bool>());
    }

    SECTION("window sweep over a config-provided tau list") {
        const fs::path cfg = tmp.path / "sweep.cfg";
        std::ofstream(cfg) << "window.sweep_tau_s = 1e-9,2e-9\n"
                           << "window.offset_s = -0.3e-9\n";
        REQUIRE(run_cli("window-sweep --config " + cfg.string() + " --out " + out) == 0);
        const std::string csv = slurp(tmp.path / "window_sweep.csv");
        CHECK(csv.find("tau_int_s,acceptance,") != std::string::npos);
        // two data rows after the comment and header lines
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
        // the four Bell-state fidelity columns are identical in every row
        std::istringstream rows(csv);
        std::string line;
        std::getline(rows, line);
        std::getline(rows, line);
        while (std::getline(rows, line)) {
            std::vector<std::string> cells;
            std::istringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            REQUIRE(cells.size() == 16);
            CHECK(cells[5] == cells[6]);
            CHECK(cells[5] == cells[7]);
            CHECK(cells[5] == cells[8]);
        }
    }

    SECTION("hom scan") {
        const fs::path cfg = tmp.path / "hom.cfg";
        std::ofstream(cfg) << "hom.delays_s = -1e-9,0,1e-9\nwindow.tau_int_s = 3.5e-9\n";
        REQUIRE(run_cli("hom --config " + cfg.string() + " --out " + out) == 0);
        const std::string csv = slurp(tmp.path / "hom_scan.csv");
        CHECK(csv.starts_with("# seed="));
        CHECK(csv.find("delay_s,coincidence_prob,eta") != std::string::npos);
    }

    SECTION("oracle cross-check passes on a clean build") {
        REQUIRE(run_cli("tomography --bell phi+ --eta 0.7 --shots 500 --seed 2 --oracle --out " + out) == 0);
        REQUIRE(run_cli("fidelity-curve --points 5 --oracle --out " + out) == 0);
    }

    SECTION("validation failures exit with code 2") {
        CHECK(run_cli("tomography --eta 1.5 --out " + out) == 2);
        CHECK(run_cli("window-sweep --eta 0.5 --out " + out) == 2);
        CHECK(run_cli("truth-table --basis qq --out " + out) == 2);
        CHECK(run_cli("tomography --config /nonexistent.cfg --out " + out) == 2);
    }
}
