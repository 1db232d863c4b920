// locnot command-line front end: scenario-driven sweeps and measurement
// pipelines, emitting CSV/JSON for downstream plotting.

#include "locnot/locnot.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised when --oracle finds the analytic gate and the Fock oracle apart.
struct OracleMismatch : locnot::Error {
    using locnot::Error::Error;
};

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> eta;
    std::optional<std::uint64_t> shots;
    std::optional<double> epsilon;
    std::optional<double> tau_int;
    bool oracle = false;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "scenario config file (flat key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "master seed (overrides config)");
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--eta", args.eta, "indistinguishability override (overrides config)");
    cmd->add_option("--shots", args.shots, "shots per measurement setting (overrides config)");
    cmd->add_option("--epsilon", args.epsilon, "depolarizing noise admixture (overrides config)");
    cmd->add_option("--tau-int", args.tau_int, "integration window duration in seconds (overrides config)");
    cmd->add_flag("--oracle", args.oracle, "cross-check the analytic gate against the Fock oracle");
}

locnot::ScenarioConfig load_scenario(const CommonArgs& args) {
    locnot::ScenarioConfig sc;
    if (!args.config_path.empty())
        sc = locnot::scenario_from_keys(locnot::KeyValueConfig::parse_file(args.config_path));
    // Flags win over file values.
    if (args.eta) {
        if (!(*args.eta >= 0.0 && *args.eta <= 1.0))
            throw locnot::ValidationError("--eta must lie in [0, 1]");
        sc.eta_override = *args.eta;
    }
    if (args.seed) sc.seed = *args.seed;
    if (args.out_dir) sc.out_dir = *args.out_dir;
    if (args.shots) sc.shots = *args.shots;
    if (args.epsilon) sc.noise.epsilon = *args.epsilon;
    if (args.tau_int) sc.window_tau_int_s = *args.tau_int;
    return sc;
}

std::ofstream open_output(const locnot::ScenarioConfig& sc, const std::string& name) {
    fs::create_directories(sc.out_dir);
    const fs::path path = fs::path(sc.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw locnot::Error("cannot open " + path.string() + " for writing");
    os.precision(12);
    std::cout << "writing " << path.string() << "\n";
    return os;
}

void write_json_file(const locnot::ScenarioConfig& sc, const std::string& name, const json& j) {
    auto os = open_output(sc, name);
    os << j.dump(2) << "\n";
}

/// Compares the analytic gate against the brute-force Fock oracle for one
/// input; any entry or success-probability difference above 1e-8 is a bug.
void oracle_crosscheck(const locnot::JonesVector& control, const locnot::JonesVector& target,
                       double eta, const locnot::GateConfig& config) {
    const auto run = locnot::run_cnot(control, target, eta, config);
    const auto rho = locnot::polarization_density_matrix(run.state);
    const auto fock = locnot::oracle::simulate_with_eta(control, target, eta, config);
    const double entry_diff = (rho.matrix() - fock.rho.matrix()).cwiseAbs().maxCoeff();
    const double succ_diff = std::abs(run.success_prob - fock.success_prob);
    if (entry_diff > 1e-8 || succ_diff > 1e-8)
        throw OracleMismatch("oracle mismatch: max entry diff " + std::to_string(entry_diff) +
                             ", success diff " + std::to_string(succ_diff));
}

struct BellPrep {
    locnot::BellState bell;
    locnot::JonesVector control;
    locnot::JonesVector target;
};

BellPrep bell_prep(const std::string& name) {
    using locnot::BellState;
    namespace pol = locnot::pol;
    if (name == "phi+") return {BellState::phi_plus, pol::D, pol::H};
    if (name == "phi-") return {BellState::phi_minus, pol::A, pol::H};
    if (name == "psi+") return {BellState::psi_plus, pol::D, pol::V};
    if (name == "psi-") return {BellState::psi_minus, pol::A, pol::V};
    throw locnot::ValidationError("unknown Bell state '" + name + "' (use phi+, phi-, psi+, psi-)");
}

// --- subcommands ---

void cmd_fidelity_curve(const locnot::ScenarioConfig& sc, std::size_t points, bool oracle) {
    if (points < 2) throw locnot::ValidationError("fidelity-curve: need at least 2 grid points");
    auto os = open_output(sc, "fidelity_curve.csv");
    os << "# seed=" << sc.seed << "\n";
    os << "v,f_model,f_werner\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double v = static_cast<double>(i) / static_cast<double>(points - 1);
        if (oracle) oracle_crosscheck(locnot::pol::D, locnot::pol::H, v, sc.gate);
        os << v << ',' << locnot::fidelity_vs_eta(v) << ',' << locnot::werner_fidelity(v) << '\n';
    }
}

void cmd_window_sweep(const locnot::ScenarioConfig& sc, bool oracle) {
    if (sc.eta_override)
        throw locnot::ValidationError("window-sweep: requires waveform inputs, not an eta override");
    const auto wf = locnot::scenario_waveforms(sc);

    struct Row {
        double tau, acc_m, acc_s, eta, s_max, f_zz, f_xx;
        std::array<double, 4> f;
        locnot::ProcessBounds bounds;
    };
    auto compute_row = [&](double tau) {
        const locnot::WindowConfig window{sc.window_offset_s, tau};
        const auto wm = locnot::apply_window(wf.memory, window);
        const auto ws = locnot::apply_window(wf.source, window);
        Row row{};
        row.tau = tau;
        row.acc_m = wm.acceptance;
        row.acc_s = ws.acceptance;
        row.eta = locnot::overlap_eta(wm.waveform, ws.waveform);
        if (oracle) oracle_crosscheck(locnot::pol::D, locnot::pol::H, row.eta, sc.gate);
        for (std::size_t b = 0; b < 4; ++b)
            row.f[b] = locnot::fidelity_pure_target(
                locnot::rho_bell(locnot::kAllBellStates[b], row.eta), locnot::kAllBellStates[b]);
        row.s_max = locnot::chsh_optimize(locnot::rho_bell(locnot::BellState::phi_plus, row.eta)).s_max;
        row.f_zz = locnot::truth_table(locnot::TruthBasis::zz, row.eta, sc.gate).fidelity;
        row.f_xx = locnot::truth_table(locnot::TruthBasis::xx, row.eta, sc.gate).fidelity;
        row.bounds = locnot::process_bounds(row.f_zz, row.f_xx);
        return row;
    };

    // rows are independent pure computations; evaluate them in parallel and
    // write from this thread only
    std::vector<std::future<Row>> futures;
    futures.reserve(sc.sweep_tau_s.size());
    for (double tau : sc.sweep_tau_s)
        futures.push_back(std::async(std::launch::async, compute_row, tau));

    auto os = open_output(sc, "window_sweep.csv");
    os << "# seed=" << sc.seed << "\n";
    os << "tau_int_s,acceptance,acceptance_memory,acceptance_source,eta,"
          "f_phi_plus,f_phi_minus,f_psi_plus,f_psi_minus,s_max,f_zz,f_xx,"
          "process_lower,process_upper,bell_threshold,chsh_threshold\n";
    for (auto& fut : futures) {
        const Row r = fut.get();
        os << r.tau << ',' << r.acc_m * r.acc_s << ',' << r.acc_m << ',' << r.acc_s << ','
           << r.eta << ',' << r.f[0] << ',' << r.f[1] << ',' << r.f[2] << ',' << r.f[3] << ','
           << r.s_max << ',' << r.f_zz << ',' << r.f_xx << ',' << r.bounds.lower << ','
           << r.bounds.upper << ',' << locnot::bell_fidelity_threshold() << ",2\n";
    }
}

void cmd_tomography(const locnot::ScenarioConfig& sc, const std::string& bell_name, bool oracle) {
    const BellPrep prep = bell_prep(bell_name);
    const auto resolved = locnot::resolve_eta(sc);
    if (oracle) oracle_crosscheck(prep.control, prep.target, resolved.eta, sc.gate);

    const auto run = locnot::run_cnot(prep.control, prep.target, resolved.eta, sc.gate);
    const auto rho_model = locnot::polarization_density_matrix(run.state);
    const auto schedule = locnot::tomography_schedule();
    const auto dataset = locnot::simulate_counts(rho_model, schedule, sc.shots, sc.seed, sc.noise);

    const std::string tag = bell_name == "phi+"   ? "phi_plus"
                            : bell_name == "phi-" ? "phi_minus"
                            : bell_name == "psi+" ? "psi_plus"
                                                  : "psi_minus";
    {
        auto os = open_output(sc, "tomography_" + tag + "_counts.csv");
        locnot::write_counts_csv(dataset, os);
    }
    const auto mle = locnot::mle_reconstruct_detailed(dataset);
    {
        auto j = locnot::density_matrix_to_json(mle.rho);
        j["seed"] = sc.seed;
        write_json_file(sc, "tomography_" + tag + "_rho.json", j);
    }

    const double f_model = locnot::fidelity_pure_target(rho_model, prep.bell);
    const double f_recon = locnot::fidelity_pure_target(mle.rho, prep.bell);
    const double threshold = locnot::bell_fidelity_threshold();
    json report{{"bell", bell_name},
                {"eta", resolved.eta},
                {"acceptance_memory", resolved.acceptance_memory},
                {"acceptance_source", resolved.acceptance_source},
                {"success_prob", run.success_prob},
                {"shots_per_setting", sc.shots},
                {"seed", sc.seed},
                {"noise_epsilon", sc.noise.epsilon},
                {"fidelity_model", f_model},
                {"fidelity_reconstructed", f_recon},
                {"bell_threshold", threshold},
                {"violates_bell_threshold", f_recon > threshold},
                {"mle_iterations", mle.iterations},
                {"mle_converged", mle.converged}};
    write_json_file(sc, "tomography_" + tag + "_report.json", report);
    std::cout << "bell=" << bell_name << " eta=" << resolved.eta << " F(model)=" << f_model
              << " F(MLE)=" << f_recon << " threshold=" << threshold
              << (f_recon > threshold ? " [violates Bell]" : " [below threshold]") << "\n";
}

void cmd_truth_table(const locnot::ScenarioConfig& sc, const std::string& basis_name, bool oracle) {
    const auto resolved = locnot::resolve_eta(sc);
    std::vector<locnot::TruthBasis> bases;
    if (basis_name == "all")
        bases = {locnot::TruthBasis::zz, locnot::TruthBasis::xx, locnot::TruthBasis::yy};
    else if (basis_name == "zz") bases = {locnot::TruthBasis::zz};
    else if (basis_name == "xx") bases = {locnot::TruthBasis::xx};
    else if (basis_name == "yy") bases = {locnot::TruthBasis::yy};
    else throw locnot::ValidationError("unknown basis '" + basis_name + "' (use zz, xx, yy, all)");

    json report{{"eta", resolved.eta}, {"seed", sc.seed}};
    std::optional<double> f_zz, f_xx;
    for (auto basis : bases) {
        const auto table = locnot::truth_table(basis, resolved.eta, sc.gate);
        if (oracle)
            for (int row = 0; row < 4; ++row) {
                const auto spec = locnot::detail::truth_spec(basis);
                oracle_crosscheck(spec.rows[static_cast<std::size_t>(row)].control,
                                  spec.rows[static_cast<std::size_t>(row)].target, resolved.eta, sc.gate);
            }
        auto os = open_output(sc, "truth_table_" + locnot::to_string(basis) + ".csv");
        os << "# seed=" << sc.seed << "\n";
        os << "input";
        for (const auto& o : table.outcome_labels) os << ",p_" << o;
        os << "\n";
        for (std::size_t r = 0; r < 4; ++r) {
            os << table.input_labels[r];
            for (double p : table.rows[r]) os << ',' << p;
            os << "\n";
        }
        report["fidelity_" + locnot::to_string(basis)] = table.fidelity;
        std::cout << "F_" << locnot::to_string(basis) << " = " << table.fidelity << "\n";
        if (basis == locnot::TruthBasis::zz) f_zz = table.fidelity;
        if (basis == locnot::TruthBasis::xx) f_xx = table.fidelity;
    }
    if (f_zz && f_xx) {
        const auto bounds = locnot::process_bounds(*f_zz, *f_xx);
        report["process_lower"] = bounds.lower;
        report["process_upper"] = bounds.upper;
        std::cout << bounds.lower << " <= F_process <= " << bounds.upper << "\n";
    }
    write_json_file(sc, "truth_table_report.json", report);
}

void cmd_chsh(const locnot::ScenarioConfig& sc, const std::string& bell_name, bool oracle) {
    const BellPrep prep = bell_prep(bell_name);
    const auto resolved = locnot::resolve_eta(sc);
    if (oracle) oracle_crosscheck(prep.control, prep.target, resolved.eta, sc.gate);
    const auto run = locnot::run_cnot(prep.control, prep.target, resolved.eta, sc.gate);
    const auto rho = locnot::apply_depolarizing(locnot::polarization_density_matrix(run.state),
                                                sc.noise.epsilon);
    const auto opt = locnot::chsh_optimize(rho);
    json report{{"bell", bell_name},
                {"eta", resolved.eta},
                {"noise_epsilon", sc.noise.epsilon},
                {"seed", sc.seed},
                {"s_max", opt.s_max},
                {"angles_deg", opt.angles_deg},
                {"chsh_threshold", 2.0},
                {"violates_chsh", opt.s_max > 2.0},
                {"tsirelson_bound", 2.0 * std::sqrt(2.0)}};
    write_json_file(sc, "chsh_report.json", report);
    std::cout << "S_max = " << opt.s_max << " at angles (" << opt.angles_deg[0] << ", "
              << opt.angles_deg[1] << ", " << opt.angles_deg[2] << ", " << opt.angles_deg[3]
              << ") deg" << (opt.s_max > 2.0 ? " [violates |S| <= 2]" : "") << "\n";
}

void cmd_hom(const locnot::ScenarioConfig& sc) {
    if (sc.eta_override)
        throw locnot::ValidationError("hom: requires waveform inputs, not an eta override");
    const auto wf = locnot::scenario_waveforms(sc);
    std::vector<double> delays = sc.hom_delays_s;
    if (delays.empty())
        for (double d = -3e-9; d <= 3e-9 + 1e-15; d += 50e-12) delays.push_back(d);
    const locnot::WindowConfig window{sc.window_offset_s, sc.window_tau_int_s};
    const auto points = locnot::hom_scan(wf.source, wf.memory, delays, window);
    auto os = open_output(sc, "hom_scan.csv");
    os << "# seed=" << sc.seed << "\n";
    os << "delay_s,coincidence_prob,eta\n";
    for (const auto& p : points)
        os << p.delay_s << ',' << p.coincidence_prob << ',' << p.eta << '\n';
    std::cout << "dip visibility = " << locnot::hom_dip_visibility(points) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear-optical CNOT on partially distinguishable photon pairs"};
    app.require_subcommand(1);

    CommonArgs args;
    std::size_t curve_points = 101;
    std::string bell_name = "phi+";
    std::string basis_name = "all";

    auto* fidelity = app.add_subcommand("fidelity-curve", "model and Werner fidelity vs visibility");
    add_common_options(fidelity, args);
    fidelity->add_option("--points", curve_points, "number of grid points on [0, 1]");

    auto* sweep = app.add_subcommand("window-sweep", "gate figures of merit vs integration window");
    add_common_options(sweep, args);

    auto* tomo = app.add_subcommand("tomography", "counts, MLE reconstruction, fidelity report");
    add_common_options(tomo, args);
    tomo->add_option("--bell", bell_name, "Bell state to prepare (phi+, phi-, psi+, psi-)");

    auto* truth = app.add_subcommand("truth-table", "conditional truth tables and process bounds");
    add_common_options(truth, args);
    truth->add_option("--basis", basis_name, "zz, xx, yy, or all");

    auto* chsh = app.add_subcommand("chsh", "optimized CHSH score of the gate output");
    add_common_options(chsh, args);
    chsh->add_option("--bell", bell_name, "Bell state to prepare (phi+, phi-, psi+, psi-)");

    auto* hom = app.add_subcommand("hom", "Hong-Ou-Mandel coincidence scan vs programmed delay");
    add_common_options(hom, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const locnot::ScenarioConfig sc = load_scenario(args);
        if (fidelity->parsed()) cmd_fidelity_curve(sc, curve_points, args.oracle);
        if (sweep->parsed()) cmd_window_sweep(sc, args.oracle);
        if (tomo->parsed()) cmd_tomography(sc, bell_name, args.oracle);
        if (truth->parsed()) cmd_truth_table(sc, basis_name, args.oracle);
        if (chsh->parsed()) cmd_chsh(sc, bell_name, args.oracle);
        if (hom->parsed()) cmd_hom(sc);
    } catch (const OracleMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
