#include "locnot/hom.hpp"
#include "locnot/oracle.hpp"
#include "locnot/truth_table.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace locnot;
using Catch::Approx;

namespace {

/// Oracle-side truth-table fidelity: rows from the Fock simulation instead of
/// the analytic gate.
double oracle_truth_fidelity(TruthBasis basis, double eta) {
    const auto spec = detail::truth_spec(basis);
    double correct = 0.0;
    for (const auto& row : spec.rows) {
        const auto fock = oracle::simulate_with_eta(row.control, row.target, eta, GateConfig::ideal());
        const auto p = born_probabilities(fock.rho, spec.setting);
        for (std::size_t k = 0; k < 4; ++k)
            if (row.ideal[k]) correct += p[k];
    }
    return correct / 4.0;
}

TemporalWaveform gaussian(const TimeGrid& g, double t0, double sigma) {
    std::vector<Complex> s(g.n_samples);
    for (std::size_t i = 0; i < g.n_samples; ++i) {
        const double t = g.time(i);
        s[i] = std::exp(-(t - t0) * (t - t0) / (4.0 * sigma * sigma));
    }
    return TemporalWaveform::normalized(g, std::move(s));
}

} // namespace

TEST_CASE("ZZ truth table at eta = 1 is the ideal CNOT", "[truth]") {
    const auto table = truth_table(TruthBasis::zz, 1.0, GateConfig::ideal());
    CHECK(table.fidelity == Approx(1.0).margin(1e-12));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(table.rows[r][k] == Approx(table.ideal[r][k] ? 1.0 : 0.0).margin(1e-12));
}

TEST_CASE("truth-table rows are normalized coincidence distributions", "[truth]") {
    for (TruthBasis basis : {TruthBasis::zz, TruthBasis::xx, TruthBasis::yy}) {
        const auto table = truth_table(basis, 0.8, GateConfig::ideal());
        for (const auto& row : table.rows)
            CHECK(row[0] + row[1] + row[2] + row[3] == Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("truth-table fidelities depend on eta through the V-control rows", "[truth]") {
    // Closed forms derived from the gate algebra and confirmed by the Fock
    // oracle below: the interfering rows succeed with probability 1/(3-2 eta),
    // so F_ZZ = F_XX = (1 + 1/(3-2 eta))/2, and F_YY = 1/(2-eta).
    for (double eta : {0.0, 0.3, 0.5, 0.9, 1.0}) {
        const double f_zx = 0.5 * (1.0 + 1.0 / (3.0 - 2.0 * eta));
        const auto zz = truth_table(TruthBasis::zz, eta, GateConfig::ideal());
        const auto xx = truth_table(TruthBasis::xx, eta, GateConfig::ideal());
        const auto yy = truth_table(TruthBasis::yy, eta, GateConfig::ideal());
        CHECK(zz.fidelity == Approx(f_zx).margin(1e-12));
        CHECK(xx.fidelity == Approx(f_zx).margin(1e-12));
        CHECK(yy.fidelity == Approx(1.0 / (2.0 - eta)).margin(1e-12));
        CHECK(zz.fidelity == Approx(oracle_truth_fidelity(TruthBasis::zz, eta)).margin(1e-12));
        CHECK(xx.fidelity == Approx(oracle_truth_fidelity(TruthBasis::xx, eta)).margin(1e-12));
        CHECK(yy.fidelity == Approx(oracle_truth_fidelity(TruthBasis::yy, eta)).margin(1e-12));
    }
}

TEST_CASE("model XX fidelity sits near the reference value at eta = 0.9", "[truth]") {
    // the noiseless model bound should land within 0.05 of the reference 0.898
    const auto xx = truth_table(TruthBasis::xx, 0.9, GateConfig::ideal());
    CHECK(std::abs(xx.fidelity - 0.898) < 0.05);
}

TEST_CASE("process fidelity bounds", "[truth]") {
    SECTION("reference arithmetic") {
        const auto b = process_bounds(0.86, 0.898);
        CHECK(b.lower == Approx(0.758).margin(1e-12));
        CHECK(b.upper == Approx(0.86).margin(1e-12));
        const auto b2 = process_bounds(0.902, 0.907);
        CHECK(b2.lower == Approx(0.809).margin(1e-12));
        CHECK(b2.upper == Approx(0.902).margin(1e-12));
    }
    SECTION("perfect tables") {
        const auto b = process_bounds(1.0, 1.0);
        CHECK(b.lower == 1.0);
        CHECK(b.upper == 1.0);
    }
    SECTION("lower bound clamps at zero and never exceeds the upper") {
        const auto b = process_bounds(0.3, 0.4);
        CHECK(b.lower == 0.0);
        CHECK(b.upper == 0.3);
        for (double x : {0.0, 0.4, 0.9, 1.0})
            for (double y : {0.1, 0.5, 1.0}) {
                const auto bb = process_bounds(x, y);
                CHECK(bb.lower <= bb.upper);
            }
    }
    SECTION("out of range") {
        CHECK_THROWS_AS(process_bounds(1.2, 0.5), ValidationError);
    }
}

TEST_CASE("HOM scan limits", "[hom]") {
    const TimeGrid g = default_grid();
    const auto u = gaussian(g, 0.0, 0.5e-9);
    const auto wide = WindowConfig::full_span(g);

    SECTION("identical pulses at zero delay do not coincide") {
        const auto pts = hom_scan(u, u, std::vector<double>{0.0}, wide);
        CHECK(pts[0].coincidence_prob == Approx(0.0).margin(1e-12));
        CHECK(pts[0].eta == Approx(1.0).margin(1e-12));
    }
    SECTION("fully distinguishable pulses coincide at the classical rate") {
        const auto pts = hom_scan(u, u, std::vector<double>{6e-9}, wide);
        CHECK(pts[0].coincidence_prob == Approx(0.5).margin(1e-6));
    }
}

TEST_CASE("HOM scan of the presets inside a 3.5 ns window", "[hom]") {
    const TimeGrid g = default_grid();
    const auto src = preset_source_waveform(g);
    const auto mem = preset_memory_waveform(g);
    const WindowConfig window{-0.3e-9, 3.5e-9};

    std::vector<double> delays;
    for (double d = -2e-9; d <= 2e-9 + 1e-15; d += 20e-12) delays.push_back(d);
    const auto pts = hom_scan(src, mem, delays, window);

    // the dip minimum is (1 - eta)/2 with eta the windowed overlap at that delay
    double cmin = 1.0;
    double eta_at_min = 0.0;
    for (const auto& p : pts) {
        CHECK(p.coincidence_prob == Approx(0.5 * (1.0 - p.eta)).margin(1e-14));
        if (p.coincidence_prob < cmin) {
            cmin = p.coincidence_prob;
            eta_at_min = p.eta;
        }
    }
    CHECK(hom_dip_visibility(pts) == Approx(eta_at_min).margin(1e-10));

    // the windowed overlap at the optimal delay, computed independently
    const auto ws = apply_window(src, window).waveform;
    double best_eta = 0.0;
    for (double d : delays)
        best_eta = std::max(best_eta, overlap_eta(ws, apply_window(delay(mem, d), window).waveform));
    CHECK(hom_dip_visibility(pts) == Approx(best_eta).margin(1e-10));
}
