#pragma once

#include "locnot/errors.hpp"
#include "locnot/gate.hpp"
#include "locnot/measurement.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace locnot {

enum class TruthBasis { zz, xx, yy };

inline std::string to_string(TruthBasis b) {
    switch (b) {
        case TruthBasis::zz: return "zz";
        case TruthBasis::xx: return "xx";
        case TruthBasis::yy: return "yy";
    }
    throw ValidationError("unknown TruthBasis");
}

/// Conditional truth table: rows are the four basis inputs of the chosen
/// convention, columns the four coincidence outcomes of the analysis basis,
/// normalized to the post-selected coincidences (each row sums to 1).
struct TruthTable {
    TruthBasis basis;
    std::array<std::string, 4> input_labels;
    std::array<std::string, 4> outcome_labels;
    std::array<std::array<double, 4>, 4> rows{};
    std::array<std::array<bool, 4>, 4> ideal{};  ///< ideal-CNOT outcome support per row
    double fidelity = 0.0;                       ///< mean correct-outcome probability
};

namespace detail {

struct TruthRowSpec {
    JonesVector control, target;
    std::string label;
    std::array<bool, 4> ideal;
};

struct TruthSpec {
    MeasurementSetting setting;
    std::array<std::string, 4> outcome_labels;
    std::array<TruthRowSpec, 4> rows;
};

inline TruthSpec truth_spec(TruthBasis basis) {
    switch (basis) {
        case TruthBasis::zz:
            // CNOT in the computational basis: the target flips when the control is V.
            return TruthSpec{
                {LocalBasis::hv(), LocalBasis::hv()},
                {"HH", "HV", "VH", "VV"},
                {{{pol::H, pol::H, "HH", {true, false, false, false}},
                  {pol::H, pol::V, "HV", {false, true, false, false}},
                  {pol::V, pol::H, "VH", {false, false, false, true}},
                  {pol::V, pol::V, "VV", {false, false, true, false}}}}};
        case TruthBasis::xx:
            // Roles swap in the diagonal basis: the control flips when the target is A.
            return TruthSpec{
                {LocalBasis::da(), LocalBasis::da()},
                {"DD", "DA", "AD", "AA"},
                {{{pol::D, pol::D, "DD", {true, false, false, false}},
                  {pol::D, pol::A, "DA", {false, false, false, true}},
                  {pol::A, pol::D, "AD", {false, false, true, false}},
                  {pol::A, pol::A, "AA", {false, true, false, false}}}}};
        case TruthBasis::yy:
            // Bell-generating inputs {D,A} (x) {H,V} analyzed in R/L (x) R/L.
            // Each ideal output is a Bell state, which splits evenly over two
            // circular-basis outcomes; a row scores the mass on that pair.
            return TruthSpec{
                {LocalBasis::rl(), LocalBasis::rl()},
                {"RR", "RL", "LR", "LL"},
                {{{pol::D, pol::H, "DH", {false, true, true, false}},
                  {pol::D, pol::V, "DV", {true, false, false, true}},
                  {pol::A, pol::H, "AH", {true, false, false, true}},
                  {pol::A, pol::V, "AV", {false, true, true, false}}}}};
    }
    throw ValidationError("unknown TruthBasis");
}

} // namespace detail

/// Runs the gate on the four basis inputs of the chosen convention and
/// tabulates the post-selected outcome probabilities.
inline TruthTable truth_table(TruthBasis basis, double eta, const GateConfig& config) {
    const detail::TruthSpec spec = detail::truth_spec(basis);
    TruthTable table;
    table.basis = basis;
    table.outcome_labels = spec.outcome_labels;
    double correct = 0.0;
    for (std::size_t r = 0; r < 4; ++r) {
        const auto& row = spec.rows[r];
        table.input_labels[r] = row.label;
        table.ideal[r] = row.ideal;
        const PostselectResult run = run_cnot(row.control, row.target, eta, config);
        const DensityMatrix4 rho = polarization_density_matrix(run.state);
        table.rows[r] = born_probabilities(rho, spec.setting);
        for (std::size_t k = 0; k < 4; ++k)
            if (row.ideal[k]) correct += table.rows[r][k];
    }
    table.fidelity = correct / 4.0;
    return table;
}

struct ProcessBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Truth-table bounds on the process fidelity:
/// F_zz + F_xx - 1 <= F_process <= min(F_zz, F_xx).
inline ProcessBounds process_bounds(double f_zz, double f_xx) {
    if (!(f_zz >= 0.0 && f_zz <= 1.0 && f_xx >= 0.0 && f_xx <= 1.0))
        throw ValidationError("process_bounds: fidelities must lie in [0, 1]");
    const double upper = std::min(f_zz, f_xx);
    // lower <= upper holds exactly for fidelities in [0, 1]; guard the rounding
    const double lower = std::min(std::max(0.0, f_zz + f_xx - 1.0), upper);
    return ProcessBounds{lower, upper};
}

} // namespace locnot
