#pragma once

#include "locnot/errors.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

namespace locnot {

enum class BellState { phi_plus, phi_minus, psi_plus, psi_minus };

inline constexpr std::array<BellState, 4> kAllBellStates{
    BellState::phi_plus, BellState::phi_minus, BellState::psi_plus, BellState::psi_minus};

inline std::string to_string(BellState b) {
    switch (b) {
        case BellState::phi_plus: return "phi+";
        case BellState::phi_minus: return "phi-";
        case BellState::psi_plus: return "psi+";
        case BellState::psi_minus: return "psi-";
    }
    throw ValidationError("unknown BellState");
}

/// State vector in the (HH, HV, VH, VV) basis.
inline Eigen::Vector4cd bell_vector(BellState b) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (b) {
        case BellState::phi_plus: return {r, 0, 0, r};
        case BellState::phi_minus: return {r, 0, 0, -r};
        case BellState::psi_plus: return {0, r, r, 0};
        case BellState::psi_minus: return {0, r, -r, 0};
    }
    throw ValidationError("unknown BellState");
}

/// Two-qubit polarization density matrix, basis order (HH, HV, VH, VV).
/// Construction enforces Hermiticity within 1e-12, unit trace within 1e-12,
/// and positivity; eigenvalues in [-1e-10, 0) are clamped to zero.
class DensityMatrix4 {
public:
    explicit DensityMatrix4(const Eigen::Matrix4cd& m) : m_(m) { validate_and_clean(); }

    const Eigen::Matrix4cd& matrix() const { return m_; }
    std::complex<double> operator()(int i, int j) const { return m_(i, j); }

    static DensityMatrix4 maximally_mixed() {
        return DensityMatrix4(Eigen::Matrix4cd::Identity() * 0.25);
    }

    static DensityMatrix4 pure(const Eigen::Vector4cd& psi) {
        const double n = psi.squaredNorm();
        if (!(n > 0.0)) throw ValidationError("DensityMatrix4::pure: zero vector");
        return DensityMatrix4(psi * psi.adjoint() / n);
    }

private:
    void validate_and_clean() {
        if (!m_.allFinite()) throw ValidationError("DensityMatrix4: non-finite entries");
        const double herm_err = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
        if (herm_err > 1e-12)
            throw ValidationError("DensityMatrix4: not Hermitian (deviation " + std::to_string(herm_err) + ")");
        m_ = 0.5 * (m_ + m_.adjoint().eval());
        const double tr = m_.trace().real();
        if (std::abs(tr - 1.0) > 1e-12)
            throw ValidationError("DensityMatrix4: trace " + std::to_string(tr) + " is not 1");

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m_);
        const double min_ev = es.eigenvalues().minCoeff();
        if (min_ev < -1e-10)
            throw ValidationError("DensityMatrix4: negative eigenvalue " + std::to_string(min_ev));
        if (min_ev < 0.0) {
            Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
            ev /= ev.sum();
            m_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
        }
    }

    Eigen::Matrix4cd m_;
};

/// Closed-form post-selected gate output for each Bell-state preparation, as a
/// function of the photon indistinguishability eta. At eta = 1 these reduce to
/// the pure Bell projectors; at eta = 0 the target-state fidelity drops to 1/4.
inline DensityMatrix4 rho_bell(BellState which, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ValidationError("rho_bell: eta must lie in [0, 1]");
    const double c2 = 1.0 / (4.0 - 2.0 * eta);
    const double w = 1.0 - eta;
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    switch (which) {
        case BellState::phi_plus:
        case BellState::phi_minus: {
            const double s = (which == BellState::phi_plus) ? 1.0 : -1.0;
            m(0, 0) = 1.0;
            m(0, 2) = m(2, 0) = s * w;
            m(0, 3) = m(3, 0) = s * eta;
            m(2, 2) = 2.0 * w;
            m(2, 3) = m(3, 2) = -w;
            m(3, 3) = 1.0;
            break;
        }
        case BellState::psi_plus:
        case BellState::psi_minus: {
            const double s = (which == BellState::psi_plus) ? 1.0 : -1.0;
            m(1, 1) = 1.0;
            m(1, 2) = m(2, 1) = s * eta;
            m(1, 3) = m(3, 1) = s * w;
            m(2, 2) = 1.0;
            m(2, 3) = m(3, 2) = -w;
            m(3, 3) = 2.0 * w;
            break;
        }
    }
    return DensityMatrix4(c2 * m);
}

/// F = Tr(rho |target><target|), the Uhlmann fidelity against a pure target.
inline double fidelity_pure_target(const DensityMatrix4& rho, BellState target) {
    const Eigen::Vector4cd t = bell_vector(target);
    const double f = (t.adjoint() * rho.matrix() * t).real()(0, 0);
    return std::clamp(f, 0.0, 1.0);
}

/// Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 via
/// eigendecomposition. Symmetric, in [0, 1], and 1 iff rho == sigma.
inline double fidelity_general(const DensityMatrix4& rho, const DensityMatrix4& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho.matrix());
    const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    const Eigen::Matrix4cd sqrt_rho =
        es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
    Eigen::Matrix4cd inner = sqrt_rho * sigma.matrix() * sqrt_rho;
    inner = 0.5 * (inner + inner.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es2(inner);
    const double tr = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return std::clamp(tr * tr, 0.0, 1.0);
}

/// Fidelity-visibility law for the post-selected CNOT acting on pure single
/// photons: F(eta) = (1 + eta) / (2 (2 - eta)). Strictly increasing, with
/// F(0) = 1/4 and F(1) = 1. The same law holds for all four Bell states.
inline double fidelity_vs_eta(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ValidationError("fidelity_vs_eta: eta must lie in [0, 1]");
    return 0.5 * (1.0 + eta) / (2.0 - eta);
}

/// Werner-state prediction F = (1 + 3 V) / 4, for comparison with the exact law.
inline double werner_fidelity(double v) {
    if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("werner_fidelity: visibility must lie in [0, 1]");
    return 0.25 * (1.0 + 3.0 * v);
}

inline double trace_distance(const DensityMatrix4& a, const DensityMatrix4& b) {
    Eigen::Matrix4cd d = a.matrix() - b.matrix();
    d = 0.5 * (d + d.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(d);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

struct WernerFit {
    double weight = 0.0;              ///< least-squares w in w P + (1-w) I/4
    double frobenius_distance = 0.0;  ///< residual ||rho - fit||_F
};

/// Least-squares fit of rho by a Werner state w |B><B| + (1-w) I/4.
/// The gate output is not of this form for eta in (0, 1); the residual
/// quantifies how far it is from the best fit.
inline WernerFit best_werner_fit(const DensityMatrix4& rho, BellState target) {
    const Eigen::Matrix4cd p = bell_vector(target) * bell_vector(target).adjoint();
    const Eigen::Matrix4cd id4 = Eigen::Matrix4cd::Identity() * 0.25;
    const Eigen::Matrix4cd dir = p - id4;
    const double denom = dir.cwiseAbs2().sum();
    const double num = ((rho.matrix() - id4).cwiseProduct(dir.conjugate())).sum().real();
    const double w = num / denom;
    const Eigen::Matrix4cd resid = rho.matrix() - (w * p + (1.0 - w) * id4);
    return WernerFit{w, std::sqrt(resid.cwiseAbs2().sum())};
}

// --- JSON interchange: 4x4 array of [re, im] pairs, basis (HH, HV, VH, VV) ---

inline nlohmann::json density_matrix_to_json(const DensityMatrix4& rho) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 4; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < 4; ++j)
            row.push_back({rho(i, j).real(), rho(i, j).imag()});
        rows.push_back(row);
    }
    return nlohmann::json{{"basis", {"HH", "HV", "VH", "VV"}}, {"matrix", rows}};
}

inline DensityMatrix4 density_matrix_from_json(const nlohmann::json& j) {
    const auto& rows = j.at("matrix");
    if (rows.size() != 4) throw ValidationError("density matrix JSON: need 4 rows");
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; ++i) {
        if (rows[i].size() != 4) throw ValidationError("density matrix JSON: need 4 columns");
        for (int j2 = 0; j2 < 4; ++j2) {
            const auto& cell = rows[i][j2];
            if (cell.size() != 2) throw ValidationError("density matrix JSON: entries are [re, im]");
            m(i, j2) = std::complex<double>(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return DensityMatrix4(m);
}

} // namespace locnot
