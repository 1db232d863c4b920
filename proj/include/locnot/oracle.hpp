#pragma once

#include "locnot/errors.hpp"
#include "locnot/gate.hpp"
#include "locnot/states.hpp"
#include "locnot/waveform.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace locnot::oracle {

/// Orthonormal temporal pair spanning {u_m, u_s}: u_m = v1 and
/// u_s = c1 v1 + c2 v2, with |c1|^2 = eta and c2 real non-negative.
struct SchmidtDecomposition {
    TemporalWaveform v1;
    std::optional<TemporalWaveform> v2;  ///< absent when eta = 1 within 1e-12
    Complex c1{0.0, 0.0};
    double c2 = 0.0;

    bool single_mode() const { return !v2.has_value(); }
    double eta() const { return std::norm(c1); }
};

inline SchmidtDecomposition gram_schmidt_temporal(const TemporalWaveform& u_m,
                                                  const TemporalWaveform& u_s) {
    if (!(u_m.grid() == u_s.grid()))
        throw GridMismatchError("gram_schmidt_temporal: waveforms live on different grids");
    if (std::abs(u_m.norm_squared() - 1.0) > 1e-6 || std::abs(u_s.norm_squared() - 1.0) > 1e-6)
        throw ValidationError("gram_schmidt_temporal: waveforms must be unit-norm");

    const Complex c1 = inner_product(u_m, u_s);
    const double resid2 = 1.0 - std::norm(c1);
    if (resid2 < 1e-12)
        return SchmidtDecomposition{u_m, std::nullopt, c1 / std::abs(c1), 0.0};

    std::vector<Complex> resid(u_m.size());
    for (std::size_t i = 0; i < u_m.size(); ++i)
        resid[i] = u_s.samples()[i] - c1 * u_m.samples()[i];
    TemporalWaveform v2 = TemporalWaveform::normalized(u_m.grid(), std::move(resid));
    return SchmidtDecomposition{u_m, std::move(v2), c1, std::sqrt(resid2)};
}

namespace detail {

// Mode bookkeeping. Spatial labels: the gate ports m, s (inputs), f, g
// (between the PPBSs), p, q (monitored outputs), the two loss ports d1, d2 of
// the balancing PPBSs, and their vacuum feeds v1, v2 (so that every element
// is a bona fide unitary on the full mode set).
enum Spatial { kM = 0, kS, kF, kG, kP, kQ, kD1, kD2, kV1, kV2, kSpatialCount };
inline constexpr int kPolCount = 2;   // H, V
inline constexpr int kTempCount = 2;  // Schmidt pair
inline constexpr int kModeCount = kSpatialCount * kPolCount * kTempCount;

inline int mode_index(int spatial, int pol, int temporal) {
    return (spatial * kPolCount + pol) * kTempCount + temporal;
}

inline Eigen::MatrixXcd identity() {
    return Eigen::MatrixXcd::Identity(kModeCount, kModeCount);
}

/// Polarization Hadamard on one spatial port.
inline Eigen::MatrixXcd hadamard_unitary(int spatial) {
    Eigen::MatrixXcd u = identity();
    const double r = 1.0 / std::sqrt(2.0);
    for (int tau = 0; tau < kTempCount; ++tau) {
        const int h = mode_index(spatial, 0, tau), v = mode_index(spatial, 1, tau);
        u(h, h) = r; u(h, v) = r;
        u(v, h) = r; u(v, v) = -r;
    }
    return u;
}

/// First PPBS: m -> sqrt(T) f + i sqrt(R) g, s -> sqrt(T) g + i sqrt(R) f,
/// per polarization. The f, g input columns are completed so the map is
/// unitary on the full mode set.
inline Eigen::MatrixXcd ppbs1_unitary(const PpbsMain& c) {
    Eigen::MatrixXcd u = identity();
    const Complex i{0.0, 1.0};
    for (int pol = 0; pol < kPolCount; ++pol) {
        const double t = pol == 0 ? c.t_h : c.t_v;
        const double r = pol == 0 ? c.r_h : c.r_v;
        const double st = std::sqrt(t), sr = std::sqrt(r);
        for (int tau = 0; tau < kTempCount; ++tau) {
            const int m = mode_index(kM, pol, tau), s = mode_index(kS, pol, tau);
            const int f = mode_index(kF, pol, tau), g = mode_index(kG, pol, tau);
            for (int x : {m, s, f, g}) { u.row(x).setZero(); u.col(x).setZero(); }
            u(f, m) = st; u(g, m) = i * sr;
            u(g, s) = st; u(f, s) = i * sr;
            u(m, f) = st; u(s, f) = i * sr;
            u(s, g) = st; u(m, g) = i * sr;
        }
    }
    return u;
}

/// Balancing PPBS: src -> sqrt(T) out + i sqrt(R) dump, with the vacuum feed
/// completing the 2x2 splitter. Perpendicular mounting: lab H sees t_v.
inline Eigen::MatrixXcd balancer_unitary(const PpbsBalancer& c, int src, int out, int dump, int vac) {
    Eigen::MatrixXcd u = identity();
    const Complex i{0.0, 1.0};
    for (int pol = 0; pol < kPolCount; ++pol) {
        const double t = pol == 0 ? c.t_v : c.t_h;
        const double st = std::sqrt(t), sr = std::sqrt(1.0 - t);
        for (int tau = 0; tau < kTempCount; ++tau) {
            const int a = mode_index(src, pol, tau), b = mode_index(out, pol, tau);
            const int d = mode_index(dump, pol, tau), v = mode_index(vac, pol, tau);
            for (int x : {a, b, d, v}) { u.row(x).setZero(); u.col(x).setZero(); }
            u(b, a) = st; u(d, a) = i * sr;
            u(b, v) = i * sr; u(d, v) = st;
            u(a, b) = 1.0; u(v, d) = 1.0;
        }
    }
    return u;
}

} // namespace detail

/// The gate as an ordered list of mode unitaries on the full (40-mode) space:
/// target Hadamard, first PPBS, the two balancers with their loss ports, and
/// the closing target Hadamard. Each matrix is unitary within 1e-12.
inline std::vector<Eigen::MatrixXcd> mode_unitaries(const GateConfig& config) {
    config.validate();
    return {
        detail::hadamard_unitary(detail::kS),
        detail::ppbs1_unitary(config.ppbs1),
        detail::balancer_unitary(config.ppbs2, detail::kF, detail::kP, detail::kD1, detail::kV1),
        detail::balancer_unitary(config.ppbs3, detail::kG, detail::kQ, detail::kD2, detail::kV2),
        detail::hadamard_unitary(detail::kQ),
    };
}

struct FockResult {
    DensityMatrix4 rho;
    double success_prob = 0.0;
};

/// Brute-force simulation in the two-photon Fock space over explicit modes.
/// `overlap` is the complex waveform overlap <u_m|u_s> (so eta = |overlap|^2).
/// The two-photon amplitude matrix S (state = sum_ij S_ij a_i^dag a_j^dag |0>,
/// S symmetric, 2 ||S||_F^2 = 1) is pushed through each unitary as U S U^T;
/// any norm or symmetry violation indicates a photon-number bug and throws
/// std::logic_error.
inline FockResult simulate_with_overlap(const JonesVector& pol_m, const JonesVector& pol_s,
                                        Complex overlap, const GateConfig& config) {
    using namespace detail;
    if (std::norm(overlap) > 1.0 + 1e-12)
        throw ValidationError("simulate_with_overlap: |overlap| must be <= 1");
    const double c2 = std::sqrt(std::max(0.0, 1.0 - std::norm(overlap)));

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(kModeCount);
    x(mode_index(kM, 0, 0)) = pol_m.c_h;
    x(mode_index(kM, 1, 0)) = pol_m.c_v;
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(kModeCount);
    for (int tau = 0; tau < kTempCount; ++tau) {
        const Complex ct = tau == 0 ? overlap : Complex{c2, 0.0};
        y(mode_index(kS, 0, tau)) = pol_s.c_h * ct;
        y(mode_index(kS, 1, tau)) = pol_s.c_v * ct;
    }

    Eigen::MatrixXcd s = 0.5 * (x * y.transpose() + y * x.transpose());
    s /= std::sqrt(2.0 * s.cwiseAbs2().sum());

    for (const auto& u : mode_unitaries(config)) {
        s = u * s * u.transpose();
        const double norm2 = 2.0 * s.cwiseAbs2().sum();
        if (std::abs(norm2 - 1.0) > 1e-12)
            throw std::logic_error("oracle: photon-number/norm violation in mode map");
        if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::logic_error("oracle: bosonic exchange symmetry violated");
    }

    // Post-select exactly one photon in p and one in q; the ordered (p, q)
    // amplitude for distinct modes i, j is 2 S_ij.
    std::array<std::array<Complex, 4>, 4> amp{};  // [2P+Q][2tau+sigma]
    double success = 0.0;
    for (int P = 0; P < 2; ++P)
        for (int tau = 0; tau < 2; ++tau)
            for (int Q = 0; Q < 2; ++Q)
                for (int sig = 0; sig < 2; ++sig) {
                    const Complex a = 2.0 * s(mode_index(kP, P, tau), mode_index(kQ, Q, sig));
                    amp[static_cast<std::size_t>(2 * P + Q)][static_cast<std::size_t>(2 * tau + sig)] = a;
                    success += std::norm(a);
                }
    if (!(success > 1e-30))
        throw DegenerateStateError("oracle: post-selection retains no amplitude");

    Eigen::Matrix4cd rho;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Complex v{0.0, 0.0};
            for (int k = 0; k < 4; ++k)
                v += amp[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                     std::conj(amp[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
            rho(i, j) = v / success;
        }
    return FockResult{DensityMatrix4(rho), success};
}

inline FockResult simulate_with_eta(const JonesVector& pol_m, const JonesVector& pol_s,
                                    double eta, const GateConfig& config) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ValidationError("simulate_with_eta: eta must lie in [0, 1]");
    return simulate_with_overlap(pol_m, pol_s, Complex{std::sqrt(eta), 0.0}, config);
}

/// Full pipeline from sampled waveforms: Schmidt-reduce the temporal pair,
/// then simulate in the resulting two-mode basis (exact, since both photons
/// live in span{u_m, u_s} and the network is temporally diagonal).
inline FockResult simulate_full(const JonesVector& pol_m, const JonesVector& pol_s,
                                const TemporalWaveform& u_m, const TemporalWaveform& u_s,
                                const GateConfig& config) {
    const SchmidtDecomposition sd = gram_schmidt_temporal(u_m, u_s);
    return simulate_with_overlap(pol_m, pol_s, sd.c1, config);
}

} // namespace locnot::oracle
