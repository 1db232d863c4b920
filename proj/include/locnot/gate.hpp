#pragma once

#include "locnot/errors.hpp"
#include "locnot/states.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>

namespace locnot {

/// Single-photon polarization state, |c_h|^2 + |c_v|^2 = 1 within 1e-12.
struct JonesVector {
    std::complex<double> c_h;
    std::complex<double> c_v;

    JonesVector(std::complex<double> h, std::complex<double> v) : c_h(h), c_v(v) {
        const double n = std::norm(c_h) + std::norm(c_v);
        if (std::abs(n - 1.0) > 1e-12)
            throw ValidationError("JonesVector: not normalized");
    }

    Eigen::Vector2cd vector() const { return {c_h, c_v}; }
};

/// The six single-qubit analysis states used throughout: H/V, D/A = (H +- V)/sqrt(2),
/// R/L = (H +- iV)/sqrt(2).
namespace pol {
inline const JonesVector H{1.0, 0.0};
inline const JonesVector V{0.0, 1.0};
inline const JonesVector D{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
inline const JonesVector A{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
inline const JonesVector R{1.0 / std::sqrt(2.0), std::complex<double>{0.0, 1.0 / std::sqrt(2.0)}};
inline const JonesVector L{1.0 / std::sqrt(2.0), std::complex<double>{0.0, -1.0 / std::sqrt(2.0)}};
} // namespace pol

/// Interfering PPBS: transmission/reflection per polarization, T + R = 1.
struct PpbsMain {
    double t_h = 1.0;
    double r_h = 0.0;
    double t_v = 1.0 / 3.0;
    double r_v = 2.0 / 3.0;
};

/// Balancing PPBS in one output arm, mounted perpendicular to the first, so
/// lab-frame H light sees its t_v coefficient and V light its t_h. Only the
/// transmitted amplitude reaches the monitored port; the rest is lost.
struct PpbsBalancer {
    double t_h = 1.0;
    double t_v = 1.0 / 3.0;
};

struct GateConfig {
    PpbsMain ppbs1;
    PpbsBalancer ppbs2;  ///< in output arm p (control side)
    PpbsBalancer ppbs3;  ///< in output arm q (target side)

    static GateConfig ideal() { return GateConfig{}; }

    void validate() const {
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!in01(ppbs1.t_h) || !in01(ppbs1.r_h) || !in01(ppbs1.t_v) || !in01(ppbs1.r_v) ||
            !in01(ppbs2.t_h) || !in01(ppbs2.t_v) || !in01(ppbs3.t_h) || !in01(ppbs3.t_v))
            throw ValidationError("GateConfig: coefficients must lie in [0, 1]");
        if (std::abs(ppbs1.t_h + ppbs1.r_h - 1.0) > 1e-12 ||
            std::abs(ppbs1.t_v + ppbs1.r_v - 1.0) > 1e-12)
            throw ValidationError("GateConfig: ppbs1 must satisfy T + R = 1 per polarization");
    }
};

/// Which photon an in-gate operation addresses. The control photon enters at
/// the memory port m and exits at p; the target enters at s and exits at q.
enum class Port { control, target };

/// Temporal content of one polarization term: a f(t,t') + b f(t',t), where
/// f(t,t') = u_m(t) u_s(t'). The squared norm of such a term is
/// |a|^2 + |b|^2 + 2 eta Re(a* b).
struct ExchangeAmplitudes {
    std::complex<double> a{0.0, 0.0};
    std::complex<double> b{0.0, 0.0};
};

/// Polarization indices into the four-term coefficient arrays.
inline constexpr int kHH = 0, kHV = 1, kVH = 2, kVV = 3;

/// Two-photon polarization state with the temporal degrees of freedom reduced
/// to the exchange-symmetric pair {f(t,t'), f(t',t)}. The PPBS network is
/// temporally diagonal, so it never creates structure outside this span; the
/// representation is exact and closed under every gate operation.
class TwoPhotonState {
public:
    TwoPhotonState(std::array<ExchangeAmplitudes, 4> terms, double eta)
        : terms_(terms), eta_(eta) {
        if (!(eta >= 0.0 && eta <= 1.0))
            throw ValidationError("TwoPhotonState: eta must lie in [0, 1]");
    }

    const std::array<ExchangeAmplitudes, 4>& terms() const { return terms_; }
    const ExchangeAmplitudes& term(int pq) const { return terms_[static_cast<std::size_t>(pq)]; }
    double eta() const { return eta_; }

    double term_norm_squared(int pq) const {
        const auto& t = terms_[static_cast<std::size_t>(pq)];
        return std::norm(t.a) + std::norm(t.b) + 2.0 * eta_ * (std::conj(t.a) * t.b).real();
    }

    double norm_squared() const {
        double n = 0.0;
        for (int pq = 0; pq < 4; ++pq) n += term_norm_squared(pq);
        return n;
    }

private:
    std::array<ExchangeAmplitudes, 4> terms_;
    double eta_;
};

/// Product input state: control photon (port m) x target photon (port s),
/// with temporal overlap eta between the two wavepackets.
inline TwoPhotonState build_input_state(const JonesVector& control, const JonesVector& target,
                                        double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ValidationError("build_input_state: eta must lie in [0, 1]");
    std::array<ExchangeAmplitudes, 4> t{};
    t[kHH].a = control.c_h * target.c_h;
    t[kHV].a = control.c_h * target.c_v;
    t[kVH].a = control.c_v * target.c_h;
    t[kVV].a = control.c_v * target.c_v;
    return TwoPhotonState(t, eta);
}

/// Half-wave plate at 22.5 degrees: H -> (H+V)/sqrt(2), V -> (H-V)/sqrt(2) on the
/// chosen photon, applied component-wise to both exchange amplitudes.
inline TwoPhotonState hadamard(const TwoPhotonState& state, Port port) {
    const double r = 1.0 / std::sqrt(2.0);
    const auto& in = state.terms();
    std::array<ExchangeAmplitudes, 4> out{};
    auto mix = [&](int first, int second) {
        out[static_cast<std::size_t>(first)].a = r * (in[static_cast<std::size_t>(first)].a + in[static_cast<std::size_t>(second)].a);
        out[static_cast<std::size_t>(first)].b = r * (in[static_cast<std::size_t>(first)].b + in[static_cast<std::size_t>(second)].b);
        out[static_cast<std::size_t>(second)].a = r * (in[static_cast<std::size_t>(first)].a - in[static_cast<std::size_t>(second)].a);
        out[static_cast<std::size_t>(second)].b = r * (in[static_cast<std::size_t>(first)].b - in[static_cast<std::size_t>(second)].b);
    };
    if (port == Port::control) {
        mix(kHH, kVH);  // mixes the first polarization index
        mix(kHV, kVV);
    } else {
        mix(kHH, kHV);  // mixes the second polarization index
        mix(kVH, kVV);
    }
    return TwoPhotonState(out, state.eta());
}

/// The three-PPBS network with post-selection on one photon in each monitored
/// output port. Beam-splitter convention: transmitted amplitudes real,
/// reflected +i. Terms with both photons in one arm are dropped; the exchange
/// term from both photons reflecting at the first PPBS feeds the b amplitude.
/// The result is unnormalized; its squared norm is the survival probability.
inline TwoPhotonState ppbs_network(const TwoPhotonState& state, const GateConfig& config) {
    config.validate();
    const auto& in = state.terms();
    const double th = config.ppbs1.t_h, rh = config.ppbs1.r_h;
    const double tv = config.ppbs1.t_v, rv = config.ppbs1.r_v;
    const double cross_t = std::sqrt(th * tv);
    const double cross_r = std::sqrt(rh * rv);

    std::array<ExchangeAmplitudes, 4> out{};
    // Same-polarization pairs interfere: transmitted^2 keeps the temporal
    // assignment, reflected^2 (phase i^2 = -1) swaps it.
    out[kHH].a = th * in[kHH].a - rh * in[kHH].b;
    out[kHH].b = th * in[kHH].b - rh * in[kHH].a;
    out[kVV].a = tv * in[kVV].a - rv * in[kVV].b;
    out[kVV].b = tv * in[kVV].b - rv * in[kVV].a;
    // Cross-polarization pairs: the double-reflection exchanges which port
    // carries which polarization and which temporal argument.
    out[kHV].a = cross_t * in[kHV].a - cross_r * in[kVH].b;
    out[kHV].b = cross_t * in[kHV].b - cross_r * in[kVH].a;
    out[kVH].a = cross_t * in[kVH].a - cross_r * in[kHV].b;
    out[kVH].b = cross_t * in[kVH].b - cross_r * in[kHV].a;

    // Balancing PPBSs: perpendicular mounting means H is attenuated by
    // sqrt(t_v) and V by sqrt(t_h) in each arm.
    const double hp = std::sqrt(config.ppbs2.t_v), vp = std::sqrt(config.ppbs2.t_h);
    const double hq = std::sqrt(config.ppbs3.t_v), vq = std::sqrt(config.ppbs3.t_h);
    const std::array<double, 4> atten{hp * hq, hp * vq, vp * hq, vp * vq};
    for (int pq = 0; pq < 4; ++pq) {
        out[static_cast<std::size_t>(pq)].a *= atten[static_cast<std::size_t>(pq)];
        out[static_cast<std::size_t>(pq)].b *= atten[static_cast<std::size_t>(pq)];
    }
    return TwoPhotonState(out, state.eta());
}

struct PostselectResult {
    TwoPhotonState state;     ///< unit norm
    double success_prob = 0;  ///< squared norm of the unnormalized input
};

inline PostselectResult postselect_normalize(const TwoPhotonState& state) {
    const double n2 = state.norm_squared();
    if (!(n2 > 1e-30))
        throw DegenerateStateError("postselect_normalize: state has zero norm");
    const double scale = 1.0 / std::sqrt(n2);
    auto terms = state.terms();
    for (auto& t : terms) {
        t.a *= scale;
        t.b *= scale;
    }
    return PostselectResult{TwoPhotonState(terms, state.eta()), n2};
}

/// Full gate: Hadamard(target) -> PPBS network -> Hadamard(target), then
/// post-selected normalization. For the ideal gate the success probability of
/// a D (x) H input is (2 - eta)/9, i.e. exactly 1/9 at eta = 1.
inline PostselectResult run_cnot(const JonesVector& control, const JonesVector& target,
                                 double eta, const GateConfig& config) {
    TwoPhotonState s = build_input_state(control, target, eta);
    s = hadamard(s, Port::target);
    s = ppbs_network(s, config);
    s = hadamard(s, Port::target);
    return postselect_normalize(s);
}

/// Weights of a normalized state on the four orthonormal Bell-like states
/// built from the (anti)symmetrized temporal wavefunctions f_±. Order:
/// (Phi~+, Phi~-, Psi~+, Psi~-). The set spans the outputs of the Phi+
/// preparation (D (x) H input), where the weights sum to 1 and the first is
/// the generation fidelity F(eta); other preparations leave part of their
/// weight outside this span.
inline std::array<double, 4> bell_decomposition(const TwoPhotonState& state) {
    const double eta = state.eta();
    const auto& t = state.terms();
    const std::complex<double> sym_phi = t[kHH].a + t[kHH].b + t[kVV].a + t[kVV].b;
    const std::complex<double> asym_phi = (t[kHH].a - t[kHH].b) - (t[kVV].a - t[kVV].b);
    const std::complex<double> asym_hv = t[kHV].a - t[kHV].b;
    const std::complex<double> asym_vh = t[kVH].a - t[kVH].b;
    return {
        std::norm(sym_phi) * (1.0 + eta) / 4.0,
        std::norm(asym_phi) * (1.0 - eta) / 4.0,
        std::norm(asym_hv + asym_vh) * (1.0 - eta) / 4.0,
        std::norm(asym_hv - asym_vh) * (1.0 - eta) / 4.0,
    };
}

/// Reduced polarization density matrix: trace over the temporal pair using
/// the Gram matrix [[1, eta], [eta, 1]] of {f(t,t'), f(t',t)}. The input is
/// rescaled to unit trace, so pass post-selected states.
inline DensityMatrix4 polarization_density_matrix(const TwoPhotonState& state) {
    const double n2 = state.norm_squared();
    if (!(n2 > 1e-30))
        throw DegenerateStateError("polarization_density_matrix: state has zero norm");
    const double eta = state.eta();
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const auto& ti = state.term(i);
            const auto& tj = state.term(j);
            m(i, j) = ti.a * std::conj(tj.a) + ti.b * std::conj(tj.b) +
                      eta * (ti.a * std::conj(tj.b) + ti.b * std::conj(tj.a));
        }
    }
    return DensityMatrix4(m / n2);
}

} // namespace locnot
