#pragma once

#include "locnot/errors.hpp"
#include "locnot/states.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

namespace locnot {

/// Fidelity above which a Bell-diagonal-like state is guaranteed to violate
/// Bell's inequality: (2 + 3 sqrt(2)) / 8 ~= 0.7803.
inline double bell_fidelity_threshold() {
    return (2.0 + 3.0 * std::sqrt(2.0)) / 8.0;
}

namespace detail {

/// Linear-analyzer correlators reduce to the 2x2 block of the Pauli
/// correlation matrix: E(a, b) = sum_{i,j in {z,x}} u_i(2a) T_ij u_j(2b).
struct ChshCorrelations {
    double t_zz, t_zx, t_xz, t_xx;

    explicit ChshCorrelations(const DensityMatrix4& rho) {
        Eigen::Matrix2cd z, x;
        z << 1, 0, 0, -1;
        x << 0, 1, 1, 0;
        auto corr = [&](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
            Eigen::Matrix4cd op;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    op.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
            return (rho.matrix() * op).trace().real();
        };
        t_zz = corr(z, z);
        t_zx = corr(z, x);
        t_xz = corr(x, z);
        t_xx = corr(x, x);
    }

    double correlator(double a_deg, double b_deg) const {
        using std::numbers::pi;
        const double a = 2.0 * a_deg * pi / 180.0;
        const double b = 2.0 * b_deg * pi / 180.0;
        const double ca = std::cos(a), sa = std::sin(a);
        const double cb = std::cos(b), sb = std::sin(b);
        return ca * cb * t_zz + ca * sb * t_zx + sa * cb * t_xz + sa * sb * t_xx;
    }

    /// S for analyzer angles (a, a', b, b') in degrees.
    double score(const std::array<double, 4>& ang) const {
        return correlator(ang[0], ang[2]) - correlator(ang[0], ang[3]) +
               correlator(ang[1], ang[2]) + correlator(ang[1], ang[3]);
    }
};

} // namespace detail

/// CHSH combination S = E(a,b) - E(a,b') + E(a',b) + E(a',b') for linear
/// polarization analyzers at the given angles (degrees, order a, a', b, b').
inline double chsh_score(const DensityMatrix4& rho, const std::array<double, 4>& angles_deg) {
    return detail::ChshCorrelations(rho).score(angles_deg);
}

struct ChshOptimum {
    double s_max = 0.0;
    std::array<double, 4> angles_deg{};
};

/// Maximizes |S| over the four analyzer angles: 10-degree coarse grid, then
/// cyclic coordinate refinement down to 0.01-degree steps. Also seeds from
/// the textbook (0, 45, 22.5, 67.5) set, so the result never falls below the
/// standard-angle score.
inline ChshOptimum chsh_optimize(const DensityMatrix4& rho) {
    const detail::ChshCorrelations corr(rho);
    auto objective = [&](const std::array<double, 4>& ang) { return std::abs(corr.score(ang)); };

    // Coarse scan. Analyzer settings are periodic in 180 degrees.
    std::array<double, 4> best{0, 0, 0, 0};
    double best_val = objective(best);
    std::array<double, 4> ang{};
    for (ang[0] = 0; ang[0] < 180.0; ang[0] += 10.0)
        for (ang[1] = 0; ang[1] < 180.0; ang[1] += 10.0)
            for (ang[2] = 0; ang[2] < 180.0; ang[2] += 10.0)
                for (ang[3] = 0; ang[3] < 180.0; ang[3] += 10.0) {
                    const double v = objective(ang);
                    if (v > best_val) {
                        best_val = v;
                        best = ang;
                    }
                }

    auto refine = [&](std::array<double, 4> a) {
        double val = objective(a);
        for (double step = 10.0; step >= 0.01; step *= 0.5) {
            bool improved = true;
            while (improved) {
                improved = false;
                for (int i = 0; i < 4; ++i) {
                    for (double dir : {step, -step}) {
                        auto cand = a;
                        cand[static_cast<std::size_t>(i)] += dir;
                        const double v = objective(cand);
                        if (v > val) {
                            val = v;
                            a = cand;
                            improved = true;
                        }
                    }
                }
            }
        }
        return std::pair{val, a};
    };

    auto [v1, a1] = refine(best);
    auto [v2, a2] = refine({0.0, 45.0, 22.5, 67.5});
    return v1 >= v2 ? ChshOptimum{v1, a1} : ChshOptimum{v2, a2};
}

} // namespace locnot
