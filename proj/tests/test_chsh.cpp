#include "locnot/chsh.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace locnot;
using Catch::Approx;

namespace {

const std::array<double, 4> kStandardAngles{0.0, 45.0, 22.5, 67.5};

DensityMatrix4 random_density(std::mt19937_64& gen) {
    std::normal_distribution<double> n;
    Eigen::Matrix4cd g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = std::complex<double>{n(gen), n(gen)};
    Eigen::Matrix4cd rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix4(rho);
}

/// Dense 1-degree grid search used as the optimizer's oracle.
double grid_search_oracle(const DensityMatrix4& rho, double step_deg) {
    const detail::ChshCorrelations corr(rho);
    const int n = static_cast<int>(180.0 / step_deg);
    std::vector<std::vector<double>> e(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = corr.correlator(i * step_deg, j * step_deg);
    double best = 0.0;
    for (int a = 0; a < n; ++a)
        for (int ap = 0; ap < n; ++ap)
            for (int b = 0; b < n; ++b)
                for (int bp = 0; bp < n; ++bp) {
                    const double s = std::abs(e[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] -
                                              e[static_cast<std::size_t>(a)][static_cast<std::size_t>(bp)] +
                                              e[static_cast<std::size_t>(ap)][static_cast<std::size_t>(b)] +
                                              e[static_cast<std::size_t>(ap)][static_cast<std::size_t>(bp)]);
                    best = std::max(best, s);
                }
    return best;
}

} // namespace

TEST_CASE("bell_fidelity_threshold", "[chsh]") {
    CHECK(bell_fidelity_threshold() == Approx((2.0 + 3.0 * std::sqrt(2.0)) / 8.0).margin(1e-15));
    CHECK(bell_fidelity_threshold() == Approx(0.7803300858899107).margin(1e-12));
    CHECK(bell_fidelity_threshold() > 0.75);
    CHECK(bell_fidelity_threshold() < 1.0);

    SECTION("inverting the fidelity law at the threshold by bisection") {
        double lo = 0.0, hi = 1.0;
        for (int iter = 0; iter < 60; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (fidelity_vs_eta(mid) < bell_fidelity_threshold() ? lo : hi) = mid;
        }
        // closed form: eta* = 2 sqrt(2) - 2
        CHECK(0.5 * (lo + hi) == Approx(2.0 * std::sqrt(2.0) - 2.0).margin(1e-9));
    }
}

TEST_CASE("chsh_score", "[chsh]") {
    const auto phi_plus = DensityMatrix4::pure(bell_vector(BellState::phi_plus));
    CHECK(chsh_score(phi_plus, kStandardAngles) == Approx(2.0 * std::sqrt(2.0)).margin(1e-12));
    CHECK(chsh_score(DensityMatrix4::maximally_mixed(), kStandardAngles) ==
          Approx(0.0).margin(1e-14));
    // CHSH with all four angles equal collapses to 2 E(a, a)
    CHECK(chsh_score(phi_plus, {0.0, 0.0, 0.0, 0.0}) == Approx(2.0).margin(1e-12));
}

TEST_CASE("chsh_optimize on reference states", "[chsh]") {
    SECTION("pure Bell state saturates the Tsirelson bound") {
        const auto opt = chsh_optimize(DensityMatrix4::pure(bell_vector(BellState::phi_plus)));
        CHECK(opt.s_max == Approx(2.0 * std::sqrt(2.0)).margin(1e-6));
    }
    SECTION("maximally mixed state scores zero") {
        CHECK(chsh_optimize(DensityMatrix4::maximally_mixed()).s_max < 1e-9);
    }
    SECTION("partially distinguishable gate output, eta = 0.9") {
        const auto rho = rho_bell(BellState::phi_plus, 0.9);
        const auto opt = chsh_optimize(rho);
        // closed form over linear analyzers: (4/(4-2 eta)) sqrt(1 + (2 eta - 1)^2)
        CHECK(opt.s_max == Approx(2.328408813611945).margin(1e-6));
        // never below the dense grid-search oracle, never more than a grid cell above
        const double grid = grid_search_oracle(rho, 1.0);
        CHECK(opt.s_max >= grid - 1e-9);
        CHECK(opt.s_max - grid < 2e-3);
        CHECK(opt.s_max >= std::abs(chsh_score(rho, kStandardAngles)));
    }
}

TEST_CASE("chsh_optimize respects the Tsirelson bound on random states", "[chsh]") {
    std::mt19937_64 gen(2718);
    const double tsirelson = 2.0 * std::sqrt(2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rho = random_density(gen);
        const auto opt = chsh_optimize(rho);
        CHECK(opt.s_max <= tsirelson + 1e-9);
        CHECK(opt.s_max >= std::abs(chsh_score(rho, kStandardAngles)) - 1e-12);
        CHECK(opt.s_max == Approx(std::abs(chsh_score(rho, opt.angles_deg))).margin(1e-12));
    }
}
