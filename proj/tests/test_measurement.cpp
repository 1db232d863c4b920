#include "locnot/measurement.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

using namespace locnot;
using Catch::Approx;

namespace {

DensityMatrix4 random_density(std::mt19937_64& gen) {
    std::normal_distribution<double> n;
    Eigen::Matrix4cd g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = std::complex<double>{n(gen), n(gen)};
    Eigen::Matrix4cd rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix4(rho);
}

double jones_overlap(const JonesVector& a, const JonesVector& b) {
    return std::abs(std::conj(a.c_h) * b.c_h + std::conj(a.c_v) * b.c_v);
}

} // namespace

TEST_CASE("LocalBasis named states and waveplate equivalents", "[measurement]") {
    CHECK(LocalBasis::hv().label() == "H");
    CHECK(jones_overlap(LocalBasis::da().first(), pol::D) == Approx(1.0).margin(1e-12));
    CHECK(jones_overlap(LocalBasis::rl().second(), pol::L) == Approx(1.0).margin(1e-12));
    CHECK(jones_overlap(LocalBasis::from_state('V').first(), pol::V) == Approx(1.0).margin(1e-12));

    SECTION("waveplate settings reproduce the named bases up to phase") {
        const auto hv = LocalBasis::from_waveplates(0.0, 0.0);
        CHECK(jones_overlap(hv.first(), pol::H) == Approx(1.0).margin(1e-12));
        const auto da = LocalBasis::from_waveplates(22.5, 45.0);
        CHECK(jones_overlap(da.first(), pol::D) == Approx(1.0).margin(1e-12));
        CHECK(jones_overlap(da.second(), pol::A) == Approx(1.0).margin(1e-12));
        const auto rl = LocalBasis::from_waveplates(0.0, 45.0);
        CHECK(jones_overlap(rl.first(), pol::R) == Approx(1.0).margin(1e-12));
        CHECK(jones_overlap(rl.second(), pol::L) == Approx(1.0).margin(1e-12));
    }
    SECTION("labels parse back") {
        for (char c : {'H', 'V', 'D', 'A', 'R', 'L'}) {
            const auto b = LocalBasis::from_state(c);
            CHECK(jones_overlap(LocalBasis::parse(b.label()).first(), b.first()) ==
                  Approx(1.0).margin(1e-12));
        }
        const auto wp = LocalBasis::from_waveplates(12.5, 33.0);
        CHECK(jones_overlap(LocalBasis::parse(wp.label()).first(), wp.first()) ==
              Approx(1.0).margin(1e-9));
        CHECK_THROWS_AS(LocalBasis::parse("X"), ValidationError);
    }
}

TEST_CASE("tomography schedule covers all 36 state pairs", "[measurement]") {
    const auto schedule = tomography_schedule();
    REQUIRE(schedule.size() == 36);
    CHECK(schedule.front().control.label() == "H");
    CHECK(schedule.back().target.label() == "L");
}

TEST_CASE("born probabilities", "[measurement]") {
    const auto phi_plus = DensityMatrix4::pure(bell_vector(BellState::phi_plus));

    SECTION("Bell correlations in the computational basis") {
        const auto p = born_probabilities(phi_plus, {LocalBasis::hv(), LocalBasis::hv()});
        CHECK(p[0] == Approx(0.5).margin(1e-14));
        CHECK(p[1] == Approx(0.0).margin(1e-14));
        CHECK(p[2] == Approx(0.0).margin(1e-14));
        CHECK(p[3] == Approx(0.5).margin(1e-14));
    }
    SECTION("Phi+ is invariant under the diagonal basis") {
        const auto p = born_probabilities(phi_plus, {LocalBasis::da(), LocalBasis::da()});
        CHECK(p[0] == Approx(0.5).margin(1e-14));
        CHECK(p[3] == Approx(0.5).margin(1e-14));
    }
    SECTION("partially distinguishable output in the diagonal basis") {
        // spot value: <DD| rho_phi+(1/2) |DD> = 1/3
        const auto p = born_probabilities(rho_bell(BellState::phi_plus, 0.5),
                                          {LocalBasis::da(), LocalBasis::da()});
        CHECK(p[0] == Approx(1.0 / 3.0).margin(1e-13));
        // cross-check every outcome against a direct kron-projector contraction
        const auto setting = MeasurementSetting{LocalBasis::da(), LocalBasis::da()};
        const auto rho = rho_bell(BellState::phi_plus, 0.5);
        for (int k = 0; k < 4; ++k) {
            const Eigen::Vector4cd v = detector_state(setting, k);
            const Eigen::Matrix4cd proj = v * v.adjoint();
            CHECK(p[static_cast<std::size_t>(k)] ==
                  Approx((rho.matrix() * proj).trace().real()).margin(1e-13));
        }
    }
    SECTION("probabilities sum to one for every setting and random states") {
        std::mt19937_64 gen(3);
        const auto schedule = tomography_schedule();
        for (int trial = 0; trial < 5; ++trial) {
            const auto rho = random_density(gen);
            for (const auto& s : schedule) {
                const auto p = born_probabilities(rho, s);
                CHECK(p[0] + p[1] + p[2] + p[3] == Approx(1.0).margin(1e-12));
            }
        }
    }
}

TEST_CASE("simulate_counts", "[measurement]") {
    const auto phi_plus = DensityMatrix4::pure(bell_vector(BellState::phi_plus));
    const auto schedule = tomography_schedule();

    SECTION("fixed seed reproduces the dataset, different seeds differ") {
        const auto a = simulate_counts(phi_plus, schedule, 1000, 42);
        const auto b = simulate_counts(phi_plus, schedule, 1000, 42);
        const auto c = simulate_counts(phi_plus, schedule, 1000, 43);
        REQUIRE(a.rows.size() == b.rows.size());
        bool all_equal_ab = true, all_equal_ac = true;
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            all_equal_ab &= a.rows[i].counts == b.rows[i].counts;
            all_equal_ac &= a.rows[i].counts == c.rows[i].counts;
        }
        CHECK(all_equal_ab);
        CHECK_FALSE(all_equal_ac);
    }
    SECTION("forbidden outcomes of a pure state never fire") {
        const auto data =
            simulate_counts(phi_plus, {{LocalBasis::hv(), LocalBasis::hv()}}, 200000, 7);
        CHECK(data.rows[0].counts[1] == 0);
        CHECK(data.rows[0].counts[2] == 0);
        CHECK(data.rows[0].counts[0] + data.rows[0].counts[3] == 200000);
    }
    SECTION("empirical frequencies approach the Born probabilities") {
        const std::uint64_t shots = 10'000'000;
        const std::vector<MeasurementSetting> settings{
            {LocalBasis::hv(), LocalBasis::hv()},
            {LocalBasis::da(), LocalBasis::rl()},
            {LocalBasis::rl(), LocalBasis::da()}};
        const auto rho = rho_bell(BellState::phi_plus, 0.7);
        const auto data = simulate_counts(rho, settings, shots, 1234);
        for (std::size_t i = 0; i < settings.size(); ++i) {
            const auto p = born_probabilities(rho, settings[i]);
            for (int k = 0; k < 4; ++k) {
                const double expect = static_cast<double>(shots) * p[static_cast<std::size_t>(k)];
                const double sigma =
                    std::sqrt(std::max(1.0, static_cast<double>(shots) * p[static_cast<std::size_t>(k)] *
                                                (1.0 - p[static_cast<std::size_t>(k)])));
                CHECK(std::abs(static_cast<double>(data.rows[i].counts[static_cast<std::size_t>(k)]) -
                               expect) < 3.0 * sigma);
            }
        }
    }
    SECTION("depolarizing noise floor") {
        CHECK((apply_depolarizing(phi_plus, 1.0).matrix() -
               DensityMatrix4::maximally_mixed().matrix())
                  .cwiseAbs()
                  .maxCoeff() < 1e-15);
        const auto data = simulate_counts(phi_plus, {{LocalBasis::hv(), LocalBasis::hv()}}, 100000,
                                          11, NoiseConfig{0.5, CountModel::multinomial});
        // with eps = 0.5 the forbidden outcomes fire at rate eps/4 each
        CHECK(data.rows[0].counts[1] > 10000);
        CHECK(data.rows[0].counts[2] > 10000);
    }
    SECTION("poisson mode draws independent counts near shots * p") {
        const auto data = simulate_counts(phi_plus, {{LocalBasis::hv(), LocalBasis::hv()}}, 1000000,
                                          5, NoiseConfig{0.0, CountModel::poisson});
        const double c0 = static_cast<double>(data.rows[0].counts[0]);
        const double c3 = static_cast<double>(data.rows[0].counts[3]);
        CHECK(std::abs(c0 - 500000.0) < 5.0 * std::sqrt(500000.0));
        CHECK(std::abs(c3 - 500000.0) < 5.0 * std::sqrt(500000.0));
        CHECK(data.rows[0].counts[1] == 0);
        const auto again = simulate_counts(phi_plus, {{LocalBasis::hv(), LocalBasis::hv()}}, 1000000,
                                           5, NoiseConfig{0.0, CountModel::poisson});
        CHECK(again.rows[0].counts == data.rows[0].counts);
    }
    SECTION("validation") {
        CHECK_THROWS_AS(simulate_counts(phi_plus, {}, 100, 1), ValidationError);
        CHECK_THROWS_AS(simulate_counts(phi_plus, schedule, 0, 1), ValidationError);
        CHECK_THROWS_AS(apply_depolarizing(phi_plus, 1.5), ValidationError);
    }
}

TEST_CASE("poisson sampler moments", "[measurement]") {
    std::mt19937_64 gen(99);
    for (double mean : {0.5, 5.0, 50.0, 5000.0}) {
        const int trials = 20000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < trials; ++i) {
            const double x = static_cast<double>(rng::poisson(gen, mean));
            sum += x;
            sum2 += x * x;
        }
        const double m = sum / trials;
        const double var = sum2 / trials - m * m;
        CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / trials));
        CHECK(var == Approx(mean).epsilon(0.1));
    }
}

TEST_CASE("coincidence dataset CSV round trip", "[measurement]") {
    const auto rho = rho_bell(BellState::psi_minus, 0.8);
    const auto data = simulate_counts(rho, tomography_schedule(), 5000, 77);

    std::stringstream ss;
    write_counts_csv(data, ss);
    const auto back = read_counts_csv(ss);
    CHECK(back.seed == 77);
    REQUIRE(back.rows.size() == data.rows.size());
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        CHECK(back.rows[i].counts == data.rows[i].counts);
        CHECK(back.rows[i].shots == data.rows[i].shots);
        CHECK(back.rows[i].setting.control.label() == data.rows[i].setting.control.label());
    }
    SECTION("header is validated") {
        std::stringstream bad("# seed=1\nfoo,bar\n");
        CHECK_THROWS_AS(read_counts_csv(bad), ValidationError);
    }
}
