#pragma once

#include "locnot/errors.hpp"
#include "locnot/gate.hpp"
#include "locnot/states.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace locnot {

/// One local polarization analyzer: an ordered pair of orthonormal analysis
/// states. The first state feeds the "0" detector of that qubit. Bases can be
/// named (H/V, D/A, R/L, or anchored on any of the six states) or specified
/// by a half-wave/quarter-wave plate pair in front of an H/V splitter.
class LocalBasis {
public:
    static LocalBasis hv() { return from_state('H'); }
    static LocalBasis da() { return from_state('D'); }
    static LocalBasis rl() { return from_state('R'); }

    /// Basis anchored on one of the six states H,V,D,A,R,L; the second
    /// analysis state is its orthogonal partner.
    static LocalBasis from_state(char state) {
        switch (state) {
            case 'H': return LocalBasis(pol::H, pol::V, "H");
            case 'V': return LocalBasis(pol::V, pol::H, "V");
            case 'D': return LocalBasis(pol::D, pol::A, "D");
            case 'A': return LocalBasis(pol::A, pol::D, "A");
            case 'R': return LocalBasis(pol::R, pol::L, "R");
            case 'L': return LocalBasis(pol::L, pol::R, "L");
            default: throw ValidationError(std::string("LocalBasis: unknown state '") + state + "'");
        }
    }

    /// Waveplate pair (quarter-wave then half-wave, fast-axis angles in
    /// degrees) followed by an H/V splitter. The analyzed states are
    /// QWP(q)^dag HWP(h)^dag |H/V>; e.g. (22.5, 45) analyzes D/A and
    /// (0, 45) analyzes R/L.
    static LocalBasis from_waveplates(double hwp_deg, double qwp_deg) {
        using std::numbers::pi;
        const double h2 = 2.0 * hwp_deg * pi / 180.0;
        const double q = qwp_deg * pi / 180.0;
        Eigen::Matrix2cd hwp;
        hwp << std::cos(h2), std::sin(h2), std::sin(h2), -std::cos(h2);
        const double c = std::cos(q), s = std::sin(q);
        const std::complex<double> i{0.0, 1.0};
        Eigen::Matrix2cd qwp;
        qwp << c * c + i * s * s, (1.0 - i) * s * c, (1.0 - i) * s * c, s * s + i * c * c;
        const Eigen::Matrix2cd analysis = qwp.adjoint() * hwp.adjoint();
        const Eigen::Vector2cd first = analysis * Eigen::Vector2cd(1.0, 0.0);
        const Eigen::Vector2cd second = analysis * Eigen::Vector2cd(0.0, 1.0);
        std::ostringstream label;
        label << "wp(" << hwp_deg << ";" << qwp_deg << ")";
        return LocalBasis(JonesVector(first(0), first(1)), JonesVector(second(0), second(1)),
                          label.str());
    }

    static LocalBasis parse(const std::string& label) {
        if (label.size() == 1) return from_state(label[0]);
        if (label.starts_with("wp(") && label.ends_with(")")) {
            const std::string inner = label.substr(3, label.size() - 4);
            const auto sep = inner.find(';');
            if (sep != std::string::npos) {
                try {
                    return from_waveplates(std::stod(inner.substr(0, sep)),
                                           std::stod(inner.substr(sep + 1)));
                } catch (const std::exception&) {
                    // fall through to the error below
                }
            }
        }
        throw ValidationError("LocalBasis: cannot parse label '" + label + "'");
    }

    const JonesVector& first() const { return first_; }
    const JonesVector& second() const { return second_; }
    const std::string& label() const { return label_; }

private:
    LocalBasis(JonesVector first, JonesVector second, std::string label)
        : first_(first), second_(second), label_(std::move(label)) {}

    JonesVector first_;
    JonesVector second_;
    std::string label_;
};

struct MeasurementSetting {
    LocalBasis control;
    LocalBasis target;
};

/// The 36-setting tomography schedule: all pairs of analysis states from
/// {H, V, D, A, R, L}, read out by four detectors each (144 numbers total).
inline std::vector<MeasurementSetting> tomography_schedule() {
    static constexpr std::array<char, 6> states{'H', 'V', 'D', 'A', 'R', 'L'};
    std::vector<MeasurementSetting> schedule;
    schedule.reserve(36);
    for (char c : states)
        for (char t : states)
            schedule.push_back({LocalBasis::from_state(c), LocalBasis::from_state(t)});
    return schedule;
}

inline Eigen::Vector4cd detector_state(const MeasurementSetting& s, int outcome) {
    const JonesVector& c = (outcome & 2) ? s.control.second() : s.control.first();
    const JonesVector& t = (outcome & 1) ? s.target.second() : s.target.first();
    return {c.c_h * t.c_h, c.c_h * t.c_v, c.c_v * t.c_h, c.c_v * t.c_v};
}

/// Probabilities of the four coincidence outcomes (00, 01, 10, 11) for one
/// analysis setting. They always sum to 1.
inline std::array<double, 4> born_probabilities(const DensityMatrix4& rho,
                                                const MeasurementSetting& setting) {
    std::array<double, 4> p{};
    for (int k = 0; k < 4; ++k) {
        const Eigen::Vector4cd v = detector_state(setting, k);
        p[static_cast<std::size_t>(k)] =
            std::max(0.0, (v.adjoint() * rho.matrix() * v).real()(0, 0));
    }
    return p;
}

/// Depolarizing admixture rho -> (1 - eps) rho + eps I/4, the phenomenological
/// stand-in for multiphoton and background noise.
inline DensityMatrix4 apply_depolarizing(const DensityMatrix4& rho, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw ValidationError("apply_depolarizing: epsilon must lie in [0, 1]");
    if (epsilon == 0.0) return rho;
    return DensityMatrix4((1.0 - epsilon) * rho.matrix() +
                          epsilon * 0.25 * Eigen::Matrix4cd::Identity());
}

enum class CountModel { multinomial, poisson };

struct NoiseConfig {
    double epsilon = 0.0;  ///< depolarizing floor, 0 = noiseless
    CountModel model = CountModel::multinomial;
};

namespace rng {

/// splitmix64; used to derive independent per-setting seeds from the master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9e3779b97f4a7c15ULL * (index + 1));
}

inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Deterministic Poisson sampler: inversion for small means, Hormann's PTRS
/// transformed rejection for large ones.
inline std::uint64_t poisson(std::mt19937_64& gen, double mean) {
    if (!(mean >= 0.0)) throw ValidationError("poisson: mean must be non-negative");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform01(gen);
        while (prod > limit) {
            ++k;
            prod *= uniform01(gen);
        }
        return k;
    }
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = uniform01(gen) - 0.5;
        const double v = uniform01(gen);
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * log_mean - mean - std::lgamma(kf + 1.0))
            return static_cast<std::uint64_t>(kf);
    }
}

} // namespace rng

struct CountRow {
    MeasurementSetting setting;
    std::array<std::uint64_t, 4> counts{};
    std::uint64_t shots = 0;
};

/// Per-setting detector coincidence counts, plus the seed they were drawn with.
struct CoincidenceDataset {
    std::vector<CountRow> rows;
    std::uint64_t seed = 0;

    std::uint64_t total_counts() const {
        std::uint64_t t = 0;
        for (const auto& r : rows)
            for (auto c : r.counts) t += c;
        return t;
    }
};

/// Draws synthetic coincidence counts from the Born-rule probabilities of
/// `rho`; multinomial with fixed shots per setting by default (matching data
/// normalized to total coincidences), or independent Poisson counts with mean
/// shots * p. Deterministic for a fixed seed; each setting uses an
/// independent substream, so settings may be simulated in any order.
inline CoincidenceDataset simulate_counts(const DensityMatrix4& rho,
                                          const std::vector<MeasurementSetting>& schedule,
                                          std::uint64_t shots_per_setting, std::uint64_t seed,
                                          const NoiseConfig& noise = {}) {
    if (schedule.empty())
        throw ValidationError("simulate_counts: schedule is empty");
    if (shots_per_setting < 1)
        throw ValidationError("simulate_counts: need at least one shot per setting");
    const DensityMatrix4 rho_eff = apply_depolarizing(rho, noise.epsilon);

    CoincidenceDataset data;
    data.seed = seed;
    data.rows.reserve(schedule.size());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto p = born_probabilities(rho_eff, schedule[i]);
        std::mt19937_64 gen(rng::substream_seed(seed, i));
        CountRow row{schedule[i], {}, shots_per_setting};
        if (noise.model == CountModel::multinomial) {
            const std::array<double, 3> cdf{p[0], p[0] + p[1], p[0] + p[1] + p[2]};
            for (std::uint64_t shot = 0; shot < shots_per_setting; ++shot) {
                const double u = rng::uniform01(gen);
                const std::size_t k = u < cdf[0] ? 0 : u < cdf[1] ? 1 : u < cdf[2] ? 2 : 3;
                ++row.counts[k];
            }
        } else {
            for (std::size_t k = 0; k < 4; ++k)
                row.counts[k] = rng::poisson(gen, static_cast<double>(shots_per_setting) * p[k]);
        }
        data.rows.push_back(std::move(row));
    }
    return data;
}

// --- CSV interchange ---
// # seed=<N>
// setting_control,setting_target,det_00,det_01,det_10,det_11,shots

inline void write_counts_csv(const CoincidenceDataset& data, std::ostream& os) {
    os << "# seed=" << data.seed << "\n";
    os << "setting_control,setting_target,det_00,det_01,det_10,det_11,shots\n";
    for (const auto& r : data.rows) {
        os << r.setting.control.label() << ',' << r.setting.target.label();
        for (auto c : r.counts) os << ',' << c;
        os << ',' << r.shots << '\n';
    }
}

inline void write_counts_csv(const CoincidenceDataset& data, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_counts_csv(data, os);
}

inline CoincidenceDataset read_counts_csv(std::istream& is) {
    CoincidenceDataset data;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("seed=");
            if (pos != std::string::npos) data.seed = std::stoull(line.substr(pos + 5));
            continue;
        }
        if (!header_seen) {
            std::string h = line;
            std::erase_if(h, [](char c) { return c == ' '; });
            if (h != "setting_control,setting_target,det_00,det_01,det_10,det_11,shots")
                throw ValidationError("counts CSV: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7)
            throw ValidationError("counts CSV: expected 7 columns at line " + std::to_string(line_no));
        CountRow row{{LocalBasis::parse(cells[0]), LocalBasis::parse(cells[1])}, {}, 0};
        for (int k = 0; k < 4; ++k) row.counts[static_cast<std::size_t>(k)] = std::stoull(cells[static_cast<std::size_t>(k) + 2]);
        row.shots = std::stoull(cells[6]);
        data.rows.push_back(std::move(row));
    }
    if (!header_seen) throw ValidationError("counts CSV: missing header row");
    return data;
}

inline CoincidenceDataset read_counts_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path.string());
    return read_counts_csv(is);
}

} // namespace locnot
