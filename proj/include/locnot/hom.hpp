#pragma once

#include "locnot/waveform.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace locnot {

struct HomPoint {
    double delay_s = 0.0;
    double coincidence_prob = 0.0;  ///< (1 - eta)/2 at a balanced beam splitter
    double eta = 0.0;
};

/// Hong-Ou-Mandel scan: for each programmed delay, delays u2, applies the
/// integration window to both photons (renormalizing, as the post-selected
/// analysis does), and evaluates the coincidence probability (1 - eta)/2.
/// The dip visibility of the resulting curve equals the windowed overlap at
/// the best delay; far out the curve approaches the classical 1/2.
inline std::vector<HomPoint> hom_scan(const TemporalWaveform& u1, const TemporalWaveform& u2,
                                      std::span<const double> delays, const WindowConfig& window) {
    const TemporalWaveform w1 = apply_window(u1, window).waveform;
    std::vector<HomPoint> points;
    points.reserve(delays.size());
    for (double d : delays) {
        const TemporalWaveform w2 = apply_window(delay(u2, d), window).waveform;
        const double eta = overlap_eta(w1, w2);
        points.push_back({d, 0.5 * (1.0 - eta), eta});
    }
    return points;
}

/// Dip visibility V = (P_max - P_min)/P_max against the classical baseline 1/2.
inline double hom_dip_visibility(std::span<const HomPoint> points) {
    if (points.empty()) throw ValidationError("hom_dip_visibility: empty scan");
    double pmin = points[0].coincidence_prob;
    for (const auto& p : points) pmin = std::min(pmin, p.coincidence_prob);
    return 1.0 - 2.0 * pmin;
}

} // namespace locnot
