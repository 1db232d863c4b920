#pragma once

#include "locnot/errors.hpp"
#include "locnot/measurement.hpp"
#include "locnot/states.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace locnot {

struct MleOptions {
    double rel_tol = 1e-10;             ///< relative log-likelihood change declaring convergence
    std::size_t max_iterations = 100000;
};

struct MleResult {
    DensityMatrix4 rho = DensityMatrix4::maximally_mixed();
    std::vector<double> log_likelihood;  ///< per-count log-likelihood after each accepted step
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

struct MleProblem {
    std::vector<Eigen::Vector4cd> states;  // one analyzer state per counted outcome
    std::vector<double> counts;            // same order, normalized to sum 1
};

inline MleProblem build_mle_problem(const CoincidenceDataset& data) {
    if (data.rows.empty())
        throw ValidationError("mle_reconstruct: dataset has no rows");
    const double total = static_cast<double>(data.total_counts());
    if (!(total > 0.0))
        throw ValidationError("mle_reconstruct: dataset contains no counts");

    MleProblem prob;
    // Completeness check: the projectors (over all outcomes, counted or not)
    // must span the 16-dimensional real space of Hermitian 4x4 observables.
    Eigen::MatrixXd span(16, static_cast<Eigen::Index>(data.rows.size()) * 4);
    Eigen::Index col = 0;
    for (const auto& row : data.rows) {
        for (int k = 0; k < 4; ++k, ++col) {
            const Eigen::Vector4cd v = detector_state(row.setting, k);
            const Eigen::Matrix4cd proj = v * v.adjoint();
            int d = 0;
            for (int i = 0; i < 4; ++i) span(d++, col) = proj(i, i).real();
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) {
                    span(d++, col) = proj(i, j).real();
                    span(d++, col) = proj(i, j).imag();
                }
            if (row.counts[static_cast<std::size_t>(k)] > 0) {
                prob.states.push_back(v);
                prob.counts.push_back(static_cast<double>(row.counts[static_cast<std::size_t>(k)]) / total);
            }
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span);
    qr.setThreshold(1e-9);
    if (qr.rank() < 16)
        throw RankDeficiencyError("mle_reconstruct: schedule is informationally incomplete (rank " +
                                  std::to_string(qr.rank()) + " of 16)");
    return prob;
}

inline double mle_log_likelihood(const MleProblem& prob, const Eigen::Matrix4cd& rho) {
    double ll = 0.0;
    for (std::size_t k = 0; k < prob.states.size(); ++k) {
        const double p =
            std::max(1e-300, (prob.states[k].adjoint() * rho * prob.states[k]).real()(0, 0));
        ll += prob.counts[k] * std::log(p);
    }
    return ll;
}

inline Eigen::Matrix4cd mle_r_operator(const MleProblem& prob, const Eigen::Matrix4cd& rho) {
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
    for (std::size_t k = 0; k < prob.states.size(); ++k) {
        const double p =
            std::max(1e-12, (prob.states[k].adjoint() * rho * prob.states[k]).real()(0, 0));
        r += (prob.counts[k] / p) * (prob.states[k] * prob.states[k].adjoint());
    }
    return r;
}

} // namespace detail

/// Maximum-likelihood reconstruction of the two-qubit density matrix from
/// coincidence counts. Iterates the R rho R fixed point (R is the
/// likelihood-gradient operator) with a dilution safeguard, so positivity
/// holds by construction and the recorded log-likelihood never decreases.
/// Stops when the relative likelihood change falls below rel_tol, when the
/// iterate stalls at machine precision, or at max_iterations.
inline MleResult mle_reconstruct_detailed(const CoincidenceDataset& data, MleOptions options = {}) {
    const detail::MleProblem prob = detail::build_mle_problem(data);

    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Identity() * 0.25;
    double ll = detail::mle_log_likelihood(prob, rho);

    MleResult result;
    result.log_likelihood.push_back(ll);

    const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();
    std::size_t it = 0;
    for (; it < options.max_iterations; ++it) {
        const Eigen::Matrix4cd r = detail::mle_r_operator(prob, rho);

        Eigen::Matrix4cd next;
        double ll_next = 0.0;
        bool accepted = false;
        // Full R rho R step first; if it overshoots, dilute toward identity.
        for (double lambda = 1.0; lambda > 1e-12; lambda *= 0.5) {
            const Eigen::Matrix4cd m = lambda < 1.0 ? (id + lambda * (r - id)).eval() : r;
            Eigen::Matrix4cd cand = m * rho * m.adjoint();
            cand = 0.5 * (cand + cand.adjoint().eval());
            const double tr = cand.trace().real();
            if (!(tr > 0.0)) continue;
            cand /= tr;
            const double ll_cand = detail::mle_log_likelihood(prob, cand);
            if (ll_cand >= ll) {
                next = cand;
                ll_next = ll_cand;
                accepted = true;
                break;
            }
        }
        if (!accepted) {  // stationary to machine precision
            result.converged = true;
            break;
        }

        const double dll = ll_next - ll;
        const double step = (next - rho).cwiseAbs().maxCoeff();
        rho = next;
        ll = ll_next;
        result.log_likelihood.push_back(ll);
        if (dll <= options.rel_tol * std::abs(ll) || step < 1e-15) {
            ++it;
            result.converged = true;
            break;
        }
    }
    result.iterations = it;
    result.rho = DensityMatrix4(rho);
    return result;
}

inline DensityMatrix4 mle_reconstruct(const CoincidenceDataset& data, MleOptions options = {}) {
    return mle_reconstruct_detailed(data, options).rho;
}

} // namespace locnot
