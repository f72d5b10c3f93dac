#pragma once

#include "rispls/channel.hpp"
#include "rispls/config.hpp"
#include "rispls/linalg.hpp"
#include "rispls/manifold.hpp"
#include "rispls/rates.hpp"
#include "rispls/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

// Eavesdropper side. E does not know about the AN and assumes the BS
// zero-forces the direct BS-E channel, so its believed signal only travels
// through the eavesdropping RIS: y = G2 diag(psi) G1 V s + n. E alternates
// between the combiner W and the RIS phases psi to maximise that rate.

namespace rispls {

template <typename Real>
struct ZfPrecoder {
    CMatrix<Real> v;     // N x n_d
    int n_d = 0;         // streams actually used (clamped to N - K)
    bool feasible = true;
};

/// Streams E can assume: N_d clamped to max(1, N - K).
inline int eavesdropper_streams(int n_d, int n_bs, int k_e) {
    return std::max(1, std::min(n_d, n_bs - k_e));
}

/// Orthonormal null-space columns of H_E (right singular vectors past index K,
/// in the SVD's order), each scaled to power / n_d.
template <typename Real>
ZfPrecoder<Real> assumed_zf_precoder(const CMatrix<Real>& h_e, int n_d, Real power) {
    const Eigen::Index k = h_e.rows(), n = h_e.cols();
    ZfPrecoder<Real> out;
    if (n <= k) {
        out.feasible = false;
        out.n_d = std::max(1, n_d);
        out.v = CMatrix<Real>::Zero(n, out.n_d);
        return out;
    }
    out.n_d = eavesdropper_streams(n_d, int(n), int(k));
    Eigen::JacobiSVD<CMatrix<Real>> svd(h_e, Eigen::ComputeFullV);
    out.v = svd.matrixV().middleCols(k, out.n_d) * std::sqrt(power / Real(out.n_d));
    return out;
}

/// MMSE combiner for E's believed model, rescaled onto the unit Frobenius
/// sphere. When H_bar V_bar lacks full column rank the MMSE filter is rank
/// deficient; its column space is then completed with the remaining left
/// singular vectors so that W^H W stays invertible.
template <typename Real>
CMatrix<Real> update_w(const CMatrix<Real>& h_bar_e, const CMatrix<Real>& v_assumed, Real noise_var, int n_d) {
    const Eigen::Index k = h_bar_e.rows();
    if (n_d > k) throw DomainError("update_w: more streams than eavesdropper antennas");
    CMatrix<Real> g = h_bar_e * v_assumed;
    if (g.cols() != n_d) {
        CMatrix<Real> padded = CMatrix<Real>::Zero(k, n_d);
        padded.leftCols(std::min<Eigen::Index>(n_d, g.cols())) = g.leftCols(std::min<Eigen::Index>(n_d, g.cols()));
        g = padded;
    }
    Eigen::JacobiSVD<CMatrix<Real>> svd(g, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const Real smax = sv.size() ? sv(0) : Real(0);
    const bool full_rank = smax > Real(0) && sv(sv.size() - 1) > Real(1e-10) * smax;
    if (!full_rank) {
        return svd.matrixU().leftCols(n_d) / std::sqrt(Real(n_d));
    }
    CMatrix<Real> cov = g * g.adjoint();
    cov.diagonal().array() += noise_var;
    CMatrix<Real> w = hpd_solve(cov, g, "eavesdropper MMSE covariance");
    return w / w.norm();
}

/// The believed eavesdropper rate as a function of psi (W, V_bar fixed).
template <typename Real>
PhaseRate<Real> eavesdropper_phase_rate(const ChannelSet<Real>& ch, const CMatrix<Real>& w,
                                        const CMatrix<Real>& v_assumed, Real noise_var) {
    return PhaseRate<Real>(w, CMatrix<Real>(), ch.g2, ch.g1, v_assumed * v_assumed.adjoint() / noise_var,
                           CMatrix<Real>(), hermitian_part(w.adjoint() * w));
}

/// Maximises the believed rate over the eavesdropping RIS phases.
template <typename Real>
ManifoldResult<Real> optimize_psi(const ChannelSet<Real>& ch, const CMatrix<Real>& w, const CMatrix<Real>& v_assumed,
                                  Real noise_var, const ManifoldParams& params, const CVector<Real>& psi0) {
    const auto rate = eavesdropper_phase_rate(ch, w, v_assumed, noise_var);
    return optimize_phi(negated(rate), psi0, params);
}

struct EavesdropperParams {
    double rel_tol = 1e-4;
    int max_outer = 50;
    ManifoldParams manifold;
};

template <typename Real>
struct EavesdropperOutcome {
    EavesdropperDesign<Real> design;
    ZfPrecoder<Real> assumed;
    Real believed_rate = 0;            // final rate in E's model
    std::vector<Real> rate_trace;      // after every W and psi half-step
    int outer_iterations = 0;
};

/// Alternating W / psi design. psi starts from all ones.
template <typename Real>
EavesdropperOutcome<Real> design_eavesdropper(const ChannelSet<Real>& ch, const SystemConfig& config, int n_d,
                                              const EavesdropperParams& params = {}) {
    const Real noise = Real(config.noise_var);
    EavesdropperOutcome<Real> out;
    out.assumed = assumed_zf_precoder(ch.h_e, n_d, Real(config.power));
    const int nde = out.assumed.n_d;
    CVector<Real> psi = CVector<Real>::Ones(ch.lambda_ris());
    CMatrix<Real> w;
    Real prev = 0;
    for (int it = 1; it <= params.max_outer; ++it) {
        const CMatrix<Real> h_bar = cascaded_eavesdrop(ch.g2, psi, ch.g1);
        w = update_w(h_bar, out.assumed.v, noise, nde);
        const Real after_w = rate_e_assumed(w, h_bar, out.assumed.v, noise);
        out.rate_trace.push_back(after_w);
        Real after_psi = after_w;
        if (psi.size() > 0) {
            auto res = optimize_psi(ch, w, out.assumed.v, noise, params.manifold, psi);
            psi = res.phi;
            after_psi = rate_e_assumed(w, cascaded_eavesdrop(ch.g2, psi, ch.g1), out.assumed.v, noise);
        }
        out.rate_trace.push_back(after_psi);
        out.outer_iterations = it;
        const Real change = std::abs(after_psi - prev);
        prev = after_psi;
        if (psi.size() == 0) break;
        if (after_psi == Real(0) ? change <= Real(params.rel_tol) : change / after_psi <= Real(params.rel_tol)) break;
    }
    // W matched to the final psi
    const CMatrix<Real> h_bar = cascaded_eavesdrop(ch.g2, psi, ch.g1);
    w = update_w(h_bar, out.assumed.v, noise, nde);
    out.believed_rate = rate_e_assumed(w, h_bar, out.assumed.v, noise);
    out.design.w = std::move(w);
    out.design.psi = std::move(psi);
    return out;
}

}  // namespace rispls
