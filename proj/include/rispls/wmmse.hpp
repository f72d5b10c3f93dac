#pragma once

#include "rispls/channel.hpp"
#include "rispls/linalg.hpp"
#include "rispls/rates.hpp"
#include "rispls/types.hpp"

// Weighted-MMSE machinery. Each log-det term of the secrecy objective is
// written as max over (A, S) of  log|S| - tr(S M(A)) + n  where M is an MSE
// matrix; the A and S maximisers are available in closed form. All internal
// quantities are in nats; surrogate_objective converts to bits once.

namespace rispls {

template <typename Real>
struct AuxiliaryState {
    CMatrix<Real> a1;  // N_d x N_d
    CMatrix<Real> a2;  // K x N
    CMatrix<Real> s1;  // N_d x N_d, HPD
    CMatrix<Real> s2;  // N x N, HPD
    CMatrix<Real> s3;  // K x K, HPD
};

/// log|S| - tr(S M) + n, natural log.
template <typename Real>
Real lemma_f(const CMatrix<Real>& s, const CMatrix<Real>& m) {
    if (s.rows() != s.cols() || m.rows() != m.cols() || s.rows() != m.rows()) {
        throw DomainError("lemma_f: S and M must be square of equal size");
    }
    const Real log_det = log_det_hpd(s, "S");
    return log_det - (s * m).trace().real() + Real(s.rows());
}

/// Receiver MSE matrix
///   (A1^H U^H H V - I)(...)^H + A1^H U^H (s2 I + H Z~ Z~^H H^H) U A1.
template <typename Real>
CMatrix<Real> mse_m1(const CMatrix<Real>& a1, const CMatrix<Real>& u, const CMatrix<Real>& h_eff,
                     const CMatrix<Real>& v, const CMatrix<Real>& z_factor, Real noise_var) {
    const Eigen::Index nd = v.cols();
    const CMatrix<Real> uh = u.adjoint() * h_eff;
    const CMatrix<Real> err = a1.adjoint() * uh * v - CMatrix<Real>::Identity(nd, nd);
    const CMatrix<Real> uhz = uh * z_factor;
    const CMatrix<Real> interf = noise_var * (u.adjoint() * u) + uhz * uhz.adjoint();
    return hermitian_part(err * err.adjoint() + a1.adjoint() * interf * a1);
}

/// AN-side MSE matrix (A2^H H_E Z~ - I)(...)^H + s2 A2^H A2.
template <typename Real>
CMatrix<Real> mse_m2(const CMatrix<Real>& a2, const CMatrix<Real>& h_e, const CMatrix<Real>& z_factor,
                     Real noise_var) {
    const Eigen::Index n = z_factor.cols();
    const CMatrix<Real> err = a2.adjoint() * h_e * z_factor - CMatrix<Real>::Identity(n, n);
    return hermitian_part(err * err.adjoint() + noise_var * (a2.adjoint() * a2));
}

/// I_K + s^-2 H_E (V V^H + Z~ Z~^H) H_E^H.
template <typename Real>
CMatrix<Real> mse_m3(const CMatrix<Real>& h_e, const CMatrix<Real>& v, const CMatrix<Real>& z_factor,
                     Real noise_var) {
    const Eigen::Index k = h_e.rows();
    const CMatrix<Real> hv = h_e * v;
    const CMatrix<Real> hz = h_e * z_factor;
    CMatrix<Real> m = CMatrix<Real>::Identity(k, k);
    m += (hv * hv.adjoint() + hz * hz.adjoint()) / noise_var;
    return hermitian_part(m);
}

/// MMSE receive filter on top of U:
///   (U^H (s2 I + H V V^H H^H + H Z~ Z~^H H^H) U)^{-1} U^H H V.
template <typename Real>
CMatrix<Real> update_a1(const CMatrix<Real>& u, const CMatrix<Real>& h_eff, const CMatrix<Real>& v,
                        const CMatrix<Real>& z_factor, Real noise_var) {
    const CMatrix<Real> uh = u.adjoint() * h_eff;
    const CMatrix<Real> uhv = uh * v;
    const CMatrix<Real> uhz = uh * z_factor;
    const CMatrix<Real> cov = noise_var * (u.adjoint() * u) + uhv * uhv.adjoint() + uhz * uhz.adjoint();
    return hpd_solve(cov, uhv, "A1 covariance");
}

/// (s2 I_K + H_E Z~ Z~^H H_E^H)^{-1} H_E Z~.
template <typename Real>
CMatrix<Real> update_a2(const CMatrix<Real>& h_e, const CMatrix<Real>& z_factor, Real noise_var) {
    const CMatrix<Real> hz = h_e * z_factor;
    CMatrix<Real> cov = hz * hz.adjoint();
    cov.diagonal().array() += noise_var;
    return hpd_solve(cov, hz, "A2 covariance");
}

/// I + V^H H^H U (s2 U^H U + U^H H Z~ Z~^H H^H U)^{-1} U^H H V.
template <typename Real>
CMatrix<Real> update_s1(const CMatrix<Real>& v, const CMatrix<Real>& h_eff, const CMatrix<Real>& u,
                        const CMatrix<Real>& z_factor, Real noise_var) {
    const CMatrix<Real> uh = u.adjoint() * h_eff;
    const CMatrix<Real> uhv = uh * v;
    const CMatrix<Real> uhz = uh * z_factor;
    const CMatrix<Real> interf = noise_var * (u.adjoint() * u) + uhz * uhz.adjoint();
    CMatrix<Real> s = uhv.adjoint() * hpd_solve(interf, uhv, "S1 interference covariance");
    s.diagonal().array() += Real(1);
    return hermitian_part(s);
}

/// I_N + s^-2 Z~^H H_E^H H_E Z~.
template <typename Real>
CMatrix<Real> update_s2(const CMatrix<Real>& h_e, const CMatrix<Real>& z_factor, Real noise_var) {
    const CMatrix<Real> hz = h_e * z_factor;
    CMatrix<Real> s = hz.adjoint() * hz / noise_var;
    s.diagonal().array() += Real(1);
    return hermitian_part(s);
}

template <typename Real>
CMatrix<Real> update_s3(const CMatrix<Real>& m3) {
    return hpd_inverse(m3, "M3");
}

/// All five closed-form auxiliary updates in order A1, A2, S1, S2, S3.
template <typename Real>
AuxiliaryState<Real> update_auxiliaries(const LegitimateDesign<Real>& d, const CMatrix<Real>& h_eff,
                                        const CMatrix<Real>& h_e, Real noise_var) {
    AuxiliaryState<Real> st;
    st.a1 = update_a1(d.u, h_eff, d.v, d.z_factor, noise_var);
    st.a2 = update_a2(h_e, d.z_factor, noise_var);
    st.s1 = update_s1(d.v, h_eff, d.u, d.z_factor, noise_var);
    st.s2 = update_s2(h_e, d.z_factor, noise_var);
    st.s3 = update_s3(mse_m3(h_e, d.v, d.z_factor, noise_var));
    return st;
}

/// Effective legitimate channel of a design; the direct channel when the design
/// carries no RIS phases.
template <typename Real>
CMatrix<Real> legitimate_channel(const ChannelSet<Real>& ch, const CVector<Real>& phi) {
    if (phi.size() == 0) return ch.h;
    return effective_legitimate(ch.h, ch.h2, phi, ch.h1);
}

/// Sum of the three log-det surrogates in bits. Equals
/// R_RX + R_E1 - R_E2 when the auxiliaries are at their maximisers.
template <typename Real>
Real surrogate_objective(const AuxiliaryState<Real>& st, const LegitimateDesign<Real>& d,
                         const CMatrix<Real>& h_eff, const CMatrix<Real>& h_e, Real noise_var) {
    const Real f1 = lemma_f(st.s1, mse_m1(st.a1, d.u, h_eff, d.v, d.z_factor, noise_var));
    const Real f2 = lemma_f(st.s2, mse_m2(st.a2, h_e, d.z_factor, noise_var));
    const Real f3 = lemma_f(st.s3, mse_m3(h_e, d.v, d.z_factor, noise_var));
    return log2_from_ln(f1 + f2 + f3);
}

template <typename Real>
Real surrogate_objective(const AuxiliaryState<Real>& st, const LegitimateDesign<Real>& d,
                         const ChannelSet<Real>& ch, Real noise_var) {
    return surrogate_objective(st, d, legitimate_channel(ch, d.phi), ch.h_e, noise_var);
}

/// The believed secrecy objective R_RX - R_E(bs) (may be negative).
template <typename Real>
Real believed_secrecy(const LegitimateDesign<Real>& d, const CMatrix<Real>& h_eff, const CMatrix<Real>& h_e,
                      Real noise_var) {
    return rate_rx(d.u, h_eff, d.v, d.z_cov, noise_var) - rate_e_bs(h_e, d.v, d.z_cov, noise_var);
}

}  // namespace rispls
