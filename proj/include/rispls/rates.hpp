#pragma once

#include "rispls/linalg.hpp"
#include "rispls/types.hpp"

#include <algorithm>
#include <cmath>

namespace rispls {

/// Legitimate-side decision variables: streams, precoder, AN covariance (and
/// its square factor), RX combiner and legitimate RIS phases.
template <typename Real>
struct LegitimateDesign {
    int n_d = 1;
    CMatrix<Real> v;         // N x N_d
    CMatrix<Real> z_cov;     // N x N, = z_factor z_factor^H
    CMatrix<Real> z_factor;  // N x N
    CMatrix<Real> u;         // M x N_d
    CVector<Real> phi;       // L, empty without a legitimate RIS

    void set_z_factor(CMatrix<Real> factor) {
        z_factor = std::move(factor);
        z_cov = hermitian_part(z_factor * z_factor.adjoint());
    }

    Real transmit_power() const { return v.squaredNorm() + z_cov.trace().real(); }
};

/// Eavesdropper-side decision variables.
template <typename Real>
struct EavesdropperDesign {
    CMatrix<Real> w;    // K x N_d
    CVector<Real> psi;  // Lambda
};

/// How far a design sits outside the feasible set (all zero when feasible).
struct ConstraintResiduals {
    double power_excess = 0;      // max(0, tr(VV^H) + tr(Z) - P)
    double combiner_excess = 0;   // max(0, ||U||_F - 1)
    double modulus_error = 0;     // max_l | |phi_l| - 1 |
    double factor_error = 0;      // ||Z - Z~ Z~^H||_F
    double min_z_eigenvalue = 0;

    bool ok(double power_tol = 1e-6, double norm_tol = 1e-9, double modulus_tol = 1e-9) const {
        return power_excess <= power_tol && combiner_excess <= norm_tol &&
               modulus_error <= modulus_tol && factor_error <= 1e-9 && min_z_eigenvalue >= -1e-9;
    }
};

template <typename Real>
ConstraintResiduals constraint_residuals(const LegitimateDesign<Real>& d, double power) {
    ConstraintResiduals r;
    r.power_excess = std::max(0.0, double(d.transmit_power()) - power);
    r.combiner_excess = std::max(0.0, double(d.u.norm()) - 1.0);
    for (Eigen::Index i = 0; i < d.phi.size(); ++i) {
        r.modulus_error = std::max(r.modulus_error, std::abs(double(std::abs(d.phi(i))) - 1.0));
    }
    r.factor_error = double((d.z_cov - d.z_factor * d.z_factor.adjoint()).norm());
    if (d.z_cov.rows() > 0) {
        Eigen::SelfAdjointEigenSolver<CMatrix<Real>> eig(hermitian_part(d.z_cov), Eigen::EigenvaluesOnly);
        r.min_z_eigenvalue = double(eig.eigenvalues().minCoeff());
    }
    return r;
}

namespace detail {

// log2 |I + C^H H V V^H H^H C (C^H (s2 I + H Z H^H) C)^{-1}| evaluated as a
// difference of two Cholesky log-determinants.
template <typename Real>
Real combined_rate(const CMatrix<Real>& comb, const CMatrix<Real>& h, const CMatrix<Real>& v,
                   const CMatrix<Real>& z_cov, Real noise_var) {
    const CMatrix<Real> ch = comb.adjoint() * h;
    CMatrix<Real> noise = noise_var * (comb.adjoint() * comb);
    if (z_cov.size() > 0) noise += ch * z_cov * ch.adjoint();
    const CMatrix<Real> chv = ch * v;
    const CMatrix<Real> total = noise + chv * chv.adjoint();
    const Real nats = log_det_hpd(total, "combined signal covariance") -
                      log_det_hpd(noise, "combined interference-plus-noise covariance");
    return std::max(Real(0), log2_from_ln(nats));
}

}  // namespace detail

/// Legitimate rate with linear combiner U over the effective channel.
template <typename Real>
Real rate_rx(const CMatrix<Real>& u, const CMatrix<Real>& h_eff, const CMatrix<Real>& v,
             const CMatrix<Real>& z_cov, Real noise_var) {
    return detail::combined_rate(u, h_eff, v, z_cov, noise_var);
}

/// Eavesdropper rate with combiner W over H_E + G2 diag(psi) G1 (AN included).
template <typename Real>
Real rate_e(const CMatrix<Real>& w, const CMatrix<Real>& h_e_eff, const CMatrix<Real>& v,
            const CMatrix<Real>& z_cov, Real noise_var) {
    return detail::combined_rate(w, h_e_eff, v, z_cov, noise_var);
}

/// The rate E believes it gets: ZF precoding assumed, no AN, only the
/// cascaded link, C = W^H W.
template <typename Real>
Real rate_e_assumed(const CMatrix<Real>& w, const CMatrix<Real>& h_bar_e, const CMatrix<Real>& v_assumed,
                    Real noise_var) {
    const CMatrix<Real> c = w.adjoint() * w;
    const CMatrix<Real> g = w.adjoint() * h_bar_e * v_assumed;
    const CMatrix<Real> total = c + (g * g.adjoint()) / noise_var;
    const Real nats = log_det_hpd(total, "W^H W + signal") - log_det_hpd(c, "W^H W");
    return std::max(Real(0), log2_from_ln(nats));
}

/// log2 |I_K + s^-2 H_E Z H_E^H|.
template <typename Real>
Real rate_e1(const CMatrix<Real>& h_e, const CMatrix<Real>& z_cov, Real noise_var) {
    CMatrix<Real> x = CMatrix<Real>::Identity(h_e.rows(), h_e.rows());
    x += h_e * z_cov * h_e.adjoint() / noise_var;
    return log2_from_ln(log_det_hpd(x, "I + H_E Z H_E^H"));
}

/// log2 |I_K + s^-2 H_E (V V^H + Z) H_E^H|.
template <typename Real>
Real rate_e2(const CMatrix<Real>& h_e, const CMatrix<Real>& v, const CMatrix<Real>& z_cov, Real noise_var) {
    const CMatrix<Real> hv = h_e * v;
    CMatrix<Real> x = CMatrix<Real>::Identity(h_e.rows(), h_e.rows());
    x += (hv * hv.adjoint() + h_e * z_cov * h_e.adjoint()) / noise_var;
    return log2_from_ln(log_det_hpd(x, "I + H_E (VV^H + Z) H_E^H"));
}

/// E's rate as modelled by the BS: direct channel only, optimal combining.
template <typename Real>
Real rate_e_bs(const CMatrix<Real>& h_e, const CMatrix<Real>& v, const CMatrix<Real>& z_cov, Real noise_var) {
    const CMatrix<Real> hz = h_e * z_cov * h_e.adjoint();
    const CMatrix<Real> hv = h_e * v;
    CMatrix<Real> noise = noise_var * CMatrix<Real>::Identity(h_e.rows(), h_e.rows()) + hz;
    const CMatrix<Real> total = noise + hv * hv.adjoint();
    const Real nats = log_det_hpd(total, "E signal covariance") - log_det_hpd(noise, "E noise covariance");
    return std::max(Real(0), log2_from_ln(nats));
}

template <typename Real>
Real secrecy_rate(Real r_rx, Real r_e) {
    return std::max(Real(0), r_rx - r_e);
}

}  // namespace rispls
