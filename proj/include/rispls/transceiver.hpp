#pragma once

#include "rispls/linalg.hpp"
#include "rispls/types.hpp"
#include "rispls/wmmse.hpp"

#include <cmath>
#include <utility>

// Block updates of the RX combiner U and the precoder/AN pair (V, Z~). Both are
// convex quadratic programs with a single norm constraint; the stationarity
// conditions are linear in the block and the multiplier is found by bisection
// on a monotone secular equation.

namespace rispls {

struct BisectionOptions {
    double tol = 1e-12;      // relative bracket width at which bisection stops
    int max_doublings = 200;
    int max_bisections = 200;
};

namespace detail {

// Smallest x >= 0 with f(x) <= target for a strictly decreasing f; returns the
// upper end of the final bracket so the associated constraint is never violated.
template <typename Real, typename F>
Real solve_decreasing(F&& f, Real target, const BisectionOptions& opt, const char* what) {
    if (f(Real(0)) <= target) return Real(0);
    Real lo = 0, hi = 1;
    int doublings = 0;
    while (f(hi) > target) {
        lo = hi;
        hi *= 2;
        if (++doublings > opt.max_doublings) throw ConvergenceError(std::string(what) + ": no upper bracket");
    }
    for (int it = 0; it < opt.max_bisections; ++it) {
        const Real mid = lo + (hi - lo) / 2;
        if (!(mid > lo && mid < hi) || (hi - lo) <= Real(opt.tol) * std::max(Real(1), hi)) return hi;
        if (f(mid) > target) lo = mid;
        else hi = mid;
    }
    throw ConvergenceError(std::string(what) + ": bisection did not converge");
}

// Eigenvalues below this fraction of the largest are treated as zero when the
// multiplier is zero (minimum-norm solution on the range space).
inline constexpr double kRangeTol = 1e-12;

template <typename Real>
Real spectral_sum(const RVector<Real>& eig, const RVector<Real>& weight, Real shift) {
    const Real scale = eig.size() ? eig.cwiseAbs().maxCoeff() : Real(0);
    Real sum = 0;
    for (Eigen::Index p = 0; p < eig.size(); ++p) {
        const Real den = eig(p) + shift;
        if (den <= Real(kRangeTol) * scale || den <= Real(0)) continue;
        sum += weight(p) / (den * den);
    }
    return sum;
}

template <typename Real>
RVector<Real> spectral_inverse(const RVector<Real>& eig, Real shift) {
    const Real scale = eig.size() ? eig.cwiseAbs().maxCoeff() : Real(0);
    RVector<Real> inv(eig.size());
    for (Eigen::Index p = 0; p < eig.size(); ++p) {
        const Real den = eig(p) + shift;
        inv(p) = (den <= Real(kRangeTol) * scale || den <= Real(0)) ? Real(0) : Real(1) / den;
    }
    return inv;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Combiner U:  E U F + kappa U = J,  ||U||_F^2 <= 1
// ---------------------------------------------------------------------------

template <typename Real>
struct CombinerSubproblem {
    CMatrix<Real> e_mat;  // M x M, s2 I + H V V^H H^H + H Z~ Z~^H H^H
    CMatrix<Real> f_mat;  // N_d x N_d, A1 S1 A1^H
    CMatrix<Real> j_mat;  // M x N_d, H V S1 A1^H
};

template <typename Real>
CombinerSubproblem<Real> make_combiner_subproblem(const CMatrix<Real>& h_eff, const CMatrix<Real>& v,
                                                  const CMatrix<Real>& z_factor, const CMatrix<Real>& a1,
                                                  const CMatrix<Real>& s1, Real noise_var) {
    CombinerSubproblem<Real> sub;
    const CMatrix<Real> hv = h_eff * v;
    const CMatrix<Real> hz = h_eff * z_factor;
    sub.e_mat = hv * hv.adjoint() + hz * hz.adjoint();
    sub.e_mat.diagonal().array() += noise_var;
    sub.e_mat = hermitian_part(sub.e_mat);
    sub.f_mat = hermitian_part(a1 * s1 * a1.adjoint());
    sub.j_mat = hv * s1 * a1.adjoint();
    return sub;
}

/// Eigen-structure of F^T (x) E with the projected right-hand side, i.e. the
/// ingredients of the secular equation sum_p Qt_pp / (Xi_p + kappa)^2.
template <typename Real>
struct CombinerSpectrum {
    RVector<Real> xi;       // eigenvalues of F^T (x) E
    CMatrix<Real> q;        // eigenvectors
    CVector<Real> q_vec_j;  // Q^H vec(J)
    RVector<Real> q_tilde;  // diag(Q^H vec(J) vec(J)^H Q)

    explicit CombinerSpectrum(const CombinerSubproblem<Real>& sub) {
        const CMatrix<Real> big = hermitian_part(kron(CMatrix<Real>(sub.f_mat.transpose()), sub.e_mat));
        Eigen::SelfAdjointEigenSolver<CMatrix<Real>> eig(big);
        xi = eig.eigenvalues();
        q = eig.eigenvectors();
        q_vec_j = q.adjoint() * vec(sub.j_mat);
        q_tilde = q_vec_j.cwiseAbs2();
    }

    /// ||U(kappa)||_F^2.
    Real lhs(Real kappa) const { return detail::spectral_sum(xi, q_tilde, kappa); }

    CMatrix<Real> combiner(Real kappa, Eigen::Index m, Eigen::Index nd) const {
        const CVector<Real> scaled = detail::spectral_inverse(xi, kappa).template cast<std::complex<Real>>().cwiseProduct(q_vec_j);
        return unvec(q * scaled, m, nd);
    }
};

/// Multiplier of the combiner norm constraint: the root of
/// sum_p Qt_pp / (Xi_p + kappa)^2 = target, or 0 when the constraint is slack.
/// target = 1 is the unit Frobenius ball.
template <typename Real>
Real solve_kappa(const CombinerSubproblem<Real>& sub, Real target = Real(1), const BisectionOptions& opt = {}) {
    const CombinerSpectrum<Real> spec(sub);
    return detail::solve_decreasing<Real>([&](Real k) { return spec.lhs(k); }, target, opt, "solve_kappa");
}

/// Minimiser of the combiner block for a given subproblem. J = 0 gives U = 0;
/// F = 0 reduces the system to kappa U = J on the unit sphere.
template <typename Real>
CMatrix<Real> solve_combiner(const CombinerSubproblem<Real>& sub, Real* kappa_out = nullptr,
                             const BisectionOptions& opt = {}) {
    const Eigen::Index m = sub.e_mat.rows(), nd = sub.f_mat.rows();
    if (sub.j_mat.norm() == Real(0)) {
        if (kappa_out) *kappa_out = 0;
        return CMatrix<Real>::Zero(m, nd);
    }
    if (sub.f_mat.norm() == Real(0)) {
        if (kappa_out) *kappa_out = sub.j_mat.norm();
        return sub.j_mat / sub.j_mat.norm();
    }
    const CombinerSpectrum<Real> spec(sub);
    const Real kappa = detail::solve_decreasing<Real>([&](Real k) { return spec.lhs(k); }, Real(1), opt,
                                                      "combiner multiplier");
    if (kappa_out) *kappa_out = kappa;
    return spec.combiner(kappa, m, nd);
}

/// Optimal combiner for fixed (V, Z~, A1, S1). `kappa_out`, when given,
/// receives the multiplier.
template <typename Real>
CMatrix<Real> update_u(const CMatrix<Real>& h_eff, const CMatrix<Real>& v, const CMatrix<Real>& z_factor,
                       const CMatrix<Real>& a1, const CMatrix<Real>& s1, Real noise_var, int n_d,
                       Real* kappa_out = nullptr, const BisectionOptions& opt = {}) {
    if (v.cols() != n_d || a1.rows() != n_d) throw DomainError("update_u: stream count mismatch");
    return solve_combiner(make_combiner_subproblem(h_eff, v, z_factor, a1, s1, noise_var), kappa_out, opt);
}

// ---------------------------------------------------------------------------
// Precoder and AN factor:  (lambda I + R_V1) V = R_V2,
//                          (lambda I + R_Z1) Z~ = R_Z2,
//                          tr(V V^H) + tr(Z~ Z~^H) <= P
// ---------------------------------------------------------------------------

template <typename Real>
struct PrecoderSubproblem {
    CMatrix<Real> gram_k;  // H^H U A1 S1 A1^H U^H H
    CMatrix<Real> r_v1;
    CMatrix<Real> r_v2;
    CMatrix<Real> r_z1;
    CMatrix<Real> r_z2;
};

template <typename Real>
PrecoderSubproblem<Real> make_precoder_subproblem(const CMatrix<Real>& h_eff, const CMatrix<Real>& h_e,
                                                  const CMatrix<Real>& u, const AuxiliaryState<Real>& st,
                                                  Real noise_var) {
    PrecoderSubproblem<Real> sub;
    const CMatrix<Real> hua = h_eff.adjoint() * u * st.a1;
    sub.gram_k = hermitian_part(hua * st.s1 * hua.adjoint());
    const CMatrix<Real> eve = hermitian_part(h_e.adjoint() * st.s3 * h_e) / noise_var;
    sub.r_v1 = hermitian_part(sub.gram_k + eve);
    sub.r_v2 = hua * st.s1;
    const CMatrix<Real> ha = h_e.adjoint() * st.a2;
    sub.r_z1 = hermitian_part(sub.gram_k + ha * st.s2 * ha.adjoint() + eve);
    sub.r_z2 = ha * st.s2;
    return sub;
}

template <typename Real>
struct PrecoderSpectrum {
    RVector<Real> lambda_v, lambda_z;
    CMatrix<Real> p_v, p_z;
    CMatrix<Real> proj_v, proj_z;  // P^H R_2
    RVector<Real> pt_v, pt_z;      // diag(P^H R_2 R_2^H P)

    explicit PrecoderSpectrum(const PrecoderSubproblem<Real>& sub) {
        Eigen::SelfAdjointEigenSolver<CMatrix<Real>> ev(sub.r_v1);
        lambda_v = ev.eigenvalues();
        p_v = ev.eigenvectors();
        proj_v = p_v.adjoint() * sub.r_v2;
        pt_v = proj_v.rowwise().squaredNorm();
        Eigen::SelfAdjointEigenSolver<CMatrix<Real>> ez(sub.r_z1);
        lambda_z = ez.eigenvalues();
        p_z = ez.eigenvectors();
        proj_z = p_z.adjoint() * sub.r_z2;
        pt_z = proj_z.rowwise().squaredNorm();
    }

    /// tr(V V^H) + tr(Z~ Z~^H) at multiplier lambda.
    Real power(Real lambda) const {
        return detail::spectral_sum(lambda_v, pt_v, lambda) + detail::spectral_sum(lambda_z, pt_z, lambda);
    }

    CMatrix<Real> precoder(Real lambda) const {
        return p_v * (detail::spectral_inverse(lambda_v, lambda).template cast<std::complex<Real>>().asDiagonal() * proj_v);
    }

    CMatrix<Real> an_factor(Real lambda) const {
        return p_z * (detail::spectral_inverse(lambda_z, lambda).template cast<std::complex<Real>>().asDiagonal() * proj_z);
    }
};

/// Multiplier of the joint power constraint.
template <typename Real>
Real solve_lambda(const PrecoderSubproblem<Real>& sub, Real power, const BisectionOptions& opt = {}) {
    const PrecoderSpectrum<Real> spec(sub);
    if (!(power > Real(0))) {
        if (spec.power(Real(0)) <= Real(0)) return Real(0);
        throw DomainError("solve_lambda: zero power budget with non-zero stationarity target");
    }
    return detail::solve_decreasing<Real>([&](Real l) { return spec.power(l); }, power, opt, "solve_lambda");
}

/// Minimiser of the precoder/AN block for a given subproblem.
template <typename Real>
std::pair<CMatrix<Real>, CMatrix<Real>> solve_precoder(const PrecoderSubproblem<Real>& sub, Real power,
                                                       Real* lambda_out = nullptr, const BisectionOptions& opt = {}) {
    const Eigen::Index n = sub.r_v1.rows();
    if (!(power > Real(0))) {
        if (lambda_out) *lambda_out = 0;
        return {CMatrix<Real>::Zero(n, sub.r_v2.cols()), CMatrix<Real>::Zero(n, sub.r_z2.cols())};
    }
    const PrecoderSpectrum<Real> spec(sub);
    const Real lambda =
        detail::solve_decreasing<Real>([&](Real l) { return spec.power(l); }, power, opt, "power multiplier");
    if (lambda_out) *lambda_out = lambda;
    return {spec.precoder(lambda), spec.an_factor(lambda)};
}

/// Optimal (V, Z~) for fixed U and auxiliaries.
template <typename Real>
std::pair<CMatrix<Real>, CMatrix<Real>> update_v_z(const CMatrix<Real>& h_eff, const CMatrix<Real>& h_e,
                                                   const CMatrix<Real>& u, const AuxiliaryState<Real>& st,
                                                   Real noise_var, Real power, Real* lambda_out = nullptr,
                                                   const BisectionOptions& opt = {}) {
    return solve_precoder(make_precoder_subproblem(h_eff, h_e, u, st, noise_var), power, lambda_out, opt);
}

}  // namespace rispls
