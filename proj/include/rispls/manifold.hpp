#pragma once

#include "rispls/linalg.hpp"
#include "rispls/types.hpp"

#include <cmath>
#include <functional>
#include <vector>

// Riemannian conjugate gradient on the complex circle manifold
// {phi in C^L : |phi_l| = 1}. Gradients use the convention
//     g(phi + t d) = g(phi) + t Re{grad^H d} + O(t^2),
// i.e. grad = 2 dg/d(conj phi).

namespace rispls {

struct ManifoldParams {
    double init_step = 1.0;   // initial Armijo trial step
    double armijo_mu = 1e-4;  // sufficient-decrease factor
    double backtrack_nu = 0.5;
    double grad_tol = 1e-6;   // stop when ||grad_R||^2 <= grad_tol
    int max_iters = 500;
    int max_backtracks = 50;
    bool conjugate = true;    // false forces steepest descent (zeta = 0)

    void validate() const {
        if (!(init_step > 0)) throw DomainError("init_step must be positive");
        if (!(armijo_mu > 0 && armijo_mu < 1)) throw DomainError("armijo_mu must lie in (0,1)");
        if (!(backtrack_nu > 0 && backtrack_nu < 1)) throw DomainError("backtrack_nu must lie in (0,1)");
        if (!(grad_tol > 0)) throw DomainError("grad_tol must be positive");
        if (max_iters < 1 || max_backtracks < 1) throw DomainError("iteration caps must be positive");
    }
};

/// Cost function on the manifold together with its Euclidean gradient.
template <typename Real>
struct Objective {
    std::function<Real(const CVector<Real>&)> value;
    std::function<CVector<Real>(const CVector<Real>&)> euclid_grad;
};

/// Entrywise v_l / |v_l|.
template <typename Real>
CVector<Real> retract_unit(const CVector<Real>& v) {
    CVector<Real> out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const Real mag = std::abs(v(i));
        if (!(mag > Real(0))) throw DomainError("retraction undefined for a zero entry");
        out(i) = v(i) / mag;
    }
    return out;
}

/// Projection onto the tangent space at phi: r - Re{r .* conj(phi)} .* phi.
/// The same map serves as the vector transport onto phi.
template <typename Real>
CVector<Real> tangent_projection(const CVector<Real>& r, const CVector<Real>& phi) {
    const RVector<Real> radial = r.cwiseProduct(phi.conjugate()).real();
    return r - radial.template cast<std::complex<Real>>().cwiseProduct(phi);
}

template <typename Real>
CVector<Real> riemannian_grad(const CVector<Real>& euclid, const CVector<Real>& phi) {
    return tangent_projection(euclid, phi);
}

template <typename Real>
CVector<Real> transport(const CVector<Real>& r, const CVector<Real>& phi_new) {
    return tangent_projection(r, phi_new);
}

/// Polak-Ribiere coefficient with the old gradient transported onto phi_new.
template <typename Real>
Real polak_ribiere(const CVector<Real>& grad_new, const CVector<Real>& grad_old, const CVector<Real>& phi_new) {
    const Real denom = grad_old.squaredNorm();
    if (!(denom > Real(0))) return Real(0);
    const CVector<Real> diff = grad_new - transport(grad_old, phi_new);
    return grad_new.dot(diff).real() / denom;
}

template <typename Real>
struct ArmijoStep {
    Real step = 0;           // tau = init_step * nu^omega, 0 on stagnation
    int backtracks = 0;      // omega
    CVector<Real> phi_next;
    Real value_next = 0;
    Real decrease = 0;       // g(phi_next) - g(phi)
    Real bound = 0;          // mu tau Re{grad^H q}
    bool stagnated = false;
};

/// Backtracking search along q from phi with retraction inside the test.
/// `value` and `rgrad` are g(phi) and the Riemannian gradient at phi.
template <typename Real>
ArmijoStep<Real> armijo_search(const Objective<Real>& obj, const CVector<Real>& phi, Real value,
                               const CVector<Real>& rgrad, const CVector<Real>& q, const ManifoldParams& params) {
    const Real slope = rgrad.dot(q).real();
    ArmijoStep<Real> out;
    Real tau = Real(params.init_step);
    for (int omega = 0; omega <= params.max_backtracks; ++omega) {
        CVector<Real> cand = retract_unit<Real>(phi + tau * q);
        const Real cand_value = obj.value(cand);
        const Real bound = Real(params.armijo_mu) * tau * slope;
        if (cand_value - value <= bound) {
            out.step = tau;
            out.backtracks = omega;
            out.phi_next = std::move(cand);
            out.value_next = cand_value;
            out.decrease = cand_value - value;
            out.bound = bound;
            return out;
        }
        tau *= Real(params.backtrack_nu);
    }
    out.stagnated = true;
    out.phi_next = phi;
    out.value_next = value;
    out.backtracks = params.max_backtracks;
    return out;
}

template <typename Real>
ArmijoStep<Real> armijo_search(const Objective<Real>& obj, const CVector<Real>& phi, const CVector<Real>& q,
                               const ManifoldParams& params) {
    return armijo_search(obj, phi, obj.value(phi), riemannian_grad<Real>(obj.euclid_grad(phi), phi), q, params);
}

struct ManifoldTraceRow {
    int iteration = 0;
    double value = 0;
    double grad_norm = 0;
    double step = 0;
    double decrease = 0;  // accepted g(phi_n) - g(phi_{n-1})
    double bound = 0;     // Armijo right-hand side
};

template <typename Real>
struct ManifoldResult {
    CVector<Real> phi;
    Real value = 0;
    Real initial_value = 0;
    Real grad_norm_sq = 0;
    int iterations = 0;
    bool converged = false;
    bool stagnated = false;
    std::vector<ManifoldTraceRow> trace;
};

/// Minimises obj over unit-modulus vectors starting from phi0.
template <typename Real>
ManifoldResult<Real> optimize_phi(const Objective<Real>& obj, const CVector<Real>& phi0, const ManifoldParams& params,
                                  bool record_trace = false) {
    params.validate();
    require_unit_modulus(phi0, "phi0");
    ManifoldResult<Real> res;
    CVector<Real> phi = phi0;
    Real value = obj.value(phi);
    res.initial_value = value;
    CVector<Real> rgrad = riemannian_grad<Real>(obj.euclid_grad(phi), phi);
    Real gsq = rgrad.squaredNorm();
    if (record_trace) res.trace.push_back({0, double(value), std::sqrt(double(gsq)), 0, 0, 0});

    if (phi.size() == 0 || gsq <= Real(params.grad_tol)) {
        res.phi = phi;
        res.value = value;
        res.grad_norm_sq = gsq;
        res.converged = true;
        return res;
    }

    CVector<Real> q = -rgrad;
    for (int n = 1; n <= params.max_iters; ++n) {
        // restart on a non-descent direction
        if (rgrad.dot(q).real() >= Real(0)) q = -rgrad;

        auto step = armijo_search(obj, phi, value, rgrad, q, params);
        res.iterations = n;
        if (step.stagnated) {
            res.stagnated = true;
            break;
        }
        const CVector<Real> rgrad_new = riemannian_grad<Real>(obj.euclid_grad(step.phi_next), step.phi_next);
        Real zeta = params.conjugate ? polak_ribiere(rgrad_new, rgrad, step.phi_next) : Real(0);
        if (zeta < Real(0)) zeta = 0;
        q = -rgrad_new + zeta * transport(q, step.phi_next);

        phi = std::move(step.phi_next);
        value = step.value_next;
        rgrad = rgrad_new;
        gsq = rgrad.squaredNorm();
        if (record_trace) {
            res.trace.push_back({n, double(value), std::sqrt(double(gsq)), double(step.step), double(step.decrease),
                                 double(step.bound)});
        }
        if (gsq <= Real(params.grad_tol)) {
            res.converged = true;
            break;
        }
    }
    res.phi = std::move(phi);
    res.value = value;
    res.grad_norm_sq = gsq;
    return res;
}

/// A rate-type function of RIS phases,
///
///   f(phi) = log2 |N0 + C^H H(phi) Qs H(phi)^H C| - log2 |N0 + C^H H(phi) Qn H(phi)^H C|
///   H(phi) = D + B2 diag(phi) B1,
///
/// with its Euclidean gradient, derived from d ln|X| = tr(X^{-1} dX):
///   grad_l = 2 conj([B1 (Qs H^H C Xs^{-1} - Qn H^H C Xn^{-1}) C^H B2]_ll) / ln 2.
/// An empty `direct` means D = 0; an empty Qn means the second term is the
/// constant log2|N0|.
template <typename Real>
class PhaseRate {
public:
    PhaseRate(CMatrix<Real> comb, CMatrix<Real> direct, CMatrix<Real> b2, CMatrix<Real> b1, CMatrix<Real> q_signal,
              CMatrix<Real> q_noise, CMatrix<Real> base)
        : comb_(std::move(comb)),
          direct_(std::move(direct)),
          b2_(std::move(b2)),
          b1_(std::move(b1)),
          q_signal_(std::move(q_signal)),
          q_noise_(std::move(q_noise)),
          base_(std::move(base)) {
        comb_h_b2_ = comb_.adjoint() * b2_;
        if (direct_.size() > 0) comb_h_direct_ = comb_.adjoint() * direct_;
    }

    Eigen::Index size() const { return b1_.rows(); }

    CMatrix<Real> channel(const CVector<Real>& phi) const {
        CMatrix<Real> h = direct_.size() > 0 ? direct_ : CMatrix<Real>::Zero(b2_.rows(), b1_.cols());
        if (phi.size() > 0) h += b2_ * phi.asDiagonal() * b1_;
        return h;
    }

    Real value(const CVector<Real>& phi) const {
        const CMatrix<Real> y = projected(phi);
        Real nats = log_det_hpd(covariance(y, q_signal_), "signal covariance");
        nats -= q_noise_.size() > 0 ? log_det_hpd(covariance(y, q_noise_), "noise covariance")
                                    : log_det_hpd(base_, "noise covariance");
        return log2_from_ln(nats);
    }

    CVector<Real> euclid_grad(const CVector<Real>& phi) const {
        if (phi.size() == 0) return CVector<Real>();
        const CMatrix<Real> y = projected(phi);
        // Q Y^H X^{-1} = Q (X^{-1} Y)^H since X is Hermitian
        CMatrix<Real> core = q_signal_ * hpd_solve(covariance(y, q_signal_), y, "signal covariance").adjoint();
        if (q_noise_.size() > 0) {
            core -= q_noise_ * hpd_solve(covariance(y, q_noise_), y, "noise covariance").adjoint();
        }
        // diag(B1 core C^H B2)
        const CMatrix<Real> left = b1_ * core;
        const CVector<Real> d = diag_of_product(left, comb_h_b2_);
        return (Real(2) / Real(std::log(2.0))) * d.conjugate();
    }

private:
    // Y = C^H H(phi)
    CMatrix<Real> projected(const CVector<Real>& phi) const {
        CMatrix<Real> y = comb_h_direct_.size() > 0 ? comb_h_direct_ : CMatrix<Real>::Zero(comb_.cols(), b1_.cols());
        if (phi.size() > 0) y += comb_h_b2_ * phi.asDiagonal() * b1_;
        return y;
    }

    CMatrix<Real> covariance(const CMatrix<Real>& y, const CMatrix<Real>& q) const {
        return hermitian_part(base_ + y * q * y.adjoint());
    }

    CMatrix<Real> comb_, direct_, b2_, b1_, q_signal_, q_noise_, base_;
    CMatrix<Real> comb_h_b2_, comb_h_direct_;
};

/// Objective g = -f for minimisation.
template <typename Real>
Objective<Real> negated(const PhaseRate<Real>& rate) {
    return {[rate](const CVector<Real>& p) { return -rate.value(p); },
            [rate](const CVector<Real>& p) { return CVector<Real>(-rate.euclid_grad(p)); }};
}

}  // namespace rispls
