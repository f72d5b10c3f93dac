#pragma once

#include "rispls/config.hpp"
#include "rispls/linalg.hpp"
#include "rispls/rng.hpp"
#include "rispls/types.hpp"

#include <cmath>
#include <cstdint>

namespace rispls {

/// One frequency-flat fading realisation of every link in the deployment.
template <typename Real>
struct ChannelSet {
    CMatrix<Real> h;    // M x N      BS -> RX
    CMatrix<Real> h1;   // L x N      BS -> legitimate RIS
    CMatrix<Real> h2;   // M x L      legitimate RIS -> RX
    CMatrix<Real> h_e;  // K x N      BS -> E
    CMatrix<Real> g1;   // Lambda x N BS -> eavesdropping RIS
    CMatrix<Real> g2;   // K x Lambda eavesdropping RIS -> E

    Eigen::Index n_bs() const { return h.cols(); }
    Eigen::Index m_rx() const { return h.rows(); }
    Eigen::Index k_e() const { return h_e.rows(); }
    Eigen::Index l_ris() const { return h1.rows(); }
    Eigen::Index lambda_ris() const { return g1.rows(); }

    template <typename Other>
    ChannelSet<Other> cast() const {
        using S = std::complex<Other>;
        return {h.template cast<S>(),   h1.template cast<S>(), h2.template cast<S>(),
                h_e.template cast<S>(), g1.template cast<S>(), g2.template cast<S>()};
    }
};

/// i.i.d. CN(0, variance) entries: real and imaginary parts each N(0, variance/2).
template <typename Real = double>
CMatrix<Real> complex_gaussian(Eigen::Index rows, Eigen::Index cols, double variance, Rng& rng) {
    const double sd = std::sqrt(variance / 2.0);
    CMatrix<Real> out(rows, cols);
    // column-major fill order is part of the reproducibility contract
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = rng.normal();
            const double im = rng.normal();
            out(r, c) = {Real(sd * re), Real(sd * im)};
        }
    }
    return out;
}

template <typename Real = double>
CVector<Real> random_phases(Eigen::Index n, Rng& rng) {
    CVector<Real> out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = std::polar(Real(1), Real(rng.phase()));
    return out;
}

/// Rayleigh fading with per-link pathloss: every entry of link l is
/// CN(0, pathloss_gain(d_l, exponent)). Each link draws from its own stream.
template <typename Real = double>
ChannelSet<Real> sample_channels(const SystemConfig& config, const Geometry& geometry,
                                 std::uint64_t seed) {
    config.validate();
    const auto dist = link_distances(geometry);
    auto draw = [&](Link link, int rows, int cols) {
        Rng rng(derive_seed(seed, {kChannelStream, static_cast<std::uint64_t>(link)}));
        return complex_gaussian<Real>(rows, cols, pathloss_gain(dist[link], config.pathloss_exp), rng);
    };
    const int n = config.n_bs, m = config.m_rx, k = config.k_e;
    const int l = config.l_ris, lam = config.lambda_ris;
    ChannelSet<Real> out;
    out.h = draw(Link::BsRx, m, n);
    out.h1 = draw(Link::BsRisLegit, l, n);
    out.h2 = draw(Link::RisLegitRx, m, l);
    out.h_e = draw(Link::BsE, k, n);
    out.g1 = draw(Link::BsRisEaves, lam, n);
    out.g2 = draw(Link::RisEavesE, k, lam);
    return out;
}

/// B2 diag(phases) B1, the reflected part of a RIS-assisted link.
template <typename Real>
CMatrix<Real> cascaded(const CMatrix<Real>& b2, const CVector<Real>& phases, const CMatrix<Real>& b1) {
    if (b2.cols() != phases.size() || b1.rows() != phases.size()) {
        throw DomainError("RIS dimensions do not match phase vector");
    }
    if (phases.size() == 0) return CMatrix<Real>::Zero(b2.rows(), b1.cols());
    return b2 * phases.asDiagonal() * b1;
}

/// G2 diag(psi) G1.
template <typename Real>
CMatrix<Real> cascaded_eavesdrop(const CMatrix<Real>& g2, const CVector<Real>& psi, const CMatrix<Real>& g1) {
    require_unit_modulus(psi, "psi");
    return cascaded(g2, psi, g1);
}

/// H + H2 diag(phi) H1.
template <typename Real>
CMatrix<Real> effective_legitimate(const CMatrix<Real>& h, const CMatrix<Real>& h2,
                                   const CVector<Real>& phi, const CMatrix<Real>& h1) {
    require_unit_modulus(phi, "phi");
    if (phi.size() == 0) return h;
    return h + cascaded(h2, phi, h1);
}

/// H_E + G2 diag(psi) G1.
template <typename Real>
CMatrix<Real> effective_eavesdrop(const CMatrix<Real>& h_e, const CMatrix<Real>& g2,
                                  const CVector<Real>& psi, const CMatrix<Real>& g1) {
    require_unit_modulus(psi, "psi");
    if (psi.size() == 0) return h_e;
    return h_e + cascaded(g2, psi, g1);
}

}  // namespace rispls
