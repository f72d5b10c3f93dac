#pragma once

#include "rispls/channel.hpp"
#include "rispls/config.hpp"
#include "rispls/manifold.hpp"
#include "rispls/rates.hpp"
#include "rispls/rng.hpp"
#include "rispls/transceiver.hpp"
#include "rispls/types.hpp"
#include "rispls/wmmse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Legitimate-side alternating optimisation. For each candidate stream count
// the blocks are updated in the order: auxiliaries (A1, A2, S1, S2, S3), U,
// (V, Z~), phi. The believed secrecy R_RX - R_E(bs) is non-decreasing along
// the iterations; the best stream count wins.

namespace rispls {

struct AoParams {
    double rel_tol = 1e-4;
    int max_inner_iters = 100;
    ManifoldParams manifold;
    int nd_min = 1;
    int nd_max = 0;  // 0 = min(M, N)
};

struct AoTraceRow {
    int iteration = 0;
    int n_d = 0;
    double surrogate = 0;    // believed secrecy after the iteration
    double power_excess = 0;
    double combiner_excess = 0;
    double modulus_error = 0;
};

template <typename Real>
struct AoResult {
    LegitimateDesign<Real> design;
    std::vector<AoTraceRow> trace;
    Real objective = 0;  // believed secrecy of `design`
    int iterations = 0;
    bool converged = false;
};

template <typename Real>
struct SolveResult {
    LegitimateDesign<Real> design;
    Real objective = 0;
    int inner_iterations = 0;                  // of the selected candidate
    std::vector<std::optional<Real>> per_m;    // objective per candidate, nullopt on failure
    std::vector<std::string> failures;
    std::vector<AoTraceRow> trace;             // all candidates, in order
};

/// Feasible starting point: random RIS phases, V along the dominant right
/// singular vectors of the resulting effective channel with power P/2, random
/// AN factor with power P/2, U along the dominant left singular vectors.
template <typename Real>
LegitimateDesign<Real> init_design(const ChannelSet<Real>& ch, const SystemConfig& config, int n_d, std::uint64_t seed,
                                   bool with_ris = true) {
    const Eigen::Index n = ch.n_bs(), m = ch.m_rx();
    if (n_d < 1 || n_d > std::min(n, m)) throw DomainError("n_d must lie in [1, min(M, N)]");
    const Real power = Real(config.power);
    LegitimateDesign<Real> d;
    d.n_d = n_d;
    if (with_ris && ch.l_ris() > 0) {
        Rng rng(derive_seed(seed, {kInitStream, std::uint64_t(n_d), 0}));
        d.phi = random_phases<Real>(ch.l_ris(), rng);
    }
    const CMatrix<Real> h_eff = legitimate_channel(ch, d.phi);
    Eigen::JacobiSVD<CMatrix<Real>> svd(h_eff, Eigen::ComputeFullU | Eigen::ComputeFullV);
    d.v = svd.matrixV().leftCols(n_d) * std::sqrt(power / (2 * Real(n_d)));
    d.u = svd.matrixU().leftCols(n_d) / std::sqrt(Real(n_d));
    Rng rng(derive_seed(seed, {kInitStream, std::uint64_t(n_d), 1}));
    CMatrix<Real> z = complex_gaussian<Real>(n, n, 1.0, rng);
    const Real zn = z.squaredNorm();
    z *= (zn > Real(0) && power > Real(0)) ? std::sqrt(power / (2 * zn)) : Real(0);
    d.set_z_factor(std::move(z));
    return d;
}

/// Believed secrecy objective of a design.
template <typename Real>
Real legitimate_objective(const ChannelSet<Real>& ch, const LegitimateDesign<Real>& d, Real noise_var) {
    return believed_secrecy(d, legitimate_channel(ch, d.phi), ch.h_e, noise_var);
}

/// R_RX as a function of the legitimate RIS phases with U, V, Z fixed.
template <typename Real>
PhaseRate<Real> legitimate_phase_rate(const ChannelSet<Real>& ch, const LegitimateDesign<Real>& d, Real noise_var) {
    const CMatrix<Real> vv = d.v * d.v.adjoint();
    return PhaseRate<Real>(d.u, ch.h, ch.h2, ch.h1, hermitian_part(vv + d.z_cov), d.z_cov,
                           hermitian_part(noise_var * (d.u.adjoint() * d.u)));
}

/// Euclidean gradient of g = -R_RX with respect to the legitimate RIS phases
/// (U, V, Z~ held fixed).
template <typename Real>
CVector<Real> euclid_grad_secrecy_phi(const LegitimateDesign<Real>& d, const ChannelSet<Real>& ch, Real noise_var) {
    return -legitimate_phase_rate(ch, d, noise_var).euclid_grad(d.phi);
}

/// Inner AO loop for a fixed number of streams.
template <typename Real>
AoResult<Real> ao_inner(const ChannelSet<Real>& ch, const SystemConfig& config, int n_d, LegitimateDesign<Real> d,
                        const AoParams& params, bool with_ris = true) {
    if (d.n_d != n_d) throw DomainError("ao_inner: design stream count mismatch");
    const Real noise = Real(config.noise_var);
    const Real power = Real(config.power);
    const bool ris = with_ris && d.phi.size() > 0;
    if (!with_ris) d.phi = CVector<Real>();

    AoResult<Real> out;
    CMatrix<Real> h_eff = legitimate_channel(ch, d.phi);
    Real prev = believed_secrecy(d, h_eff, ch.h_e, noise);
    {
        const auto res = constraint_residuals(d, double(power));
        out.trace.push_back({0, n_d, double(prev), res.power_excess, res.combiner_excess, res.modulus_error});
    }
    for (int p = 1; p <= params.max_inner_iters; ++p) {
        try {
            const AuxiliaryState<Real> st = update_auxiliaries(d, h_eff, ch.h_e, noise);

            // U: the block objective is flat when J = 0, keep the current combiner
            const CMatrix<Real> u = update_u(h_eff, d.v, d.z_factor, st.a1, st.s1, noise, n_d);
            if (u.norm() > Real(0)) d.u = u;

            auto [v, z] = update_v_z(h_eff, ch.h_e, d.u, st, noise, power);
            d.v = std::move(v);
            d.set_z_factor(std::move(z));

            if (ris) {
                const auto rate = legitimate_phase_rate(ch, d, noise);
                d.phi = optimize_phi(negated(rate), d.phi, params.manifold).phi;
                h_eff = legitimate_channel(ch, d.phi);
            }
        } catch (const Error& e) {
            throw Error("AO iteration " + std::to_string(p) + " (n_d=" + std::to_string(n_d) + "): " + e.what());
        }

        const Real cur = believed_secrecy(d, h_eff, ch.h_e, noise);
        const auto res = constraint_residuals(d, double(power));
        out.trace.push_back({p, n_d, double(cur), res.power_excess, res.combiner_excess, res.modulus_error});
        out.iterations = p;
        const Real change = std::abs(cur - prev);
        prev = cur;
        if (cur == Real(0) ? change <= Real(params.rel_tol) : change / std::abs(cur) <= Real(params.rel_tol)) {
            out.converged = true;
            break;
        }
    }
    out.objective = prev;
    out.design = std::move(d);
    return out;
}

namespace detail {

template <typename Real>
SolveResult<Real> solve_over_streams(const ChannelSet<Real>& ch, const SystemConfig& config, const AoParams& params,
                                     std::uint64_t seed, bool with_ris) {
    const int cap = int(std::min(ch.n_bs(), ch.m_rx()));
    const int lo = std::max(1, params.nd_min);
    const int hi = params.nd_max > 0 ? std::min(params.nd_max, cap) : cap;
    if (lo > hi) throw DomainError("empty stream-count range");
    SolveResult<Real> out;
    bool have = false;
    for (int m = lo; m <= hi; ++m) {
        try {
            auto res = ao_inner(ch, config, m, init_design(ch, config, m, seed, with_ris), params, with_ris);
            // re-evaluate with the final variables
            const Real obj = legitimate_objective(ch, res.design, Real(config.noise_var));
            out.per_m.push_back(obj);
            out.trace.insert(out.trace.end(), res.trace.begin(), res.trace.end());
            if (!have || obj > out.objective) {
                out.objective = obj;
                out.design = std::move(res.design);
                out.inner_iterations = res.iterations;
                have = true;
            }
        } catch (const Error& e) {
            out.per_m.push_back(std::nullopt);
            out.failures.emplace_back(e.what());
        }
    }
    if (!have) throw Error("every stream-count candidate failed: " + out.failures.front());
    return out;
}

}  // namespace detail

/// Full legitimate design with a legitimate RIS: exhaustive search over N_d.
template <typename Real>
SolveResult<Real> solve_op_l(const ChannelSet<Real>& ch, const SystemConfig& config, const AoParams& params,
                             std::uint64_t seed) {
    if (ch.l_ris() < 1) throw DomainError("solve_op_l needs a legitimate RIS (L >= 1)");
    return detail::solve_over_streams(ch, config, params, seed, true);
}

/// Same design without a legitimate RIS: H~ = H and no phase block.
template <typename Real>
SolveResult<Real> solve_no_ris(const ChannelSet<Real>& ch, const SystemConfig& config, const AoParams& params,
                               std::uint64_t seed) {
    return detail::solve_over_streams(ch, config, params, seed, false);
}

}  // namespace rispls
