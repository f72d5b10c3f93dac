#include "rispls/driver.hpp"
#include "rispls/manifold.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

using namespace rispls;
using oracle::CMat;
using oracle::CVec;
using cd = std::complex<double>;

namespace {

CVec vec1(cd x) {
    CVec v(1);
    v(0) = x;
    return v;
}

// g = -Re{c^H phi}, minimised by phi = c
Objective<double> linear_objective(const CVec& c) {
    return {[c](const CVec& p) { return -c.dot(p).real(); }, [c](const CVec&) { return CVec(-c); }};
}

// g = ||phi - t||^2
Objective<double> distance_objective(const CVec& t) {
    return {[t](const CVec& p) { return (p - t).squaredNorm(); }, [t](const CVec& p) { return CVec(2.0 * (p - t)); }};
}

double tangent_violation(const CVec& r, const CVec& phi) {
    return r.cwiseProduct(phi.conjugate()).real().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("retraction") {
    CHECK(std::abs(retract_unit<double>(vec1(cd(3, 4)))(0) - cd(0.6, 0.8)) < 1e-15);
    CVec v(2);
    v << cd(2, 0), cd(0, -2);
    const CVec r = retract_unit<double>(v);
    CHECK(std::abs(r(0) - 1.0) < 1e-15);
    CHECK(std::abs(r(1) - cd(0, -1)) < 1e-15);
    Rng rng(1);
    const CVec u = oracle::random_unit(5, rng);
    CHECK((retract_unit<double>(u) - u).norm() < 1e-15);
    CHECK_THROWS_AS(retract_unit<double>(vec1(0)), DomainError);
}

TEST_CASE("tangent projection and transport") {
    CHECK(std::abs(riemannian_grad<double>(vec1(cd(0, 1)), vec1(1))(0) - cd(0, 1)) < 1e-15);
    CHECK(std::abs(riemannian_grad<double>(vec1(1), vec1(1))(0)) < 1e-15);
    CHECK(std::abs(transport<double>(vec1(1), vec1(1))(0)) < 1e-15);
    // r = 1+i at phi = i: Re{(1+i)(-i)} = 1, so T(r) = 1+i - i = 1
    CHECK(std::abs(transport<double>(vec1(cd(1, 1)), vec1(cd(0, 1)))(0) - cd(1, 0)) < 1e-15);
    Rng rng(2);
    for (int t = 0; t < 10; ++t) {
        const CVec phi = oracle::random_unit(6, rng);
        const CVec r = oracle::random_matrix(6, 1, rng);
        const CVec once = riemannian_grad<double>(r, phi);
        CHECK((riemannian_grad<double>(once, phi) - once).norm() < 1e-14);
        CHECK(tangent_violation(transport<double>(r, phi), phi) < 1e-12);
        CHECK((transport<double>(once, phi) - once).norm() < 1e-14);
    }
}

TEST_CASE("Polak-Ribiere coefficient") {
    CHECK(polak_ribiere<double>(vec1(cd(0, 2)), vec1(cd(0, 1)), vec1(1)) == doctest::Approx(2.0));
    CHECK(polak_ribiere<double>(vec1(cd(0, 2)), vec1(0), vec1(1)) == 0.0);
    Rng rng(3);
    const CVec phi = oracle::random_unit(4, rng);
    const CVec g = riemannian_grad<double>(CVec(oracle::random_matrix(4, 1, rng)), phi);
    CHECK(std::abs(polak_ribiere<double>(g, g, phi)) < 1e-14);
    // orthogonal tangent vectors: zeta = ||g_new||^2 / ||g_old||^2
    CVec a = CVec::Zero(4), b = CVec::Zero(4);
    CVec ones = CVec::Ones(4);
    a(0) = cd(0, 1);
    b(1) = cd(0, 3);
    CHECK(polak_ribiere<double>(b, a, ones) == doctest::Approx(9.0));
}

TEST_CASE("Armijo search") {
    Rng rng(4);
    const CVec t = oracle::random_unit(3, rng);
    const CVec phi = oracle::random_unit(3, rng);
    const auto obj = distance_objective(t);
    ManifoldParams params;
    params.init_step = 0.1;
    const CVec rg = riemannian_grad<double>(obj.euclid_grad(phi), phi);
    const auto step = armijo_search(obj, phi, CVec(-rg), params);
    CHECK(step.step == doctest::Approx(0.1));
    CHECK(step.backtracks == 0);
    CHECK(is_unit_modulus(step.phi_next, 1e-12));
    CHECK(step.value_next < obj.value(phi));

    const auto still = armijo_search(obj, phi, CVec(CVec::Zero(3)), params);
    CHECK(still.backtracks == 0);
    CHECK((still.phi_next - phi).norm() < 1e-15);

    // ascent direction: falls through to stagnation
    ManifoldParams few;
    few.max_backtracks = 5;
    const auto bad = armijo_search(obj, phi, rg, few);
    CHECK(bad.stagnated);
    CHECK(bad.step == 0.0);
    CHECK((bad.phi_next - phi).norm() == 0.0);
}

TEST_CASE("linear objective reaches the closed-form optimum") {
    Rng rng(5);
    for (int t = 0; t < 5; ++t) {
        const CVec c = oracle::random_unit(8, rng);
        const auto res = optimize_phi(linear_objective(c), oracle::random_unit(8, rng), ManifoldParams{}, true);
        CHECK(res.value - (-8.0) < 1e-6);
        CHECK(res.converged);
        for (std::size_t i = 1; i < res.trace.size(); ++i) {
            CHECK(res.trace[i].decrease <= res.trace[i].bound);
            CHECK(res.trace[i].value <= res.trace[i - 1].value);
        }
    }
}

TEST_CASE("stationary start returns immediately") {
    Rng rng(6);
    const CVec c = oracle::random_unit(4, rng);
    const auto res = optimize_phi(linear_objective(c), c, ManifoldParams{});
    CHECK(res.iterations == 0);
    CHECK(res.converged);
    CHECK((res.phi - c).norm() == 0.0);
    CVec off = c;
    off(0) *= 1.5;
    CHECK_THROWS_AS(optimize_phi(linear_objective(c), off, ManifoldParams{}), ConstraintViolation);
}

TEST_CASE("parameter validation") {
    ManifoldParams p;
    p.armijo_mu = 1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = ManifoldParams{};
    p.backtrack_nu = 0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = ManifoldParams{};
    p.grad_tol = 0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

namespace {

struct PhaseCase {
    ChannelSet<double> ch;
    LegitimateDesign<double> d;
    double s2 = 1.0;
};

PhaseCase phase_case(Rng& rng, int l) {
    const testinst::Dims dims{4, 2, 2, l, 0, 2};
    PhaseCase c;
    c.ch = testinst::channels(dims, rng);
    c.d = testinst::design(dims, rng, 3.0);
    c.s2 = 0.5 + rng.uniform();
    return c;
}

double oracle_g(const PhaseCase& c, const CVec& phi) {
    return -oracle::rate(c.d.u, oracle::effective(c.ch.h, c.ch.h2, phi, c.ch.h1), c.d.v, c.d.z_cov, c.s2);
}

}  // namespace

TEST_CASE("phase gradient matches finite differences") {
    Rng rng(7);
    for (int l : {1, 4, 8}) {
        for (int t = 0; t < 5; ++t) {
            const auto c = phase_case(rng, l);
            const CVec g = euclid_grad_secrecy_phi(c.d, c.ch, c.s2);
            const CVec fd = oracle::fd_gradient([&](const CVec& p) { return oracle_g(c, p); }, c.d.phi);
            CHECK((g - fd).norm() <= 1e-5 * std::max(1e-3, fd.norm()));
            // phase derivatives: d/dt g(phi_l e^{it}) = Re{conj(grad_l) i phi_l}
            const Eigen::VectorXd dp =
                oracle::fd_phase_derivative([&](const CVec& p) { return oracle_g(c, p); }, c.d.phi);
            for (int i = 0; i < l; ++i) {
                const double pred = (std::conj(g(i)) * cd(0, 1) * c.d.phi(i)).real();
                CHECK(std::abs(pred - dp(i)) <= 1e-5 * std::max(1e-3, dp.norm()));
            }
            CHECK(legitimate_phase_rate(c.ch, c.d, c.s2).value(c.d.phi) ==
                  doctest::Approx(-oracle_g(c, c.d.phi)).epsilon(1e-10));
        }
    }
}

TEST_CASE("phase gradient vanishes without a reflected path") {
    Rng rng(8);
    auto c = phase_case(rng, 3);
    c.ch.h2.setZero();
    CHECK(euclid_grad_secrecy_phi(c.d, c.ch, c.s2).norm() == 0.0);
    auto c2 = phase_case(rng, 3);
    c2.ch.h1.setZero();
    CHECK(euclid_grad_secrecy_phi(c2.d, c2.ch, c2.s2).norm() == 0.0);
}

TEST_CASE("Euclidean gradient need not be tangent") {
    Rng rng(9);
    const auto c = phase_case(rng, 4);
    const CVec g = euclid_grad_secrecy_phi(c.d, c.ch, c.s2);
    CHECK(tangent_violation(g, c.d.phi) > 1e-8);
    CHECK(tangent_violation(riemannian_grad<double>(g, c.d.phi), c.d.phi) < 1e-12);
}

TEST_CASE("iterates stay feasible and decrease the rate objective") {
    Rng rng(10);
    for (bool conj : {true, false}) {
        const auto c = phase_case(rng, 6);
        ManifoldParams params;
        params.conjugate = conj;
        const auto rate = legitimate_phase_rate(c.ch, c.d, c.s2);
        // record every iterate through the value callback
        std::vector<CVec> seen;
        Objective<double> obj = negated(rate);
        auto inner = obj.value;
        obj.value = [&seen, inner](const CVec& p) {
            seen.push_back(p);
            return inner(p);
        };
        const auto res = optimize_phi(obj, c.d.phi, params, true);
        for (const auto& p : seen) CHECK(is_unit_modulus(p, 1e-12));
        CHECK(res.value <= res.initial_value);
        for (std::size_t i = 1; i < res.trace.size(); ++i) {
            CHECK(res.trace[i].decrease <= res.trace[i].bound);
            CHECK(res.trace[i].value <= res.trace[i - 1].value);
        }
    }
}
