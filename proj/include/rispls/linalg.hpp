#pragma once

#include "rispls/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iostream>
#include <string_view>

namespace rispls {

namespace detail {

inline std::atomic<long>& warning_count() {
    static std::atomic<long> count{0};
    return count;
}

inline std::function<void(std::string_view)>& warning_sink() {
    static std::function<void(std::string_view)> sink = [](std::string_view msg) {
        // only the first few reach stderr; the counter keeps the total
        if (warning_count().load() <= 5) std::clog << "rispls warning: " << msg << '\n';
    };
    return sink;
}

}  // namespace detail

/// Route numerical warnings somewhere else (tests silence them).
inline void set_warning_sink(std::function<void(std::string_view)> sink) {
    detail::warning_sink() = std::move(sink);
}

inline long warning_count() { return detail::warning_count().load(); }

inline void warn(std::string_view msg) {
    ++detail::warning_count();
    if (detail::warning_sink()) detail::warning_sink()(msg);
}

inline constexpr double kRegularizeCondition = 1e12;
inline constexpr double kRegularizeShift = 1e-12;

template <typename Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& x) {
    return (0.5 * (x + x.adjoint())).eval();
}

/// Cholesky factorisation of an HPD matrix. Throws SingularMatrixError when the
/// factorisation fails; shifts by 1e-12 I (with a warning) when the reciprocal
/// condition estimate drops below 1e-12.
template <typename Derived>
auto hpd_factor(const Eigen::MatrixBase<Derived>& x, std::string_view what = "matrix") {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Matrix h = hermitian_part(x);
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError(std::string(what) + " is not positive definite");
    }
    if (h.rows() > 0 && llt.rcond() < 1.0 / kRegularizeCondition) {
        warn(std::string(what) + " ill-conditioned; regularising");
        h.diagonal().array() += Scalar(kRegularizeShift);
        llt.compute(h);
        if (llt.info() != Eigen::Success) {
            throw SingularMatrixError(std::string(what) + " is singular");
        }
    }
    return llt;
}

/// Natural log-determinant of an HPD matrix from its Cholesky factor.
template <typename Derived>
auto log_det_hpd(const Eigen::MatrixBase<Derived>& x, std::string_view what = "matrix") {
    const auto llt = hpd_factor(x, what);
    using std::log;
    using std::real;
    typename Eigen::NumTraits<typename Derived::Scalar>::Real sum(0);
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) sum += log(real(l(i, i)));
    return 2 * sum;
}

/// X^{-1} B for HPD X.
template <typename DerivedX, typename DerivedB>
auto hpd_solve(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedB>& b,
               std::string_view what = "matrix") {
    return hpd_factor(x, what).solve(b.derived()).eval();
}

template <typename Derived>
auto hpd_inverse(const Eigen::MatrixBase<Derived>& x, std::string_view what = "matrix") {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Matrix inv = hpd_factor(x, what).solve(Matrix::Identity(x.rows(), x.cols()));
    return hermitian_part(inv);
}

/// diag(A * B) without forming the product.
template <typename DerivedA, typename DerivedB>
auto diag_of_product(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    return a.cwiseProduct(b.transpose()).rowwise().sum().eval();
}

/// Kronecker product A (x) B.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Column-stacking vec(A).
template <typename Derived>
auto vec(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(a.size());
    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(out.data(), a.rows(), a.cols()) = a;
    return out;
}

/// Inverse of vec: column-wise reshape into rows x cols.
template <typename Derived>
auto unvec(const Eigen::MatrixBase<Derived>& v, Eigen::Index rows, Eigen::Index cols) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tmp = v;
    return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(
        Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(tmp.data(), rows, cols));
}

inline constexpr double kUnitModulusTol = 1e-9;

template <typename Derived>
bool is_unit_modulus(const Eigen::MatrixBase<Derived>& v, double tol = kUnitModulusTol) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    const double eff = std::max(tol, 100.0 * double(Eigen::NumTraits<Real>::epsilon()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(std::abs(double(std::abs(v(i))) - 1.0) <= eff)) return false;
    }
    return true;
}

template <typename Derived>
void require_unit_modulus(const Eigen::MatrixBase<Derived>& v, std::string_view what) {
    if (!is_unit_modulus(v)) throw ConstraintViolation(std::string(what) + " must be unit-modulus");
}

template <typename Real>
Real log2_from_ln(Real nats) {
    return nats / Real(std::log(2.0));
}

}  // namespace rispls
