#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace rispls {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Error hierarchy. Everything derives from std::runtime_error so callers can
// catch a single type at the trial boundary.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the operation's domain (zero distance, bad config, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A unit-modulus or norm constraint is violated on entry.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

// A matrix that must be Hermitian positive definite is not (numerically).
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

// Bracketing/bisection failed to converge within its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace rispls
