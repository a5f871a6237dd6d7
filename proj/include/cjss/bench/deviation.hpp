#pragma once

#include "cjss/core.hpp"
#include "cjss/dense.hpp"

#include <algorithm>
#include <cmath>

namespace cjss::bench {

/// Orthonormal basis of range(X) when X is not already orthonormal to 1e-12.
template <class Scalar>
Block<Scalar> orthonormalized(const Block<Scalar>& X) {
    const Index k = X.cols();
    if (k == 0) return X;
    const double dev = (X.adjoint() * X - Block<Scalar>::Identity(k, k)).norm();
    if (dev <= 1e-12) return X;
    return dense_qr<Scalar>(X).Q;
}

/**
 ||(I - U U^H) X||_2 from the explicit projection residual. Unlike sqrt(1 - sigma_min^2)
 of U^H X it keeps full relative accuracy for tiny deviations.
 */
template <class Scalar>
double subspace_deviation(const Block<Scalar>& U, const Block<Scalar>& X_ref) {
    if (X_ref.cols() == 0) return 0.0;
    const Block<Scalar> X = orthonormalized(X_ref);
    const Block<Scalar> P = X - U * (U.adjoint() * X);
    const double d = singular_values<Scalar>(P)(0);
    return std::clamp(d, 0.0, 1.0);
}

/// The same quantity as sqrt(1 - sigma_min(U^H X)^2); saturates near 1e-8.
template <class Scalar>
double subspace_deviation_cosine(const Block<Scalar>& U, const Block<Scalar>& X_ref) {
    if (X_ref.cols() == 0) return 0.0;
    const Block<Scalar> X = orthonormalized(X_ref);
    if (U.cols() < X.cols()) return 1.0;
    const RealVector s = singular_values<Scalar>(Block<Scalar>(U.adjoint() * X));
    const double smin = std::min(1.0, s(s.size() - 1));
    return std::clamp(std::sqrt(std::max(0.0, 1.0 - smin * smin)), 0.0, 1.0);
}

/// Sine of the largest principal angle between range(X) and range(X_ref) (equal dimensions).
template <class Scalar>
double subspace_sine(const Block<Scalar>& X, const Block<Scalar>& X_ref) {
    if (X.cols() != X_ref.cols()) throw std::invalid_argument("subspace_sine: dimension mismatch");
    if (X.cols() == 0) return 0.0;
    return subspace_deviation<Scalar>(dense_qr<Scalar>(X).Q, X_ref);
}

} // namespace cjss::bench
