#pragma once

#include "cjss/cj_filter.hpp"
#include "cjss/core.hpp"
#include "cjss/dense.hpp"

#include <vector>

namespace cjss {

template <class Scalar>
struct RitzSet {
    RealVector values;   // ascending
    Block<Scalar> Y;     // primitive vectors, columns of the projected eigenbasis
    Block<Scalar> X;     // U * Y
    Block<Scalar> B;     // projected matrix U^H A U (symmetrized)
    RealVector resnorms; // ||A x - theta x||, filled when AU was available
};

/// Rayleigh-Ritz on an orthonormal basis U given AU = A U.
template <class Scalar>
RitzSet<Scalar> rayleigh_ritz(const Block<Scalar>& U, const Block<Scalar>& AU) {
    if (U.rows() != AU.rows() || U.cols() != AU.cols())
        throw std::invalid_argument("rayleigh_ritz: U and AU shapes differ");
    RitzSet<Scalar> out;
    const Block<Scalar> B = U.adjoint() * AU;
    out.B = (B + B.adjoint()) / 2.0;
    auto eig = hermitian_eig<Scalar>(out.B);
    out.values = std::move(eig.values);
    out.Y = std::move(eig.vectors);
    out.X = U * out.Y;
    const Block<Scalar> AX = AU * out.Y;
    out.resnorms.resize(out.values.size());
    for (Index i = 0; i < out.values.size(); ++i)
        out.resnorms(i) = (AX.col(i) - out.values(i) * out.X.col(i)).norm();
    return out;
}

template <HermitianOperator Op>
RitzSet<typename Op::Scalar> rayleigh_ritz(const Op& A, const Block<typename Op::Scalar>& U) {
    return rayleigh_ritz<typename Op::Scalar>(U, A.apply(U));
}

/// Indices i with values(i) in the closed window [a, b].
inline std::vector<Index> select_potential(const RealVector& values, const Window& window) {
    std::vector<Index> out;
    for (Index i = 0; i < values.size(); ++i)
        if (window.contains(values(i))) out.push_back(i);
    return out;
}

template <class Scalar>
std::vector<Index> select_potential(const RitzSet<Scalar>& ritz, const Window& window) {
    return select_potential(ritz.values, window);
}

/// R factor of (U, AU) = Q (J, H); Q is never formed.
template <class Scalar>
struct ReducedPencil {
    Block<Scalar> J;
    Block<Scalar> H;

    Block<Scalar> shifted(double lambda) const { return H - lambda * J; }
};

template <class Scalar>
ReducedPencil<Scalar> build_reduced_pencil(const Block<Scalar>& U, const Block<Scalar>& AU) {
    const Index p = U.cols();
    Block<Scalar> stacked(U.rows(), 2 * p);
    stacked << U, AU;
    const Block<Scalar> R = dense_qr_r<Scalar>(stacked);
    return {R.leftCols(p), R.rightCols(p)};
}

template <HermitianOperator Op>
ReducedPencil<typename Op::Scalar> build_reduced_pencil(const Op& A, const Block<typename Op::Scalar>& U) {
    return build_reduced_pencil<typename Op::Scalar>(U, A.apply(U));
}

template <class Scalar>
struct RefinedVector {
    Vector<Scalar> z;
    double sigma_min = 0.0;
    bool ambiguous = false; // smallest singular value not simple within 1e-14
};

namespace detail {

template <class Scalar>
RefinedVector<Scalar> smallest_right_singular(const Block<Scalar>& shifted) {
    auto svd = dense_svd<Scalar>(shifted, false);
    const Index p = shifted.cols();
    RefinedVector<Scalar> out;
    // Full V so a short matrix (fewer rows than columns) still yields its null direction.
    const Index k = svd.sigma.size();
    if (k < p) {
        out.z = svd.V.col(p - 1);
        out.sigma_min = 0.0;
        out.ambiguous = p - k > 1 || (k > 0 && svd.sigma(k - 1) <= 1e-14);
        return out;
    }
    out.z = svd.V.col(p - 1);
    out.sigma_min = svd.sigma(p - 1);
    out.ambiguous = p > 1 && svd.sigma(p - 2) - svd.sigma(p - 1) <= 1e-14;
    return out;
}

} // namespace detail

/// Smallest right singular vector of H - lambda J.
template <class Scalar>
RefinedVector<Scalar> refined_vector(const ReducedPencil<Scalar>& pencil, double lambda) {
    return detail::smallest_right_singular<Scalar>(pencil.shifted(lambda));
}

/// Same minimizer through the SVD of the tall (A - lambda I) U; oracle path.
template <class Scalar>
RefinedVector<Scalar> refined_vector_direct(const Block<Scalar>& U, const Block<Scalar>& AU, double lambda) {
    return detail::smallest_right_singular<Scalar>(Block<Scalar>(AU - lambda * U));
}

template <HermitianOperator Op>
RefinedVector<typename Op::Scalar> refined_vector_direct(const Op& A, const Block<typename Op::Scalar>& U,
                                                         double lambda) {
    return refined_vector_direct<typename Op::Scalar>(U, A.apply(U), lambda);
}

template <class Scalar>
struct RefinedSet {
    RealVector base_values;  // shifts (potential Ritz values)
    Block<Scalar> Z;         // primitive refined vectors
    Block<Scalar> X;         // U Z, unit columns
    RealVector values;       // Rayleigh quotients of the columns of X
    Block<Scalar> residuals; // A x - lambda x
    RealVector resnorms;
    RealVector min_singvals;
    std::vector<bool> ambiguous;

    Index size() const { return values.size(); }
};

/// Lift primitive vectors w (columns) to unit Ritz-type pairs with Rayleigh quotient values.
template <class Scalar>
void lift_pairs(const Block<Scalar>& U, const Block<Scalar>& AU, Block<Scalar>& W, Block<Scalar>& X,
                RealVector& values, Block<Scalar>& residuals, RealVector& resnorms) {
    const Index q = W.cols();
    X = U * W;
    Block<Scalar> AX = AU * W;
    values.resize(q);
    resnorms.resize(q);
    residuals.resize(U.rows(), q);
    for (Index i = 0; i < q; ++i) {
        const double nx = X.col(i).norm();
        X.col(i) /= nx;
        AX.col(i) /= nx;
        W.col(i) /= nx;
        const Scalar phase = detail::unit_phase_of(X(detail::argmax_abs(X.col(i)), i));
        X.col(i) *= phase;
        AX.col(i) *= phase;
        W.col(i) *= phase;
        values(i) = std::real(X.col(i).dot(AX.col(i)));
        residuals.col(i) = AX.col(i) - values(i) * X.col(i);
        resnorms(i) = residuals.col(i).norm();
    }
}

/// Refined pairs for every shift, all sharing one reduced pencil.
template <class Scalar>
RefinedSet<Scalar> refine_set(const Block<Scalar>& U, const Block<Scalar>& AU, const ReducedPencil<Scalar>& pencil,
                              const RealVector& shifts) {
    if (shifts.size() == 0) throw std::invalid_argument("refine_set: potential list is empty");
    const Index p = shifts.size();
    RefinedSet<Scalar> out;
    out.base_values = shifts;
    out.Z.resize(U.cols(), p);
    out.min_singvals.resize(p);
    out.ambiguous.resize(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) {
        auto rv = refined_vector(pencil, shifts(i));
        out.Z.col(i) = rv.z;
        out.min_singvals(i) = rv.sigma_min;
        out.ambiguous[static_cast<std::size_t>(i)] = rv.ambiguous;
    }
    lift_pairs(U, AU, out.Z, out.X, out.values, out.residuals, out.resnorms);
    return out;
}

} // namespace cjss
