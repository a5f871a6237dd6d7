#pragma once

#include "cjss/cjss.hpp"

#include <complex>
#include <random>
#include <vector>

namespace cjss::test {

using cplx = std::complex<double>;

/// Random sparse Hermitian matrix with about `per_row` off-diagonal entries per row.
template <class Scalar>
SparseHermitian<Scalar> random_sparse_hermitian(Index n, Index per_row, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<Index> col(0, n - 1);
    using Triplet = typename SparseHermitian<Scalar>::Triplet;
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) {
        t.emplace_back(i, i, Scalar(g(rng)));
        for (Index k = 0; k < per_row; ++k) {
            const Index j = col(rng);
            if (j == i) continue;
            Scalar v;
            if constexpr (is_complex_v<Scalar>) v = Scalar(g(rng), g(rng));
            else v = g(rng);
            t.emplace_back(i, j, v);
            if constexpr (is_complex_v<Scalar>) t.emplace_back(j, i, std::conj(v));
            else t.emplace_back(j, i, v);
        }
    }
    return SparseHermitian<Scalar>::from_triplets(n, t);
}

template <class Scalar>
SparseHermitian<Scalar> diagonal(const RealVector& d) {
    Block<Scalar> D = Block<Scalar>::Zero(d.size(), d.size());
    for (Index i = 0; i < d.size(); ++i) D(i, i) = Scalar(d(i));
    return SparseHermitian<Scalar>::from_dense(D);
}

template <class Scalar>
Block<Scalar> dense(const SparseHermitian<Scalar>& A) {
    return Block<Scalar>(A.matrix());
}

/// Wraps an operator and counts block products.
template <class Op>
struct CountingOperator {
    using Scalar = typename Op::Scalar;
    const Op& inner;
    mutable Index calls = 0;
    mutable Index columns = 0;

    Index rows() const { return inner.rows(); }
    double norm1() const { return inner.norm1(); }
    double norm_inf() const { return inner.norm_inf(); }
    Block<Scalar> apply(const Block<Scalar>& x) const {
        ++calls;
        columns += x.cols();
        return inner.apply(x);
    }
};

/// T_j(t) from the trigonometric definition, independent of any recurrence.
inline double chebyshev_t(Index j, double t) {
    if (std::abs(t) <= 1.0) return std::cos(static_cast<double>(j) * std::acos(t));
    const double s = t > 0 ? 1.0 : ((j % 2) ? -1.0 : 1.0);
    return s * std::cosh(static_cast<double>(j) * std::acosh(std::abs(t)));
}

/// Damped filter value by direct summation of the series.
inline double filter_direct(const FilterPlan& plan, Index k, double t) {
    double v = 0.5 * plan.coeff(k, 0);
    for (Index j = 1; j <= plan.d; ++j) v += plan.rho(j) * plan.coeff(k, j) * chebyshev_t(j, t);
    return v;
}

/// X diag(f_k(l(lambda))) X^H V for every k, from a full eigendecomposition of A.
template <class Scalar>
Block<Scalar> dense_moment_oracle(const SparseHermitian<Scalar>& A, const SpectralBounds& bounds,
                                  const Block<Scalar>& V, const FilterPlan& plan) {
    const auto eig = hermitian_eig<Scalar>(dense(A));
    const Index ell = V.cols();
    const Block<Scalar> XhV = eig.vectors.adjoint() * V;
    Block<Scalar> S(A.rows(), plan.M * ell);
    for (Index k = 0; k < plan.M; ++k) {
        RealVector f(eig.values.size());
        for (Index i = 0; i < f.size(); ++i)
            f(i) = filter_direct(plan, k, std::clamp(map_point(bounds, eig.values(i)), -1.0, 1.0));
        S.middleCols(k * ell, ell) = eig.vectors * (f.asDiagonal() * XhV);
    }
    return S;
}

/// |x^H y| for unit vectors; 1 means the same direction up to phase.
template <class Scalar>
double alignment(const Vector<Scalar>& x, const Vector<Scalar>& y) {
    return std::abs(x.dot(y)) / (x.norm() * y.norm());
}

} // namespace cjss::test
