#pragma once

#include "cjss/core.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <vector>

namespace cjss {

/**
 Immutable sparse Hermitian (real symmetric or complex Hermitian) operator.

 The full pattern is stored (both triangles). Construction verifies Hermiticity
 against a relative tolerance on the largest stored magnitude and caches the
 induced 1- and infinity-norms.
 */
template <class ScalarT>
class SparseHermitian {
public:
    using Scalar = ScalarT;
    using Storage = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, std::int64_t>;
    using Triplet = Eigen::Triplet<Scalar, std::int64_t>;

    static constexpr double default_hermitian_tol = 1e-14;

    explicit SparseHermitian(Storage matrix, double hermitian_tol = default_hermitian_tol)
        : matrix_(std::move(matrix)) {
        if (matrix_.rows() != matrix_.cols())
            throw std::invalid_argument("SparseHermitian: matrix must be square, got " +
                                        std::to_string(matrix_.rows()) + "x" +
                                        std::to_string(matrix_.cols()));
        if (matrix_.rows() < 1) throw std::invalid_argument("SparseHermitian: dimension must be >= 1");
        matrix_.makeCompressed();
        const double dev = hermitian_deviation(matrix_);
        const double scale = max_abs(matrix_);
        if (dev > hermitian_tol * scale)
            throw std::invalid_argument("SparseHermitian: matrix is not Hermitian (max |A - A^H| = " +
                                        std::to_string(dev) + ", scale " + std::to_string(scale) + ")");
        norm1_ = compute_norm1(matrix_);
        norm_inf_ = compute_norm_inf(matrix_);
    }

    static SparseHermitian from_triplets(Index n, const std::vector<Triplet>& entries,
                                         double hermitian_tol = default_hermitian_tol) {
        Storage m(n, n);
        m.setFromTriplets(entries.begin(), entries.end());
        return SparseHermitian(std::move(m), hermitian_tol);
    }

    template <class Derived>
    static SparseHermitian from_dense(const Eigen::MatrixBase<Derived>& dense,
                                      double hermitian_tol = default_hermitian_tol) {
        Storage m = dense.sparseView();
        return SparseHermitian(std::move(m), hermitian_tol);
    }

    Index rows() const { return matrix_.rows(); }
    Index nnz() const { return matrix_.nonZeros(); }
    double norm1() const { return norm1_; }
    double norm_inf() const { return norm_inf_; }
    const Storage& matrix() const { return matrix_; }

    Block<Scalar> apply(const Block<Scalar>& x) const {
        if (x.rows() != rows())
            throw std::invalid_argument("block_matvec: block has " + std::to_string(x.rows()) +
                                        " rows, operator dimension is " + std::to_string(rows()));
        Block<Scalar> y = matrix_ * x;
        return y;
    }

    static double compute_norm1(const Storage& m) {
        std::vector<double> col(static_cast<std::size_t>(m.cols()), 0.0);
        for (Index r = 0; r < m.outerSize(); ++r)
            for (typename Storage::InnerIterator it(m, r); it; ++it)
                col[static_cast<std::size_t>(it.col())] += std::abs(it.value());
        return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
    }

    static double compute_norm_inf(const Storage& m) {
        double best = 0.0;
        for (Index r = 0; r < m.outerSize(); ++r) {
            double row = 0.0;
            for (typename Storage::InnerIterator it(m, r); it; ++it) row += std::abs(it.value());
            best = std::max(best, row);
        }
        return best;
    }

    static double max_abs(const Storage& m) {
        double best = 0.0;
        for (Index k = 0; k < m.nonZeros(); ++k) best = std::max(best, std::abs(m.valuePtr()[k]));
        return best;
    }

    static double hermitian_deviation(const Storage& m) {
        Storage adj = m.adjoint();
        Storage diff = m - adj;
        return max_abs(diff);
    }

private:
    Storage matrix_;
    double norm1_ = 0.0;
    double norm_inf_ = 0.0;
};

static_assert(HermitianOperator<SparseHermitian<double>>);
static_assert(HermitianOperator<SparseHermitian<std::complex<double>>>);

} // namespace cjss
