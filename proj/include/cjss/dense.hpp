#pragma once

#include "cjss/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace cjss {

template <class Scalar>
struct QrResult {
    Block<Scalar> Q; // thin, rows x cols
    Block<Scalar> R; // cols x cols, upper triangular
};

/// Thin Householder QR. Rank deficiency is reported through tiny diagonal entries of R, not errors.
template <class Scalar>
QrResult<Scalar> dense_qr(const Block<Scalar>& B) {
    const Index m = B.rows();
    const Index n = B.cols();
    if (m < n) throw std::invalid_argument("dense_qr: needs rows >= cols");
    Eigen::HouseholderQR<Block<Scalar>> qr(B);
    QrResult<Scalar> out;
    out.Q = qr.householderQ() * Block<Scalar>::Identity(m, n);
    out.R = qr.matrixQR().topRows(n).template triangularView<Eigen::Upper>();
    return out;
}

/// R factor only; Q stays in Householder form and is discarded.
template <class Scalar>
Block<Scalar> dense_qr_r(const Block<Scalar>& B) {
    const Index n = std::min(B.rows(), B.cols());
    Eigen::HouseholderQR<Block<Scalar>> qr(B);
    return qr.matrixQR().topRows(n).template triangularView<Eigen::Upper>();
}

template <class Scalar>
struct SvdResult {
    Block<Scalar> U;   // thin left singular vectors
    RealVector sigma;  // descending
    Block<Scalar> V;   // right singular vectors (columns)
};

/// Thin SVD through one-sided Jacobi, so small singular values carry high relative accuracy.
template <class Scalar>
SvdResult<Scalar> dense_svd(const Block<Scalar>& B, bool want_u = true) {
    if (B.size() == 0) throw std::invalid_argument("dense_svd: empty matrix");
    const int opts = want_u ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : Eigen::ComputeFullV;
    Eigen::JacobiSVD<Block<Scalar>> svd(B, opts);
    SvdResult<Scalar> out;
    if (want_u) out.U = svd.matrixU();
    out.sigma = svd.singularValues();
    out.V = svd.matrixV();
    return out;
}

template <class Scalar>
RealVector singular_values(const Block<Scalar>& B) {
    if (B.size() == 0) return RealVector();
    Eigen::JacobiSVD<Block<Scalar>> svd(B);
    return svd.singularValues();
}

template <class Scalar>
struct EigResult {
    RealVector values;      // ascending
    Block<Scalar> vectors;  // orthonormal columns
};

/// Hermitian eigensolve after explicit symmetrization (B + B^H)/2.
template <class Scalar>
EigResult<Scalar> hermitian_eig(const Block<Scalar>& B) {
    if (B.rows() != B.cols()) throw std::invalid_argument("hermitian_eig: matrix must be square");
    const Block<Scalar> sym = (B + B.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Block<Scalar>> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("hermitian_eig: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

/// 2-norm condition number; infinity for an empty or rank-zero matrix.
template <class Scalar>
double condition_number(const Block<Scalar>& X) {
    if (X.cols() == 0) return std::numeric_limits<double>::infinity();
    const RealVector s = singular_values(X);
    const double smin = s(s.size() - 1);
    return smin == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / smin;
}

} // namespace cjss
