#pragma once

#include <Eigen/Dense>

#include <complex>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace cjss {

using Index = Eigen::Index;

/// Dense column block; stores V, S, U and every other tall-skinny quantity.
template <class Scalar>
using Block = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

template <class Scalar>
inline constexpr bool is_complex_v = Eigen::NumTraits<Scalar>::IsComplex;

/// Raised for numerical failures (non-convergent quadrature, Lanczos breakdown, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operators the solver can filter: Hermitian, fixed size, block application.
template <class Op>
concept HermitianOperator = requires(const Op& op, const Block<typename Op::Scalar>& x) {
    typename Op::Scalar;
    { op.rows() } -> std::convertible_to<Index>;
    { op.apply(x) } -> std::convertible_to<Block<typename Op::Scalar>>;
    { op.norm1() } -> std::convertible_to<double>;
    { op.norm_inf() } -> std::convertible_to<double>;
};

template <HermitianOperator Op>
Block<typename Op::Scalar> block_matvec(const Op& op, const Block<typename Op::Scalar>& x) {
    return op.apply(x);
}

namespace detail {

template <class Scalar>
Scalar unit_phase_of(const Scalar& value) {
    if constexpr (is_complex_v<Scalar>) {
        const double mag = std::abs(value);
        return mag == 0.0 ? Scalar(1.0) : std::conj(value) / mag;
    } else {
        return value < 0 ? Scalar(-1) : Scalar(1);
    }
}

/// Index of the entry with the largest magnitude; first one wins ties.
template <class Derived>
Index argmax_abs(const Eigen::MatrixBase<Derived>& v) {
    Index best = 0;
    double best_mag = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i));
        if (mag > best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    return best;
}

} // namespace detail

/// Rotate x (and its coordinates z) so the largest-magnitude entry of x is real positive.
template <class Scalar>
void normalize_phase(Vector<Scalar>& x, Vector<Scalar>& z) {
    if (x.size() == 0) return;
    const Scalar phase = detail::unit_phase_of(x(detail::argmax_abs(x)));
    x *= phase;
    z *= phase;
}

template <class Scalar>
void normalize_phase(Vector<Scalar>& x) {
    if (x.size() == 0) return;
    x *= detail::unit_phase_of(x(detail::argmax_abs(x)));
}

} // namespace cjss
