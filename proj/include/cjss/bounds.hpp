#pragma once

#include "cjss/core.hpp"
#include "cjss/dense.hpp"
#include "cjss/random.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cjss {

struct SpectralBounds {
    double lambda_min = -1.0;
    double lambda_max = 1.0;
    double margin = 0.0;

    double spread() const { return lambda_max - lambda_min; }
    bool degenerate() const { return !(lambda_min < lambda_max); }
    /// Norm used in the refined convergence test.
    double abs_max() const { return std::max(std::abs(lambda_min), std::abs(lambda_max)); }
};

struct LanczosOptions {
    double margin = 0.01;
    Index iters = 40;
    std::uint64_t seed = 0x5eed;
};

/**
 Extremal eigenvalue bounds from a fully reorthogonalized Lanczos sweep.

 Each extremal Ritz value is pushed outward by its own residual bound |beta * s_last|
 (a rigorous enclosure for one eigenvalue) and then by margin * spread. When the Krylov
 space becomes invariant before `iters` steps, the sweep continues from a fresh seeded
 vector orthogonalized against the basis so the whole spectrum keeps being sampled.
 */
template <HermitianOperator Op>
SpectralBounds estimate_bounds(const Op& A, const LanczosOptions& opt = {}) {
    using Scalar = typename Op::Scalar;
    if (opt.iters < 20) throw std::invalid_argument("estimate_bounds: iters must be >= 20");
    if (opt.margin < 0.0) throw std::invalid_argument("estimate_bounds: margin must be >= 0");
    const Index n = A.rows();
    const Index steps = std::min<Index>(opt.iters, n);
    Rng rng(opt.seed);

    // A breakdown is a residual this small relative to the operator scale.
    const double scale = std::max({A.norm1(), A.norm_inf(), std::numeric_limits<double>::min()});
    const double breakdown_tol = 1e-12 * scale;

    Block<Scalar> basis(n, steps);
    RealVector alpha = RealVector::Zero(steps);
    RealVector beta = RealVector::Zero(steps);
    Index m = 0;
    int failed_draws = 0;

    auto fresh_vector = [&]() -> bool {
        while (failed_draws < 3) {
            Vector<Scalar> v = gaussian_block<Scalar>(n, 1, rng).col(0);
            for (int pass = 0; pass < 2; ++pass)
                for (Index j = 0; j < m; ++j) v -= basis.col(j) * basis.col(j).dot(v);
            const double nv = v.norm();
            if (nv > 1e-8) {
                basis.col(m) = v / nv;
                return true;
            }
            ++failed_draws;
        }
        return false;
    };

    if (!fresh_vector()) throw NumericalError("estimate_bounds: could not draw a start vector");
    // tail_beta is the norm of the residual left after the last step; it weights the
    // Ritz residual bounds of the extremal values.
    double tail_beta = 0.0;
    while (true) {
        Block<Scalar> w = A.apply(basis.col(m));
        alpha(m) = std::real(basis.col(m).dot(w.col(0)));
        for (int pass = 0; pass < 2; ++pass)
            for (Index j = 0; j <= m; ++j) w.col(0) -= basis.col(j) * basis.col(j).dot(w.col(0));
        const double b = w.col(0).norm();
        ++m;
        if (m == steps) {
            tail_beta = m < n ? b : 0.0;
            break;
        }
        if (b > breakdown_tol) {
            beta(m - 1) = b;
            basis.col(m) = w.col(0) / b;
        } else if (!fresh_vector()) {
            throw NumericalError("estimate_bounds: Lanczos breakdown, 3 start vectors failed");
        }
    }

    RealMatrix T = RealMatrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
        T(i, i) = alpha(i);
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta(i);
    }
    const auto eig = hermitian_eig<double>(T);
    const double res_lo = tail_beta * std::abs(eig.vectors(m - 1, 0));
    const double res_hi = tail_beta * std::abs(eig.vectors(m - 1, m - 1));

    SpectralBounds out;
    out.margin = opt.margin;
    const double theta_min = eig.values(0);
    const double theta_max = eig.values(m - 1);
    const double pad = opt.margin * (theta_max - theta_min);
    out.lambda_min = theta_min - res_lo - pad;
    out.lambda_max = theta_max + res_hi + pad;
    return out;
}

} // namespace cjss
