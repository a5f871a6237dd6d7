#pragma once

#include "cjss/bounds.hpp"
#include "cjss/cj_filter.hpp"
#include "cjss/core.hpp"
#include "cjss/dense.hpp"
#include "cjss/random.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace cjss {

template <class Scalar>
struct MomentBlock {
    Block<Scalar> S; // (S_0 ... S_{M-1}), n x M*ell
    Index ell = 0;
    Index M = 0;
    Block<Scalar> U;
    Block<Scalar> R;
    Index matvecs = 0;           // block products with A
    double min_rdiag_ratio = 0;  // min |R_ii| / ||S||_2
    std::vector<std::string> warnings;

    auto moment(Index k) const { return S.middleCols(k * ell, ell); }
};

/// y = A_m x with A_m = (2A - (lmax + lmin) I) / (lmax - lmin).
template <HermitianOperator Op>
Block<typename Op::Scalar> mapped_apply(const Op& A, const SpectralBounds& bounds,
                                        const Block<typename Op::Scalar>& X) {
    const double scale = 2.0 / bounds.spread();
    const double shift = (bounds.lambda_max + bounds.lambda_min) / bounds.spread();
    Block<typename Op::Scalar> Y = A.apply(X);
    Y *= scale;
    Y -= shift * X;
    return Y;
}

/// Thin QR S = U R, recording a warning when R has a relatively tiny diagonal entry.
template <class Scalar>
void factorize_moments(MomentBlock<Scalar>& m) {
    auto qr = dense_qr<Scalar>(m.S);
    m.U = std::move(qr.Q);
    m.R = std::move(qr.R);
    const double snorm = singular_values<Scalar>(m.R)(0);
    m.min_rdiag_ratio = snorm > 0.0 ? m.R.diagonal().cwiseAbs().minCoeff() / snorm : 0.0;
    if (m.min_rdiag_ratio < 1e-14) {
        std::ostringstream msg;
        msg << "moment block S is numerically rank deficient (min |R_ii|/||S|| = " << m.min_rdiag_ratio << ")";
        m.warnings.push_back(msg.str());
    }
}

namespace detail {

/// One Chebyshev recurrence accumulating g(k, j) T_j(A_m) V into column block k.
template <HermitianOperator Op>
Block<typename Op::Scalar> chebyshev_accumulate(const Op& A, const SpectralBounds& bounds,
                                                const Block<typename Op::Scalar>& V, const RealMatrix& g,
                                                Index* matvecs) {
    using Scalar = typename Op::Scalar;
    const Index ell = V.cols();
    const Index M = g.rows();
    const Index d = g.cols() - 1;
    Block<Scalar> S(V.rows(), M * ell);
    for (Index k = 0; k < M; ++k) S.middleCols(k * ell, ell) = g(k, 0) * V;

    Index count = 0;
    if (d >= 1) {
        Block<Scalar> prev = V;
        Block<Scalar> cur = mapped_apply(A, bounds, V);
        count = 1;
        for (Index j = 1; j <= d; ++j) {
            for (Index k = 0; k < M; ++k) S.middleCols(k * ell, ell) += g(k, j) * cur;
            if (j == d) break;
            Block<Scalar> next = 2.0 * mapped_apply(A, bounds, cur) - prev;
            ++count;
            prev = std::move(cur);
            cur = std::move(next);
        }
    }
    if (matvecs) *matvecs = count;
    return S;
}

} // namespace detail

/**
 Filtered moments S_k = F_d(p_k)(A_m) V for k = 0..M-1 from one Chebyshev recurrence,
 followed by the thin QR S = U R. Uses exactly plan.d block products with A.
 */
template <HermitianOperator Op>
MomentBlock<typename Op::Scalar> build_moments(const Op& A, const SpectralBounds& bounds,
                                               const Block<typename Op::Scalar>& V, const FilterPlan& plan,
                                               bool factorize = true) {
    using Scalar = typename Op::Scalar;
    const Index n = A.rows();
    const Index ell = V.cols();
    if (V.rows() != n) throw std::invalid_argument("build_moments: V has wrong row count");
    if (ell < 1) throw std::invalid_argument("build_moments: V needs at least one column");
    if (plan.M * ell > n) throw std::invalid_argument("build_moments: M*ell exceeds the dimension");
    if (bounds.degenerate()) throw std::invalid_argument("build_moments: degenerate bounds");

    MomentBlock<Scalar> out;
    out.ell = ell;
    out.M = plan.M;
    out.S = detail::chebyshev_accumulate(A, bounds, V, plan.damped(), &out.matvecs);

    if (factorize) factorize_moments(out);
    return out;
}

struct EigencountEstimate {
    Index count = 0;
    double mean = 0.0;
    double std_error = 0.0;
    Index samples = 0;
};

/// Hutchinson trace estimate of F_d(1)(A_m) with Rademacher probes.
template <HermitianOperator Op>
EigencountEstimate estimate_eigencount(const Op& A, const SpectralBounds& bounds, const Window& window, Index d,
                                       Index samples, std::uint64_t seed = 0) {
    using Scalar = typename Op::Scalar;
    if (samples < 10) throw std::invalid_argument("estimate_eigencount: samples must be >= 10");
    FilterPlan plan;
    plan.d = d;
    plan.M = 1;
    plan.window = window;
    plan.rho = jackson_factors(d);
    plan.coeff = step_coefficients(window, d).transpose();

    Rng rng(seed);
    const Block<Scalar> Z = rademacher_block<Scalar>(A.rows(), samples, rng);
    const Block<Scalar> FZ = detail::chebyshev_accumulate(A, bounds, Z, plan.damped(), nullptr);
    RealVector est(samples);
    for (Index s = 0; s < samples; ++s) est(s) = std::real(Z.col(s).dot(FZ.col(s)));

    EigencountEstimate out;
    out.samples = samples;
    out.mean = est.mean();
    const double var = (est.array() - out.mean).square().sum() / static_cast<double>(samples - 1);
    out.std_error = std::sqrt(var / static_cast<double>(samples));
    out.count = std::max<Index>(0, static_cast<Index>(std::llround(out.mean)));
    return out;
}

} // namespace cjss
