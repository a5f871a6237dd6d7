#pragma once

#include "cjss/core.hpp"
#include "cjss/dense.hpp"
#include "cjss/random.hpp"
#include "cjss/sparse_hermitian.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace cjss::bench {

/**
 A = Q diag(lambda) Q^H with Q block diagonal (independent random unitary blocks), so A
 stays sparse and every eigenvector is known. Eigenvalues are shuffled before being
 placed so neighbouring values do not share a block.
 */
template <class Scalar>
struct SyntheticOperator {
    SparseHermitian<Scalar> A;
    Eigen::SparseMatrix<Scalar> Q; // column i is the eigenvector for lambda(i)
    RealVector lambda;

    /// Eigenvectors whose eigenvalues lie in [a, b], dense n x n_ev.
    Block<Scalar> eigenvectors_in(double a, double b) const {
        std::vector<Index> cols;
        for (Index i = 0; i < lambda.size(); ++i)
            if (a <= lambda(i) && lambda(i) <= b) cols.push_back(i);
        Block<Scalar> X(Q.rows(), static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) X.col(static_cast<Index>(c)) = Q.col(cols[c]);
        return X;
    }

    Index count_in(double a, double b) const {
        return (lambda.array() >= a && lambda.array() <= b).count();
    }
};

/// block <= 1 gives Q = I and a diagonal A in the given eigenvalue order.
template <class Scalar>
SyntheticOperator<Scalar> synthetic_spectrum(const RealVector& eigenvalues, std::uint64_t seed, Index block = 12) {
    const Index n = eigenvalues.size();
    if (n < 1) throw std::invalid_argument("synthetic_spectrum: empty spectrum");
    Rng rng(seed);
    RealVector lam = eigenvalues;
    if (block > 1) {
        std::vector<Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Index(0));
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Index i = 0; i < n; ++i) lam(i) = eigenvalues(perm[static_cast<std::size_t>(i)]);
    }

    using Triplet = Eigen::Triplet<Scalar, std::int64_t>;
    std::vector<Triplet> a_trip, q_trip;
    const Index bs = std::max<Index>(block, 1);
    for (Index start = 0; start < n; start += bs) {
        const Index m = std::min(bs, n - start);
        Block<Scalar> Qb = Block<Scalar>::Identity(m, m);
        if (block > 1) Qb = dense_qr<Scalar>(gaussian_block<Scalar>(m, m, rng)).Q;
        Block<Scalar> Ab = Qb * lam.segment(start, m).asDiagonal() * Qb.adjoint();
        Ab = (Ab + Ab.adjoint()).eval() / 2.0;
        for (Index j = 0; j < m; ++j)
            for (Index i = 0; i < m; ++i) {
                if (Ab(i, j) != Scalar(0)) a_trip.emplace_back(start + i, start + j, Ab(i, j));
                if (Qb(i, j) != Scalar(0)) q_trip.emplace_back(start + i, start + j, Qb(i, j));
            }
    }
    Eigen::SparseMatrix<Scalar> Q(n, n);
    Q.setFromTriplets(q_trip.begin(), q_trip.end());
    return {SparseHermitian<Scalar>::from_triplets(n, a_trip), std::move(Q), std::move(lam)};
}

enum class SpectrumFeature { none, double_eigenvalue, cluster };

inline const char* to_string(SpectrumFeature f) {
    switch (f) {
    case SpectrumFeature::none: return "none";
    case SpectrumFeature::double_eigenvalue: return "double";
    case SpectrumFeature::cluster: return "cluster";
    }
    return "unknown";
}

inline SpectrumFeature parse_feature(const std::string& s) {
    if (s == "none") return SpectrumFeature::none;
    if (s == "double") return SpectrumFeature::double_eigenvalue;
    if (s == "cluster") return SpectrumFeature::cluster;
    throw std::invalid_argument("unknown spectrum feature '" + s + "'");
}

/**
 Sorted uniform spectrum on [low, high] with a window holding `count` eigenvalues around
 `centre`. Each window edge sits inside the gap to its outside neighbour, halfway by
 default. The feature turns the eigenvalue at the centre into an exact double or a pair
 split by `cluster_gap`. A nonzero `local_count` raises the density around the centre,
 which narrows the window relative to the spread of the spectrum.
 */
struct SyntheticSpec {
    Index n = 500;
    double low = -1.0;
    double high = 1.0;
    std::uint64_t spectrum_seed = 7;
    std::uint64_t rotation_seed = 1;
    Index block = 12;
    double centre = 0.0;
    Index count = 13;
    SpectrumFeature feature = SpectrumFeature::none;
    double cluster_gap = 1e-8;
    double edge_offset = 0.5; // window edge position in the gap, measured from the outside neighbour
    Index local_count = 0;    // eigenvalues drawn from [centre - local_halfwidth, centre + local_halfwidth]
    double local_halfwidth = 0.1;
};

template <class Scalar>
struct SyntheticProblem {
    SyntheticSpec spec;
    SyntheticOperator<Scalar> op;
    double a = 0.0;
    double b = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    Index n_ev = 0;
    Block<Scalar> X_ref;
};

template <class Scalar>
SyntheticProblem<Scalar> make_synthetic_problem(const SyntheticSpec& spec) {
    if (spec.count < 1) throw std::invalid_argument("synthetic problem: count must be >= 1");
    if (!(spec.edge_offset > 0.0 && spec.edge_offset < 1.0))
        throw std::invalid_argument("synthetic problem: edge_offset must lie in (0, 1)");
    if (spec.local_count < 0 || spec.local_count > spec.n)
        throw std::invalid_argument("synthetic problem: local_count must lie in [0, n]");
    Rng rng(spec.spectrum_seed);
    std::uniform_real_distribution<double> uni(spec.low, spec.high);
    std::uniform_real_distribution<double> local(std::max(spec.low, spec.centre - spec.local_halfwidth),
                                                 std::min(spec.high, spec.centre + spec.local_halfwidth));
    RealVector lam(spec.n);
    for (Index i = 0; i < spec.n; ++i) lam(i) = i < spec.local_count ? local(rng) : uni(rng);
    std::sort(lam.data(), lam.data() + lam.size());

    const Index idx = static_cast<Index>(std::lower_bound(lam.data(), lam.data() + lam.size(), spec.centre) - lam.data());
    const Index lo = idx - (spec.count - 1) / 2;
    const Index hi = lo + spec.count - 1;
    if (lo < 1 || hi + 1 >= spec.n)
        throw std::invalid_argument("synthetic problem: window around the centre touches the spectrum ends");
    if (spec.feature == SpectrumFeature::double_eigenvalue) lam(idx + 1) = lam(idx);
    if (spec.feature == SpectrumFeature::cluster) lam(idx + 1) = lam(idx) + spec.cluster_gap;
    if (spec.feature != SpectrumFeature::none && !(idx + 1 <= hi && lam(idx + 1) < lam(idx + 2)))
        throw std::invalid_argument("synthetic problem: feature does not fit inside the window");

    SyntheticProblem<Scalar> p{spec, synthetic_spectrum<Scalar>(lam, spec.rotation_seed, spec.block),
                               0.0, 0.0, 0.0, 0.0, 0, {}};
    p.a = lam(lo - 1) + spec.edge_offset * (lam(lo) - lam(lo - 1));
    p.b = lam(hi + 1) - spec.edge_offset * (lam(hi + 1) - lam(hi));
    p.lambda_min = lam(0);
    p.lambda_max = lam(spec.n - 1);
    p.X_ref = p.op.eigenvectors_in(p.a, p.b);
    p.n_ev = p.X_ref.cols();
    return p;
}

} // namespace cjss::bench
