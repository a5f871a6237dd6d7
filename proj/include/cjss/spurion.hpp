#pragma once

#include "cjss/cj_filter.hpp"
#include "cjss/core.hpp"
#include "cjss/dense.hpp"
#include "cjss/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace cjss {

enum class RemovalMode { refined, tsvd, residual };

inline const char* to_string(RemovalMode m) {
    switch (m) {
    case RemovalMode::refined: return "refined";
    case RemovalMode::tsvd: return "tsvd";
    case RemovalMode::residual: return "residual";
    }
    return "unknown";
}

struct ClusterPartition {
    std::vector<std::vector<Index>> clusters; // ascending members, clusters ordered by first member
    bool active = false; // false: residual gate not met, every index is a singleton

    Index size() const { return static_cast<Index>(clusters.size()); }
    std::vector<Index> labels(Index p) const {
        std::vector<Index> out(static_cast<std::size_t>(p), -1);
        for (std::size_t c = 0; c < clusters.size(); ++c)
            for (Index i : clusters[c]) out[static_cast<std::size_t>(i)] = static_cast<Index>(c);
        return out;
    }
};

/// Relative residual below which clustering and removal switch on.
inline constexpr double cluster_activation = 1e-3;

/**
 Connected components of the graph with an edge (i, j) when
 |lambda_i - lambda_j| <= kappa (r_i + r_j). Only formed once every relative residual
 r_i / normA is at most the activation level; before that all indices are singletons.
 */
inline ClusterPartition cluster_refined(const RealVector& values, const RealVector& resnorms, double normA,
                                        double kappa = 1.0, double activation = cluster_activation) {
    if (kappa < 1.0) throw std::invalid_argument("cluster_refined: kappa must be >= 1");
    const Index p = values.size();
    ClusterPartition out;
    out.active = p > 0 && (resnorms.array() / normA).maxCoeff() <= activation;

    std::vector<Index> parent(static_cast<std::size_t>(p));
    std::iota(parent.begin(), parent.end(), Index(0));
    auto find = [&](Index i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            auto& up = parent[static_cast<std::size_t>(i)];
            up = parent[static_cast<std::size_t>(up)];
            i = up;
        }
        return i;
    };
    if (out.active) {
        for (Index i = 0; i < p; ++i)
            for (Index j = i + 1; j < p; ++j)
                if (std::abs(values(i) - values(j)) <= kappa * (resnorms(i) + resnorms(j))) {
                    const Index ri = find(i);
                    const Index rj = find(j);
                    if (ri != rj) parent[static_cast<std::size_t>(std::max(ri, rj))] = std::min(ri, rj);
                }
    }
    std::vector<Index> slot(static_cast<std::size_t>(p), -1);
    for (Index i = 0; i < p; ++i) {
        const Index r = find(i);
        auto& s = slot[static_cast<std::size_t>(r)];
        if (s < 0) {
            s = static_cast<Index>(out.clusters.size());
            out.clusters.emplace_back();
        }
        out.clusters[static_cast<std::size_t>(s)].push_back(i);
    }
    return out;
}

template <class Scalar>
ClusterPartition cluster_refined(const RefinedSet<Scalar>& refined, double normA, double kappa = 1.0) {
    return cluster_refined(refined.values, refined.resnorms, normA, kappa);
}

struct GapEstimates {
    RealVector gap;              // per index; infinity when unavailable
    std::vector<bool> fallback;  // per index: gap taken from exterior Ritz values
    std::vector<bool> available; // per index
};

/**
 Distance from each value to the nearest value in another cluster. With a single
 cluster the nearest window-exterior Ritz value is used instead; with neither the
 gap is unavailable.
 */
inline GapEstimates gap_estimates(const ClusterPartition& partition, const RealVector& values,
                                  const RealVector& exterior = RealVector()) {
    const Index p = values.size();
    GapEstimates out;
    out.gap = RealVector::Constant(p, std::numeric_limits<double>::infinity());
    out.fallback.assign(static_cast<std::size_t>(p), false);
    out.available.assign(static_cast<std::size_t>(p), false);
    const auto label = partition.labels(p);
    const bool single = partition.size() < 2;
    for (Index i = 0; i < p; ++i) {
        double g = std::numeric_limits<double>::infinity();
        if (!single) {
            for (Index j = 0; j < p; ++j)
                if (label[static_cast<std::size_t>(j)] != label[static_cast<std::size_t>(i)])
                    g = std::min(g, std::abs(values(j) - values(i)));
        } else {
            for (Index j = 0; j < exterior.size(); ++j) g = std::min(g, std::abs(exterior(j) - values(i)));
            out.fallback[static_cast<std::size_t>(i)] = true;
        }
        out.gap(i) = g;
        out.available[static_cast<std::size_t>(i)] = std::isfinite(g) && g > 0.0;
    }
    return out;
}

enum class ClusterBasis { members, subspace };

struct ClusterReport {
    std::vector<Index> members;
    RealVector sigma;          // singular values of the primitive refined block
    double tau = 0.0;          // rank threshold
    Index rank = 0;            // count of sigma above tau
    Index pencil_count = -1;   // small singular values of the shifted pencil, -1 if not computed
    Index retained = 0;        // vectors kept for this cluster
    double gap = 0.0;
    bool gap_fallback = false;
    bool skipped = false;      // gap unavailable, cluster kept untouched
    ClusterBasis basis = ClusterBasis::members;
};

struct RemovalReport {
    RemovalMode mode = RemovalMode::refined;
    std::vector<Index> retained; // indices into the potential list kept as they are
    std::vector<Index> removed;
    std::vector<Index> replaced; // members of clusters re-based onto a subspace basis
    std::vector<ClusterReport> clusters;
    RealVector gaps;
    bool active = false;
    Index n_in = 0;
    double threshold = 0.0; // delta or trunc_tol for the baseline modes
    Index subspace_dim = 0; // tsvd: retained basis dimension
};

/// Approximate eigenpairs surviving removal.
template <class Scalar>
struct RetainedPairs {
    RealVector values;
    Block<Scalar> Z; // primitive vectors in the current basis (empty for tsvd)
    Block<Scalar> X;
    RealVector resnorms;

    Index size() const { return values.size(); }
};

template <class Scalar>
struct RemovalResult {
    RemovalReport report;
    RetainedPairs<Scalar> pairs;
};

struct RefinedRemovalOptions {
    double C = 1.0;
    double kappa = 1.0;
    /// Also count directions with small singular values of the pencil at the cluster centre
    /// and, for clusters keeping two or more vectors, retain an orthonormal basis of them.
    bool complete_multiplicity = true;
};

/// Quantities shared by the removal step of one outer iteration.
template <class Scalar>
struct RemovalContext {
    const Block<Scalar>& U;
    const Block<Scalar>& AU;
    const Block<Scalar>& B; // U^H A U
    const ReducedPencil<Scalar>& pencil;
    RealVector exterior;    // Ritz values outside the window
    double normA = 1.0;
};

namespace detail {

template <class Scalar>
void append_pairs(RetainedPairs<Scalar>& out, const RealVector& values, const Block<Scalar>& Z,
                  const Block<Scalar>& X, const RealVector& resnorms) {
    const Index old = out.size();
    const Index add = values.size();
    if (add == 0) return;
    out.values.conservativeResize(old + add);
    out.values.tail(add) = values;
    out.resnorms.conservativeResize(old + add);
    out.resnorms.tail(add) = resnorms;
    if (Z.size()) {
        out.Z.conservativeResize(Z.rows(), old + add);
        out.Z.rightCols(add) = Z;
    }
    out.X.conservativeResize(X.rows(), old + add);
    out.X.rightCols(add) = X;
}

template <class Scalar>
void append_members(RetainedPairs<Scalar>& out, const RefinedSet<Scalar>& refined, const std::vector<Index>& idx) {
    const Index q = static_cast<Index>(idx.size());
    RealVector values(q), res(q);
    Block<Scalar> Z(refined.Z.rows(), q), X(refined.X.rows(), q);
    for (Index c = 0; c < q; ++c) {
        const Index i = idx[static_cast<std::size_t>(c)];
        values(c) = refined.values(i);
        res(c) = refined.resnorms(i);
        Z.col(c) = refined.Z.col(i);
        X.col(c) = refined.X.col(i);
    }
    append_pairs(out, values, Z, X, res);
}

template <class Scalar>
void sort_pairs(RetainedPairs<Scalar>& p) {
    std::vector<Index> order(static_cast<std::size_t>(p.size()));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return p.values(a) < p.values(b); });
    RetainedPairs<Scalar> s;
    s.values.resize(p.size());
    s.resnorms.resize(p.size());
    s.X.resize(p.X.rows(), p.size());
    if (p.Z.size()) s.Z.resize(p.Z.rows(), p.size());
    for (Index c = 0; c < p.size(); ++c) {
        const Index i = order[static_cast<std::size_t>(c)];
        s.values(c) = p.values(i);
        s.resnorms(c) = p.resnorms(i);
        s.X.col(c) = p.X.col(i);
        if (p.Z.size()) s.Z.col(c) = p.Z.col(i);
    }
    p = std::move(s);
}

} // namespace detail

/**
 Refined removal: per cluster, keep as many refined vectors as the numerical rank of the
 primitive block Z_i under tau_i = sqrt(n_i) max_j C ||r_ij|| / g_ij, dropping those with
 the largest residuals. Singletons are always kept.

 With complete_multiplicity, a cluster also counts the singular values of H - lambda_c J
 (lambda_c the cluster mean) below half the distance to the rest of the spectrum; these
 bound the number of eigenvalues near lambda_c from below. When the cluster keeps two or
 more vectors they are replaced by the corresponding right singular vectors, rotated by
 a Rayleigh-Ritz step inside their span, which keeps the retained set orthonormal where
 refined vectors for neighbouring shifts would collapse onto one direction.
 */
template <class Scalar>
RemovalResult<Scalar> refined_removal(const RefinedSet<Scalar>& refined, const RemovalContext<Scalar>& ctx,
                                      const RefinedRemovalOptions& opt = {}) {
    if (opt.C <= 0.0) throw std::invalid_argument("refined_removal: C must be positive");
    RemovalResult<Scalar> out;
    out.report.mode = RemovalMode::refined;

    const ClusterPartition part = cluster_refined(refined.values, refined.resnorms, ctx.normA, opt.kappa);
    out.report.active = part.active;
    const GapEstimates gaps = gap_estimates(part, refined.values, ctx.exterior);
    out.report.gaps = gaps.gap;

    for (const auto& members : part.clusters) {
        ClusterReport cr;
        cr.members = members;
        const Index nh = static_cast<Index>(members.size());
        std::vector<Index> by_residual = members;
        std::stable_sort(by_residual.begin(), by_residual.end(),
                         [&](Index a, Index b) { return refined.resnorms(a) < refined.resnorms(b); });

        if (nh == 1) {
            cr.rank = cr.retained = 1;
            cr.sigma = RealVector::Ones(1);
            out.report.retained.push_back(members[0]);
            out.report.clusters.push_back(std::move(cr));
            continue;
        }

        bool available = true;
        double ratio = 0.0;
        double gmin = std::numeric_limits<double>::infinity();
        for (Index i : members) {
            available = available && gaps.available[static_cast<std::size_t>(i)];
            gmin = std::min(gmin, gaps.gap(i));
            ratio = std::max(ratio, opt.C * refined.resnorms(i) / gaps.gap(i));
            cr.gap_fallback = cr.gap_fallback || gaps.fallback[static_cast<std::size_t>(i)];
        }
        cr.gap = gmin;
        Block<Scalar> Zc(refined.Z.rows(), nh);
        for (Index c = 0; c < nh; ++c) Zc.col(c) = refined.Z.col(members[static_cast<std::size_t>(c)]);
        cr.sigma = singular_values<Scalar>(Zc);
        if (!available) {
            cr.skipped = true;
            cr.retained = nh;
            cr.rank = nh;
            for (Index i : members) out.report.retained.push_back(i);
            out.report.clusters.push_back(std::move(cr));
            continue;
        }
        cr.tau = std::sqrt(static_cast<double>(nh)) * ratio;
        cr.rank = (cr.sigma.array() > cr.tau).count();
        cr.retained = cr.rank;

        if (opt.complete_multiplicity) {
            double centre = 0.0;
            for (Index i : members) centre += refined.values(i);
            centre /= static_cast<double>(nh);
            double gap_c = gmin;
            for (Index j = 0; j < ctx.exterior.size(); ++j) gap_c = std::min(gap_c, std::abs(ctx.exterior(j) - centre));
            auto svd = dense_svd<Scalar>(ctx.pencil.shifted(centre), false);
            const Index q = ctx.pencil.J.cols();
            // Singular values of the pencil, smallest first, limited to the cluster size.
            Index m = 0;
            for (Index t = 0; t < std::min(nh, q); ++t) {
                const Index k = q - 1 - t;
                const double s = k < svd.sigma.size() ? svd.sigma(k) : 0.0;
                if (s <= 0.5 * gap_c) ++m;
            }
            cr.pencil_count = m;
            cr.retained = std::max(cr.rank, m);
            if (cr.retained >= 2) {
                cr.basis = ClusterBasis::subspace;
                Block<Scalar> W = svd.V.rightCols(cr.retained);
                const Block<Scalar> G = W.adjoint() * ctx.B * W;
                const auto eig = hermitian_eig<Scalar>(G);
                W = W * eig.vectors;
                Block<Scalar> X, res;
                RealVector vals, rn;
                lift_pairs<Scalar>(ctx.U, ctx.AU, W, X, vals, res, rn);
                detail::append_pairs(out.pairs, vals, W, X, rn);
                for (Index i : members) out.report.replaced.push_back(i);
                out.report.clusters.push_back(std::move(cr));
                continue;
            }
        }
        for (Index c = 0; c < nh; ++c) {
            const Index i = by_residual[static_cast<std::size_t>(c)];
            (c < cr.retained ? out.report.retained : out.report.removed).push_back(i);
        }
        out.report.clusters.push_back(std::move(cr));
    }

    std::sort(out.report.retained.begin(), out.report.retained.end());
    std::sort(out.report.removed.begin(), out.report.removed.end());
    std::sort(out.report.replaced.begin(), out.report.replaced.end());
    detail::append_members(out.pairs, refined, out.report.retained);
    detail::sort_pairs(out.pairs);
    out.report.n_in = out.pairs.size();
    return out;
}

/// Keep potential Ritz pairs whose residual relative to normA is below delta.
template <class Scalar>
RemovalResult<Scalar> residual_removal(const RitzSet<Scalar>& ritz, const std::vector<Index>& potential,
                                       double normA, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("residual_removal: delta must be positive");
    RemovalResult<Scalar> out;
    out.report.mode = RemovalMode::residual;
    out.report.threshold = delta;
    for (std::size_t c = 0; c < potential.size(); ++c) {
        const Index i = potential[c];
        (ritz.resnorms(i) / normA < delta ? out.report.retained : out.report.removed).push_back(static_cast<Index>(c));
    }
    const Index q = static_cast<Index>(out.report.retained.size());
    out.pairs.values.resize(q);
    out.pairs.resnorms.resize(q);
    out.pairs.Z.resize(ritz.Y.rows(), q);
    out.pairs.X.resize(ritz.X.rows(), q);
    for (Index c = 0; c < q; ++c) {
        const Index i = potential[static_cast<std::size_t>(out.report.retained[static_cast<std::size_t>(c)])];
        out.pairs.values(c) = ritz.values(i);
        out.pairs.resnorms(c) = ritz.resnorms(i);
        out.pairs.Z.col(c) = ritz.Y.col(i);
        out.pairs.X.col(c) = ritz.X.col(i);
    }
    out.report.n_in = q;
    return out;
}

/**
 Truncated-SVD baseline: Rayleigh-Ritz on the left singular vectors of S whose singular
 values exceed trunc_tol * sigma_max, keeping every Ritz value in the window.
 */
template <HermitianOperator Op>
RemovalResult<typename Op::Scalar> tsvd_removal(const Block<typename Op::Scalar>& S, const Op& A,
                                                const Window& window, double trunc_tol) {
    using Scalar = typename Op::Scalar;
    if (trunc_tol < 0.0) throw std::invalid_argument("tsvd_removal: trunc_tol must be >= 0");
    auto svd = dense_svd<Scalar>(S, true);
    const double cut = trunc_tol * svd.sigma(0);
    Index keep = 0;
    while (keep < svd.sigma.size() && svd.sigma(keep) > cut) ++keep;
    const Block<Scalar> Ut = svd.U.leftCols(keep);
    const auto ritz = rayleigh_ritz(A, Ut);
    const auto potential = select_potential(ritz, window);

    RemovalResult<Scalar> out;
    out.report.mode = RemovalMode::tsvd;
    out.report.threshold = trunc_tol;
    out.report.subspace_dim = keep;
    const Index q = static_cast<Index>(potential.size());
    out.pairs.values.resize(q);
    out.pairs.resnorms.resize(q);
    out.pairs.X.resize(S.rows(), q);
    for (Index c = 0; c < q; ++c) {
        const Index i = potential[static_cast<std::size_t>(c)];
        out.report.retained.push_back(c);
        out.pairs.values(c) = ritz.values(i);
        out.pairs.resnorms(c) = ritz.resnorms(i);
        out.pairs.X.col(c) = ritz.X.col(i);
    }
    out.report.n_in = q;
    return out;
}

} // namespace cjss
