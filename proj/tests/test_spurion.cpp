#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <numeric>

using namespace cjss;
using namespace cjss::test;
using Catch::Matchers::WithinAbs;

namespace {

using Clusters = std::vector<std::vector<Index>>;

RealVector vec(std::initializer_list<double> v) {
    RealVector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Everything refined_removal reads, for a basis U of A.
template <class Scalar>
struct Fixture {
    Block<Scalar> U, AU;
    RitzSet<Scalar> ritz;
    ReducedPencil<Scalar> pencil;
    double normA = 1.0;

    Fixture(const SparseHermitian<Scalar>& A, Block<Scalar> basis)
        : U(dense_qr<Scalar>(basis).Q), AU(A.apply(U)), ritz(rayleigh_ritz<Scalar>(U, AU)),
          pencil(build_reduced_pencil<Scalar>(U, AU)), normA(A.norm1()) {}

    RemovalContext<Scalar> context(const RealVector& exterior) const {
        return RemovalContext<Scalar>{U, AU, ritz.B, pencil, exterior, normA};
    }
};

// A refined set whose columns are given directly; X = U Z as in the real pipeline.
template <class Scalar>
RefinedSet<Scalar> manual_set(const Block<Scalar>& U, const Block<Scalar>& Z, const RealVector& values,
                              const RealVector& resnorms) {
    RefinedSet<Scalar> s;
    s.base_values = values;
    s.values = values;
    s.Z = Z;
    s.X = U * Z;
    s.resnorms = resnorms;
    s.residuals = Block<Scalar>::Zero(U.rows(), Z.cols());
    s.min_singvals = resnorms;
    s.ambiguous.assign(static_cast<std::size_t>(Z.cols()), false);
    return s;
}

std::vector<Index> all_indices(Index p) {
    std::vector<Index> v(static_cast<std::size_t>(p));
    std::iota(v.begin(), v.end(), Index(0));
    return v;
}

} // namespace

TEST_CASE("clustering by the residual criterion", "[spurion]") {
    CHECK(cluster_refined(vec({1.0, 1.001}), vec({1e-3, 1e-3}), 1.0).clusters == Clusters{{0, 1}});
    CHECK(cluster_refined(vec({1.0, 1.1}), vec({1e-6, 1e-6}), 1.0).clusters == Clusters{{0}, {1}});
    // endpoints fail pairwise, joined through the middle value
    const auto chain = cluster_refined(vec({1.0, 1.0015, 1.003}), vec({1e-3, 1e-3, 1e-3}), 10.0);
    CHECK(chain.clusters == Clusters{{0, 1, 2}});
    CHECK(chain.active);
}

TEST_CASE("clustering waits for small residuals", "[spurion]") {
    const auto p = cluster_refined(vec({1.0, 1.0}), vec({0.5, 1e-6}), 1.0);
    CHECK_FALSE(p.active);
    CHECK(p.clusters == Clusters{{0}, {1}});
    CHECK(cluster_refined(vec({}), vec({}), 1.0).clusters.empty());
    CHECK_THROWS_AS(cluster_refined(vec({1.0}), vec({0.0}), 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("exact eigenpairs cluster into equality classes", "[spurion][property]") {
    const RealVector values = vec({3.0, 1.0, 2.0, 1.0, 3.0, 3.0, 4.0});
    const auto p = cluster_refined(values, RealVector::Zero(7), 5.0);
    CHECK(p.clusters == Clusters{{0, 4, 5}, {1, 3}, {2}, {6}});
    const auto labels = p.labels(7);
    for (Index i = 0; i < 7; ++i)
        for (Index j = 0; j < 7; ++j) CHECK((labels[i] == labels[j]) == (values(i) == values(j)));
}

TEST_CASE("partition is a disjoint cover", "[spurion][property]") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        RealVector values(12), res(12);
        for (Index i = 0; i < 12; ++i) values(i) = u(rng), res(i) = 0.02 * u(rng);
        const auto p = cluster_refined(values, res, 100.0);
        std::vector<int> seen(12, 0);
        for (const auto& c : p.clusters) {
            for (Index i : c) ++seen[static_cast<std::size_t>(i)];
            // each member of a larger cluster has an edge to another member
            if (c.size() < 2) continue;
            for (Index i : c) {
                bool linked = false;
                for (Index j : c)
                    linked = linked || (j != i && std::abs(values(i) - values(j)) <= res(i) + res(j));
                CHECK(linked);
            }
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    }
}

TEST_CASE("gap estimates", "[spurion]") {
    const RealVector v = vec({1.0, 1.001, 2.0});
    const auto p = cluster_refined(v, vec({1e-3, 1e-3, 1e-6}), 10.0);
    REQUIRE(p.size() == 2);
    const auto g = gap_estimates(p, v);
    CHECK_THAT(g.gap(0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(g.gap(1), WithinAbs(0.999, 1e-15));
    CHECK_THAT(g.gap(2), WithinAbs(0.999, 1e-15));
    CHECK_FALSE(g.fallback[0]);

    const RealVector w = vec({1.0, 2.0, 4.0});
    const auto three = gap_estimates(cluster_refined(w, RealVector::Zero(3), 10.0), w);
    CHECK(three.gap(1) == 1.0);
    CHECK(three.gap(2) == 2.0);

    ClusterPartition one;
    one.clusters = {{0}};
    const auto fb = gap_estimates(one, vec({1.0}), vec({3.0, -4.0}));
    CHECK(fb.gap(0) == 2.0);
    CHECK(fb.fallback[0]);
    CHECK(fb.available[0]);
    CHECK_FALSE(gap_estimates(one, vec({1.0})).available[0]);
}

TEST_CASE("identical primitive vectors leave rank one", "[spurion]") {
    const auto A = diagonal<double>(vec({1.0, 2.0, 3.0, 4.0, 5.0}));
    const Fixture<double> f(A, Block<double>(Block<double>::Identity(5, 3)));
    Block<double> Z = Block<double>::Zero(3, 2);
    Z(0, 0) = Z(0, 1) = 1.0;
    const auto set = manual_set<double>(f.U, Z, vec({1.0, 1.0}), vec({1e-8, 2e-8}));
    const auto r = refined_removal(set, f.context(vec({2.0, 3.0})), {1.0, 1.0, false});
    REQUIRE(r.report.clusters.size() == 1);
    const auto& c = r.report.clusters[0];
    CHECK(c.sigma(1) <= 1e-15);
    CHECK(c.tau > c.sigma(1));
    CHECK(c.rank == 1);
    CHECK(r.report.retained == std::vector<Index>{0}); // smaller residual wins
    CHECK(r.report.removed == std::vector<Index>{1});
    CHECK(r.report.n_in == 1);

    // the pencil sees one small direction near 1 as well
    const auto full = refined_removal(set, f.context(vec({2.0, 3.0})));
    CHECK(full.report.clusters[0].pencil_count == 1);
    CHECK(full.report.n_in == 1);
}

TEST_CASE("orthonormal primitive vectors are all kept", "[spurion]") {
    const auto A = diagonal<double>(vec({1.0, 1.0, 1.0, 4.0, 5.0}));
    const Fixture<double> f(A, Block<double>(Block<double>::Identity(5, 3)));
    const Block<double> Z = Block<double>::Identity(3, 3);
    const auto set = manual_set<double>(f.U, Z, vec({1.0, 1.0, 1.0}), vec({1e-12, 1e-12, 1e-12}));
    const auto r = refined_removal(set, f.context(vec({4.0})), {1.0, 1.0, false});
    REQUIRE(r.report.clusters.size() == 1);
    CHECK((r.report.clusters[0].sigma.array() - 1.0).abs().maxCoeff() <= 1e-15);
    CHECK(r.report.clusters[0].rank == 3);
    CHECK(r.report.n_in == 3);
    CHECK(r.report.removed.empty());
}

TEST_CASE("singletons and unavailable gaps are kept", "[spurion]") {
    const auto A = diagonal<double>(vec({1.0, 2.0, 3.0, 4.0}));
    const Fixture<double> f(A, Block<double>(Block<double>::Identity(4, 2)));
    Block<double> Z = Block<double>::Zero(2, 2);
    Z(0, 0) = Z(0, 1) = 1.0;

    const auto skipped = refined_removal(manual_set<double>(f.U, Z, vec({1.0, 1.0}), vec({1e-9, 1e-9})),
                                         f.context(RealVector()));
    CHECK(skipped.report.clusters[0].skipped);
    CHECK(skipped.report.n_in == 2);

    Z(1, 1) = 1.0;
    Z(0, 1) = 0.0;
    const auto apart = refined_removal(manual_set<double>(f.U, Z, vec({1.0, 2.0}), vec({1e-9, 1e-9})),
                                       f.context(RealVector()));
    CHECK(apart.report.clusters.size() == 2);
    CHECK(apart.report.retained == std::vector<Index>{0, 1});
    CHECK_THROWS_AS(refined_removal(manual_set<double>(f.U, Z, vec({1.0, 2.0}), vec({1e-9, 1e-9})),
                                    f.context(RealVector()), {0.0, 1.0, true}),
                    std::invalid_argument);
}

TEMPLATE_TEST_CASE("double eigenvalue with a near duplicate shift", "[spurion]", double, cplx) {
    // A has 2.0 twice; the basis holds both eigenvectors, slightly polluted, and one far direction
    const auto A = diagonal<TestType>(vec({2.0, 2.0, 5.0, 7.0, 9.0, 11.0}));
    Block<TestType> basis = Block<TestType>::Zero(6, 3);
    basis(0, 0) = basis(1, 1) = basis(2, 2) = TestType(1);
    basis(3, 0) = TestType(1e-4);
    basis(4, 1) = TestType(2e-4);
    basis(5, 2) = TestType(1e-3);
    const Fixture<TestType> f(A, basis);
    const RealVector& theta = f.ritz.values;
    REQUIRE(theta(1) - theta(0) < 1e-6);
    const RealVector shifts = vec({theta(0), 0.5 * (theta(0) + theta(1)), theta(1)});
    const auto set = refine_set<TestType>(f.U, f.AU, f.pencil, shifts);
    const auto part = cluster_refined(set, f.normA);
    REQUIRE(part.clusters == Clusters{{0, 1, 2}});

    const auto r = refined_removal(set, f.context(vec({theta(2)})));
    REQUIRE(r.report.clusters.size() == 1);
    const auto& c = r.report.clusters[0];
    CHECK(c.rank <= 2);
    CHECK(c.pencil_count == 2);
    CHECK(c.retained == 2);
    CHECK(r.report.n_in == 2);
    CHECK((r.pairs.X.adjoint() * r.pairs.X - Block<TestType>::Identity(2, 2)).norm() <= 1e-12);
    for (Index i = 0; i < 2; ++i) CHECK_THAT(r.pairs.values(i), WithinAbs(2.0, 1e-6));
    // both true eigenvectors lie in the span of what was kept
    const Block<TestType> E = Block<TestType>::Identity(6, 2);
    CHECK((E - r.pairs.X * (r.pairs.X.adjoint() * E)).norm() <= 1e-3);
}

TEMPLATE_TEST_CASE("retained count follows the reported rank", "[spurion][property]", double, cplx) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto A = random_sparse_hermitian<TestType>(120, 4, seed);
        const auto eig = hermitian_eig<TestType>(dense(A));
        Block<TestType> basis(120, 8);
        basis << eig.vectors.middleCols(50, 6), gaussian_block<TestType>(120, 2, seed + 3);
        basis.leftCols(6) += 1e-7 * gaussian_block<TestType>(120, 6, seed + 4);
        const Fixture<TestType> f(A, basis);
        const double lo = eig.values(50), hi = eig.values(55);
        std::vector<Index> potential;
        RealVector exterior(0);
        for (Index i = 0; i < f.ritz.values.size(); ++i) {
            const double v = f.ritz.values(i);
            if (v >= lo - 1e-6 && v <= hi + 1e-6) {
                potential.push_back(i);
            } else {
                exterior.conservativeResize(exterior.size() + 1);
                exterior(exterior.size() - 1) = v;
            }
        }
        RealVector shifts(static_cast<Index>(potential.size()));
        for (std::size_t c = 0; c < potential.size(); ++c) shifts(static_cast<Index>(c)) = f.ritz.values(potential[c]);
        const auto set = refine_set<TestType>(f.U, f.AU, f.pencil, shifts);

        for (bool complete : {false, true}) {
            const auto r = refined_removal(set, f.context(exterior), {1.0, 1.0, complete});
            std::vector<Index> cover = r.report.retained;
            cover.insert(cover.end(), r.report.removed.begin(), r.report.removed.end());
            cover.insert(cover.end(), r.report.replaced.begin(), r.report.replaced.end());
            std::sort(cover.begin(), cover.end());
            CHECK(cover == all_indices(set.size()));
            Index total = 0;
            for (const auto& c : r.report.clusters) {
                total += c.retained;
                if (c.skipped || c.members.size() == 1) continue;
                CHECK(c.rank == (c.sigma.array() > c.tau).count());
                CHECK(c.retained == (complete ? std::max(c.rank, c.pencil_count) : c.rank));
            }
            CHECK(total == r.report.n_in);
            CHECK(r.pairs.size() == r.report.n_in);
        }
    }
}

TEMPLATE_TEST_CASE("removal does not depend on the order of the refined set", "[spurion][property]", double, cplx) {
    const auto A = random_sparse_hermitian<TestType>(100, 4, 9);
    const auto eig = hermitian_eig<TestType>(dense(A));
    Block<TestType> basis(100, 7);
    basis << eig.vectors.middleCols(40, 4), gaussian_block<TestType>(100, 3, 2);
    basis.leftCols(4) += 1e-8 * gaussian_block<TestType>(100, 4, 3);
    const Fixture<TestType> f(A, basis);
    const RealVector shifts = f.ritz.values;
    const auto set = refine_set<TestType>(f.U, f.AU, f.pencil, shifts);
    const auto ref = refined_removal(set, f.context(RealVector()), {1.0, 1.0, false});

    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        auto perm = all_indices(set.size());
        std::shuffle(perm.begin(), perm.end(), rng);
        RefinedSet<TestType> q = set;
        for (Index c = 0; c < set.size(); ++c) {
            const Index i = perm[static_cast<std::size_t>(c)];
            q.base_values(c) = set.base_values(i);
            q.values(c) = set.values(i);
            q.resnorms(c) = set.resnorms(i);
            q.min_singvals(c) = set.min_singvals(i);
            q.Z.col(c) = set.Z.col(i);
            q.X.col(c) = set.X.col(i);
            q.residuals.col(c) = set.residuals.col(i);
        }
        const auto r = refined_removal(q, f.context(RealVector()), {1.0, 1.0, false});
        REQUIRE(r.pairs.size() == ref.pairs.size());
        CHECK(r.pairs.values == ref.pairs.values);
        for (Index c = 0; c < r.pairs.size(); ++c)
            CHECK(alignment<TestType>(r.pairs.X.col(c), ref.pairs.X.col(c)) >= 1.0 - 1e-14);
    }
}

TEST_CASE("residual removal thresholds", "[spurion]") {
    RitzSet<double> ritz;
    ritz.values = vec({0.0, 0.5, 0.7});
    ritz.resnorms = vec({3.0, 2e-5, 2e-3});
    ritz.Y = Block<double>::Identity(3, 3);
    ritz.X = Block<double>::Identity(4, 3);
    const std::vector<Index> potential{1, 2};
    const auto strict = residual_removal(ritz, potential, 2.0, 1e-4);
    CHECK(strict.report.retained == std::vector<Index>{0});
    CHECK(strict.report.removed == std::vector<Index>{1});
    CHECK(strict.pairs.values == vec({0.5}));
    CHECK(residual_removal(ritz, potential, 2.0, 1e-2).report.n_in == 2);
    const auto none = residual_removal(ritz, potential, 2.0, 1e-6);
    CHECK(none.report.n_in == 0);
    CHECK(none.pairs.X.cols() == 0);
    CHECK_THROWS_AS(residual_removal(ritz, potential, 2.0, 0.0), std::invalid_argument);
}

TEMPLATE_TEST_CASE("truncated SVD baseline", "[spurion]", double, cplx) {
    const auto A = random_sparse_hermitian<TestType>(80, 3, 1);
    const auto bounds = estimate_bounds(A);
    const auto window = map_window(bounds, -0.6, 0.6);
    const auto plan = make_filter_plan(window, 3, 150);
    const auto m = build_moments(A, bounds, gaussian_block<TestType>(80, 4, 2), plan);

    // no truncation: same Ritz values as the full orthonormal basis of S
    const auto full = tsvd_removal(m.S, A, window, 0.0);
    const auto ritz = rayleigh_ritz(A, m.U);
    const auto pot = select_potential(ritz, window);
    CHECK(full.report.subspace_dim == 12);
    REQUIRE(full.pairs.size() == static_cast<Index>(pot.size()));
    for (std::size_t c = 0; c < pot.size(); ++c)
        CHECK_THAT(full.pairs.values(static_cast<Index>(c)), WithinAbs(ritz.values(pot[c]), 1e-10));

    // duplicated columns shrink the basis by exactly the duplication count
    Block<TestType> S(80, 15);
    S << m.S, m.S.leftCols(3);
    const auto dup = tsvd_removal(S, A, window, 1e-12);
    CHECK(dup.report.subspace_dim == 12);
    CHECK(dup.report.threshold == 1e-12);
    CHECK_THROWS_AS(tsvd_removal(S, A, window, -1.0), std::invalid_argument);
}

TEST_CASE("removal mode names", "[spurion]") {
    CHECK(std::string(to_string(RemovalMode::refined)) == "refined");
    CHECK(std::string(to_string(RemovalMode::tsvd)) == "tsvd");
    CHECK(std::string(to_string(RemovalMode::residual)) == "residual");
}
