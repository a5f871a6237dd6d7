#include "support.hpp"

#include "cjss/bench/deviation.hpp"
#include "cjss/bench/synthetic.hpp"

#include <catch_amalgamated.hpp>

using namespace cjss;
using namespace cjss::test;
using Catch::Matchers::WithinAbs;

namespace {

RealVector scaled_range(Index n) {
    RealVector d(n);
    for (Index i = 0; i < n; ++i) d(i) = static_cast<double>(i + 1) / static_cast<double>(n);
    return d;
}

template <class Scalar>
bench::SyntheticProblem<Scalar> small_problem(bench::SpectrumFeature feature = bench::SpectrumFeature::none,
                                              Index n = 400, std::uint64_t spectrum_seed = 7) {
    bench::SyntheticSpec spec;
    spec.n = n;
    spec.centre = 0.1;
    spec.count = 9;
    spec.feature = feature;
    spec.spectrum_seed = spectrum_seed;
    return bench::make_synthetic_problem<Scalar>(spec);
}

template <class Scalar>
SpectralBounds exact_bounds(const bench::SyntheticProblem<Scalar>& p) {
    return {p.lambda_min, p.lambda_max, 0.0};
}

template <class Scalar>
SolverConfig config_for(const bench::SyntheticProblem<Scalar>& p, SolverMode mode, std::uint64_t seed) {
    SolverConfig c;
    c.a = p.a;
    c.b = p.b;
    c.M = 4;
    c.mode = mode;
    c.seed = seed;
    c.n_target = p.n_ev;
    c.max_restarts = 10;
    return c;
}

} // namespace

TEST_CASE("convergence test", "[driver]") {
    const auto ok = convergence_test(RealVector{{1e-13, 5e-13}}, 1.0, 1e-12, 2);
    CHECK(ok.converged);
    CHECK_FALSE(ok.over_count);
    CHECK_THAT(ok.max_relres, WithinAbs(5e-13, 1e-28));
    CHECK_FALSE(convergence_test(RealVector{{1e-14}}, 1.0, 1e-12, 2).converged);
    const auto over = convergence_test(RealVector{{1e-14, 1e-14, 1e-14}}, 1.0, 1e-12, 2);
    CHECK_FALSE(over.converged);
    CHECK(over.over_count);
    CHECK_FALSE(convergence_test(RealVector{{1e-13, 4e-12}}, 2.0, 1e-12, 2).converged);
    CHECK(convergence_test(RealVector{{1e-13, 4e-12}}, 8.0, 1e-12, 2).converged);
}

TEST_CASE("mode names", "[driver]") {
    for (auto m : {SolverMode::rr_tsvd, SolverMode::rr_residual, SolverMode::rrr})
        CHECK(parse_solver_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_solver_mode("rr"), std::invalid_argument);
}

TEMPLATE_TEST_CASE("restart block is the zeroth moment", "[driver]", double, cplx) {
    const auto A = random_sparse_hermitian<TestType>(120, 3, 4);
    const RealVector ev = hermitian_eig<TestType>(dense(A)).values;
    const SpectralBounds bounds{ev(0), ev(119), 0.0};
    const Block<TestType> V = gaussian_block<TestType>(120, 3, 5);

    const auto one = build_moments(A, bounds, V, make_filter_plan(map_window(bounds, -0.5, 0.5), 1, 100));
    CHECK(restart_matrix(one) == one.S);

    const auto whole = build_moments(A, bounds, V, make_filter_plan(map_window(bounds, ev(0), ev(119)), 3, 60));
    CHECK((restart_matrix(whole) - V).norm() <= 1e-12 * V.norm());

    // two restarts apply the scalar filter twice
    const auto plan = make_filter_plan(map_window(bounds, -0.3, 0.4), 2, 150);
    const auto first = build_moments(A, bounds, V, plan);
    const auto second = build_moments(A, bounds, restart_matrix(first), plan);
    const auto eig = hermitian_eig<TestType>(dense(A));
    RealVector f(120);
    for (Index i = 0; i < 120; ++i)
        f(i) = filter_direct(plan, 0, std::clamp(map_point(bounds, eig.values(i)), -1.0, 1.0));
    const Block<TestType> oracle = eig.vectors * (f.array().square().matrix().asDiagonal() * (eig.vectors.adjoint() * V));
    CHECK((restart_matrix(second) - oracle).norm() <= 1e-10 * oracle.norm());
}

TEMPLATE_TEST_CASE("five interior eigenvalues of a scaled diagonal", "[driver]", double, cplx) {
    const auto A = diagonal<TestType>(scaled_range(100));
    const SpectralBounds bounds{0.01, 1.0, 0.0};
    SolverConfig cfg;
    cfg.a = 0.305;
    cfg.b = 0.355; // 0.31 .. 0.35
    cfg.M = 4;
    cfg.n_target = 5;
    cfg.seed = 3;
    for (auto mode : {SolverMode::rrr, SolverMode::rr_residual, SolverMode::rr_tsvd}) {
        cfg.mode = mode;
        const auto rep = solve(A, bounds, cfg);
        INFO(to_string(mode));
        REQUIRE(rep.converged);
        REQUIRE(rep.values.size() == 5);
        for (Index i = 0; i < 5; ++i) CHECK_THAT(rep.values(i), WithinAbs(0.31 + 0.01 * static_cast<double>(i), 1e-12));
        CHECK(rep.relres.maxCoeff() < 1e-12);
        CHECK(rep.ell == 2);
        CHECK(rep.degree == degree_heuristic(rep.window, 4, 2.0, 5.0));
    }
}

TEST_CASE("empty window short-circuits on the eigenvalue count", "[driver]") {
    const auto A = diagonal<double>(scaled_range(100));
    const SpectralBounds bounds{0.01, 1.0, 0.0};
    SolverConfig cfg;
    cfg.a = 0.3051;
    cfg.b = 0.3089;
    cfg.count_samples = 32;
    const auto rep = solve(A, bounds, cfg);
    REQUIRE(rep.count_estimate);
    CHECK(rep.count_estimate->count == 0);
    CHECK(rep.converged);
    CHECK(rep.restarts == 0);
    CHECK(rep.values.size() == 0);
    CHECK(rep.vectors.cols() == 0);
}

TEST_CASE("solver configuration errors", "[driver]") {
    const auto A = diagonal<double>(scaled_range(50));
    const SpectralBounds bounds{0.02, 1.0, 0.0};
    SolverConfig cfg;
    cfg.a = 0.3;
    cfg.b = 0.4;
    cfg.n_target = 5;
    cfg.mode = SolverMode::rrr;
    CHECK_THROWS_AS(run_cjssrr(A, bounds, cfg), std::invalid_argument);
    cfg.tol = 0.0;
    CHECK_THROWS_AS(solve(A, bounds, cfg), std::invalid_argument);
    cfg.tol = 1e-12;
    cfg.M = 0;
    CHECK_THROWS_AS(solve(A, bounds, cfg), std::invalid_argument);
    cfg.M = 4;
    cfg.max_restarts = 0;
    CHECK_THROWS_AS(solve(A, bounds, cfg), std::invalid_argument);
    cfg.max_restarts = 2;
    cfg.a = 0.0; // below the bounds
    CHECK_THROWS_AS(solve(A, bounds, cfg), std::invalid_argument);
}

TEST_CASE("oversized subspace shrinks the block with a warning", "[driver]") {
    const auto A = diagonal<double>(scaled_range(20));
    SolverConfig cfg;
    cfg.a = 0.32;
    cfg.b = 0.58;
    cfg.M = 4;
    cfg.ell = 8;
    cfg.n_target = 5;
    cfg.max_restarts = 3;
    const auto rep = solve(A, SpectralBounds{0.05, 1.0, 0.0}, cfg);
    CHECK(rep.ell == 5);
    CHECK_FALSE(rep.warnings.empty());
    CHECK(rep.converged);
}

TEST_CASE("identical inputs give identical reports", "[driver]") {
    const auto p = small_problem<double>();
    const auto cfg = config_for(p, SolverMode::rrr, 11);
    const auto r1 = solve(p.op.A, exact_bounds(p), cfg);
    const auto r2 = solve(p.op.A, exact_bounds(p), cfg);
    CHECK(r1.values == r2.values);
    CHECK(r1.vectors == r2.vectors);
    CHECK(r1.relres == r2.relres);
    CHECK(r1.restarts == r2.restarts);
    CHECK(r1.n_in_trace == r2.n_in_trace);
    CHECK(r1.max_relres_trace == r2.max_relres_trace);
}

TEMPLATE_TEST_CASE("double eigenvalue is returned twice", "[driver]", double, cplx) {
    const auto p = small_problem<TestType>(bench::SpectrumFeature::double_eigenvalue);
    const auto rep = run_cjssrrr(p.op.A, exact_bounds(p), config_for(p, SolverMode::rrr, 2));
    REQUIRE(rep.converged);
    REQUIRE(rep.values.size() == p.n_ev);
    Index twice = 0;
    for (Index i = 0; i + 1 < rep.values.size(); ++i)
        if (std::abs(rep.values(i) - rep.values(i + 1)) <= 1e-12) ++twice;
    CHECK(twice == 1);
    CHECK(bench::subspace_deviation<TestType>(rep.vectors, p.X_ref) <= 1e-10);
    CHECK((rep.vectors.adjoint() * rep.vectors - Block<TestType>::Identity(p.n_ev, p.n_ev)).norm() <= 1e-10);
    CHECK(condition_number<TestType>(rep.vectors) < 200.0);
}

TEMPLATE_TEST_CASE("exact eigenvectors as the starting block converge at once", "[driver]", double, cplx) {
    const auto p = small_problem<TestType>();
    auto cfg = config_for(p, SolverMode::rrr, 0);
    cfg.M = 1;
    const Block<TestType> V0 = p.X_ref;
    const auto rep = solve(p.op.A, exact_bounds(p), cfg, {}, &V0);
    CHECK(rep.converged);
    CHECK(rep.restarts == 1);
    CHECK(rep.n_in_trace == std::vector<Index>{p.n_ev});
}

TEST_CASE("refined extraction needs no more restarts than the residual baseline", "[driver]") {
    Index rrr = 0, rr = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto p = small_problem<double>();
        auto cfg = config_for(p, SolverMode::rrr, seed);
        const auto a = solve(p.op.A, exact_bounds(p), cfg);
        cfg.mode = SolverMode::rr_residual;
        const auto b = solve(p.op.A, exact_bounds(p), cfg);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        rrr += a.restarts;
        rr += b.restarts;
    }
    CHECK(rrr <= rr);
}

TEMPLATE_TEST_CASE("restart invariants along a run", "[driver][property]", double, cplx) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto p = small_problem<TestType>(bench::SpectrumFeature::none, 400, 7 + seed);
        auto cfg = config_for(p, SolverMode::rrr, seed);
        cfg.stop_at_convergence = false;
        cfg.max_restarts = 6;
        std::vector<double> eps;
        std::optional<Block<TestType>> next;
        Index calls = 0;
        const auto rep = solve(p.op.A, exact_bounds(p), cfg, [&](const RestartState<TestType>& st) {
            ++calls;
            CHECK(st.V.cols() == st.moments.ell);
            if (next) CHECK(st.V == *next);
            next = restart_matrix(st.moments);
            eps.push_back(bench::subspace_deviation<TestType>(st.moments.U, p.X_ref));
        });
        CHECK(calls == rep.restarts);
        CHECK(rep.restarts <= cfg.max_restarts);
        // nonincreasing in most steps; steps inside the rounding floor count as flat
        Index ok = 0;
        for (std::size_t i = 1; i < eps.size(); ++i) ok += (eps[i] <= eps[i - 1] || eps[i] <= 1e-11) ? 1 : 0;
        CHECK(static_cast<double>(ok) >= 0.9 * static_cast<double>(eps.size() - 1));
    }
}

TEMPLATE_TEST_CASE("reported pairs are self-consistent", "[driver][property]", double, cplx) {
    const auto p = small_problem<TestType>(bench::SpectrumFeature::cluster);
    for (auto mode : {SolverMode::rrr, SolverMode::rr_residual}) {
        const auto cfg = config_for(p, mode, 5);
        const auto rep = solve(p.op.A, exact_bounds(p), cfg);
        INFO(to_string(mode));
        REQUIRE(rep.converged);
        CHECK(rep.values.size() == rep.n_in_trace.back());
        CHECK(rep.relres.maxCoeff() < cfg.tol);
        for (Index i = 0; i < rep.values.size(); ++i) {
            const Vector<TestType> x = rep.vectors.col(i);
            const Vector<TestType> Ax = p.op.A.apply(Block<TestType>(x)).col(0);
            const double rq = std::real(x.dot(Ax)) / x.squaredNorm();
            CHECK_THAT(rep.values(i), WithinAbs(rq, 1e-13));
            CHECK_THAT(rep.relres(i), WithinAbs((Ax - rep.values(i) * x).norm() / rep.normA, 1e-14));
            CHECK(rep.values(i) >= cfg.a - cfg.tol * rep.normA);
            CHECK(rep.values(i) <= cfg.b + cfg.tol * rep.normA);
        }
    }
}

TEST_CASE("norm conventions", "[driver]") {
    const auto p = small_problem<double>();
    auto cfg = config_for(p, SolverMode::rr_residual, 1);
    cfg.max_restarts = 1;
    const auto spectral = solve(p.op.A, exact_bounds(p), cfg);
    CHECK(spectral.normA == exact_bounds(p).abs_max());
    cfg.norm = NormConvention::one_inf_mean;
    const auto mean = solve(p.op.A, exact_bounds(p), cfg);
    CHECK_THAT(mean.normA, WithinAbs(std::sqrt(p.op.A.norm1() * p.op.A.norm_inf()), 1e-15));
}

TEST_CASE("unconverged runs stop at the restart limit", "[driver]") {
    const auto p = small_problem<double>();
    auto cfg = config_for(p, SolverMode::rrr, 1);
    cfg.max_restarts = 1;
    cfg.degree = 20;
    const auto rep = solve(p.op.A, exact_bounds(p), cfg);
    CHECK_FALSE(rep.converged);
    CHECK(rep.restarts == 1);
    CHECK(rep.n_in_trace.size() == 1);
}
