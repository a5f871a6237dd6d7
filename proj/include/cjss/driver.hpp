#pragma once

#include "cjss/bounds.hpp"
#include "cjss/cj_filter.hpp"
#include "cjss/core.hpp"
#include "cjss/moments.hpp"
#include "cjss/projection.hpp"
#include "cjss/random.hpp"
#include "cjss/spurion.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cjss {

enum class SolverMode { rr_tsvd, rr_residual, rrr };

inline const char* to_string(SolverMode m) {
    switch (m) {
    case SolverMode::rr_tsvd: return "rr-tsvd";
    case SolverMode::rr_residual: return "rr-residual";
    case SolverMode::rrr: return "rrr";
    }
    return "unknown";
}

inline SolverMode parse_solver_mode(const std::string& s) {
    if (s == "rr-tsvd") return SolverMode::rr_tsvd;
    if (s == "rr-residual") return SolverMode::rr_residual;
    if (s == "rrr") return SolverMode::rrr;
    throw std::invalid_argument("unknown solver mode '" + s + "' (expected rr-tsvd, rr-residual or rrr)");
}

/// Denominator of the relative residual.
enum class NormConvention {
    spectral_bound, // max(|lambda_min|, |lambda_max|) from the bounds
    one_inf_mean,   // sqrt(||A||_1 ||A||_inf)
};

inline const char* to_string(NormConvention c) {
    return c == NormConvention::spectral_bound ? "spectral-bound" : "one-inf-mean";
}

struct SolverConfig {
    double a = 0.0;
    double b = 0.0;
    Index M = 8;
    Index ell = 0;               // 0: ceil(1.5 n_target / M)
    std::optional<Index> degree; // explicit d; otherwise the heuristic with D, K
    double D = 2.0;
    double K = 5.0;
    double tol = 1e-12;
    SolverMode mode = SolverMode::rrr;
    double delta = 1e-4;
    double trunc_tol = 1e-12;
    RefinedRemovalOptions refined;
    Index max_restarts = 10;
    std::uint64_t seed = 0;
    std::optional<Index> n_target; // otherwise estimated by the trace estimator
    Index count_samples = 64;
    NormConvention norm = NormConvention::spectral_bound;
    bool stop_at_convergence = true;
};

struct ConvergenceStatus {
    bool converged = false;
    bool over_count = false;
    Index count = 0;
    double max_relres = 0.0;
};

/// Converged iff count == n_target and every relative residual is below tol; more is an anomaly.
inline ConvergenceStatus convergence_test(const RealVector& resnorms, double normA, double tol, Index n_target) {
    ConvergenceStatus s;
    s.count = resnorms.size();
    s.max_relres = s.count ? resnorms.maxCoeff() / normA : 0.0;
    s.over_count = s.count > n_target;
    s.converged = !s.over_count && s.count >= n_target && s.max_relres < tol;
    return s;
}

/// First ell columns of S, i.e. the zeroth moment.
template <class Scalar>
Block<Scalar> restart_matrix(const MomentBlock<Scalar>& moments) {
    return moments.S.leftCols(moments.ell);
}

struct PhaseTimes {
    double moments = 0.0;
    double qr = 0.0;
    double projection = 0.0;
    double removal = 0.0;
};

/// View of one outer iteration handed to observers.
template <class Scalar>
struct RestartState {
    Index k = 0;
    const Block<Scalar>& V;
    const MomentBlock<Scalar>& moments;
    const RitzSet<Scalar>& ritz;
    const std::vector<Index>& potential;
    const RefinedSet<Scalar>* refined; // rrr only, null when no potential values
    const RemovalResult<Scalar>& removal;
    ConvergenceStatus status;
    double normA = 1.0;
};

template <class Scalar>
struct SolveReport {
    SolverConfig config;
    SpectralBounds bounds;
    Window window;
    Index degree = 0;
    Index ell = 0;
    Index n_target = 0;
    std::optional<EigencountEstimate> count_estimate;
    double normA = 1.0;
    NormConvention norm = NormConvention::spectral_bound;

    RealVector values;
    Block<Scalar> vectors;
    RealVector relres;
    bool converged = false;
    Index restarts = 0;
    std::vector<Index> n_in_trace;
    std::vector<double> max_relres_trace;
    std::vector<RemovalReport> removal_trace;
    std::vector<std::string> anomalies;
    std::vector<std::string> warnings;
    PhaseTimes times;
    double wall_seconds = 0.0;
};

template <class Scalar>
using RestartObserver = std::function<void(const RestartState<Scalar>&)>;

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <HermitianOperator Op>
SolveReport<typename Op::Scalar> run_outer(const Op& A, const SpectralBounds& bounds, const SolverConfig& cfg,
                                           const RestartObserver<typename Op::Scalar>& observer,
                                           const Block<typename Op::Scalar>* V0) {
    using Scalar = typename Op::Scalar;
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver: tol must be positive");
    if (cfg.M < 1) throw std::invalid_argument("solver: M must be >= 1");
    if (cfg.max_restarts < 1) throw std::invalid_argument("solver: max_restarts must be >= 1");

    SolveReport<Scalar> rep;
    rep.config = cfg;
    rep.bounds = bounds;
    rep.window = map_window(bounds, cfg.a, cfg.b);
    rep.degree = cfg.degree ? *cfg.degree : degree_heuristic(rep.window, cfg.M, cfg.D, cfg.K);
    rep.norm = cfg.norm;
    rep.normA = cfg.norm == NormConvention::spectral_bound ? bounds.abs_max() : std::sqrt(A.norm1() * A.norm_inf());
    const Index n = A.rows();

    if (cfg.n_target) {
        rep.n_target = *cfg.n_target;
    } else {
        rep.count_estimate = estimate_eigencount(A, bounds, rep.window, rep.degree, cfg.count_samples, cfg.seed);
        rep.n_target = rep.count_estimate->count;
        if (rep.n_target == 0) {
            rep.converged = true;
            rep.vectors.resize(n, 0);
            rep.wall_seconds = seconds_since(t_start);
            return rep;
        }
    }

    Index ell = cfg.ell;
    if (V0) ell = V0->cols();
    if (ell <= 0) ell = std::max<Index>(1, static_cast<Index>(std::ceil(1.5 * static_cast<double>(rep.n_target) /
                                                                        static_cast<double>(cfg.M))));
    if (cfg.M * ell > n) {
        if (V0) throw std::invalid_argument("solver: M * ell exceeds the dimension");
        ell = std::max<Index>(1, n / cfg.M);
        rep.warnings.push_back("block width reduced to " + std::to_string(ell) + " so that M*ell <= n");
    }
    if (cfg.M * ell < rep.n_target)
        rep.warnings.push_back("subspace dimension M*ell is smaller than the eigenvalue count target");
    rep.ell = ell;

    const FilterPlan plan = make_filter_plan(rep.window, cfg.M, rep.degree);
    Block<Scalar> V;
    if (V0) {
        if (V0->rows() != n) throw std::invalid_argument("solver: initial block has wrong row count");
        V = *V0;
    } else {
        V = gaussian_block<Scalar>(n, ell, cfg.seed);
    }

    for (Index k = 0; k < cfg.max_restarts; ++k) {
        auto t0 = clock::now();
        auto moments = build_moments(A, bounds, V, plan, false);
        rep.times.moments += seconds_since(t0);

        t0 = clock::now();
        factorize_moments(moments);
        for (const auto& w : moments.warnings) rep.warnings.push_back("restart " + std::to_string(k) + ": " + w);
        rep.times.qr += seconds_since(t0);

        t0 = clock::now();
        const Block<Scalar> AU = A.apply(moments.U);
        const auto ritz = rayleigh_ritz<Scalar>(moments.U, AU);
        const auto potential = select_potential(ritz, rep.window);
        std::optional<ReducedPencil<Scalar>> pencil;
        std::optional<RefinedSet<Scalar>> refined;
        if (cfg.mode == SolverMode::rrr && !potential.empty()) {
            pencil = build_reduced_pencil<Scalar>(moments.U, AU);
            RealVector shifts(static_cast<Index>(potential.size()));
            for (std::size_t c = 0; c < potential.size(); ++c) shifts(static_cast<Index>(c)) = ritz.values(potential[c]);
            refined = refine_set<Scalar>(moments.U, AU, *pencil, shifts);
        }
        rep.times.projection += seconds_since(t0);

        t0 = clock::now();
        RemovalResult<Scalar> removal;
        switch (cfg.mode) {
        case SolverMode::rrr:
            if (refined) {
                RealVector exterior(ritz.values.size() - static_cast<Index>(potential.size()));
                Index e = 0;
                for (Index i = 0; i < ritz.values.size(); ++i)
                    if (!rep.window.contains(ritz.values(i))) exterior(e++) = ritz.values(i);
                RemovalContext<Scalar> ctx{moments.U, AU, ritz.B, *pencil, exterior, rep.normA};
                removal = refined_removal(*refined, ctx, cfg.refined);
            } else {
                removal.report.mode = RemovalMode::refined;
                removal.pairs.X.resize(n, 0);
            }
            break;
        case SolverMode::rr_residual:
            removal = residual_removal(ritz, potential, rep.normA, cfg.delta);
            break;
        case SolverMode::rr_tsvd:
            removal = tsvd_removal(moments.S, A, rep.window, cfg.trunc_tol);
            break;
        }
        rep.times.removal += seconds_since(t0);

        const auto status = convergence_test(removal.pairs.resnorms, rep.normA, cfg.tol, rep.n_target);
        rep.restarts = k + 1;
        rep.n_in_trace.push_back(status.count);
        rep.max_relres_trace.push_back(status.max_relres);
        rep.removal_trace.push_back(removal.report);
        if (status.over_count && status.max_relres < cfg.tol)
            rep.anomalies.push_back("restart " + std::to_string(k) + ": " + std::to_string(status.count) +
                                    " converged pairs exceed the target " + std::to_string(rep.n_target));

        if (observer) {
            RestartState<Scalar> state{k,        V,       moments, ritz, potential, refined ? &*refined : nullptr,
                                       removal,  status,  rep.normA};
            observer(state);
        }

        rep.values = removal.pairs.values;
        rep.vectors = removal.pairs.X;
        rep.relres = removal.pairs.resnorms / rep.normA;
        rep.converged = status.converged;
        if (status.converged && cfg.stop_at_convergence) break;
        V = restart_matrix(moments);
    }
    rep.wall_seconds = seconds_since(t_start);
    return rep;
}

} // namespace detail

/// Restarted filtered moment method with Rayleigh-Ritz extraction and a baseline removal rule.
template <HermitianOperator Op>
SolveReport<typename Op::Scalar> run_cjssrr(const Op& A, const SpectralBounds& bounds, const SolverConfig& cfg,
                                            const RestartObserver<typename Op::Scalar>& observer = {},
                                            const Block<typename Op::Scalar>* V0 = nullptr) {
    if (cfg.mode == SolverMode::rrr) throw std::invalid_argument("run_cjssrr: mode must be rr-tsvd or rr-residual");
    return detail::run_outer(A, bounds, cfg, observer, V0);
}

/// Restarted filtered moment method with refined extraction and rank-based removal.
template <HermitianOperator Op>
SolveReport<typename Op::Scalar> run_cjssrrr(const Op& A, const SpectralBounds& bounds, const SolverConfig& cfg,
                                             const RestartObserver<typename Op::Scalar>& observer = {},
                                             const Block<typename Op::Scalar>* V0 = nullptr) {
    SolverConfig c = cfg;
    c.mode = SolverMode::rrr;
    return detail::run_outer(A, bounds, c, observer, V0);
}

template <HermitianOperator Op>
SolveReport<typename Op::Scalar> solve(const Op& A, const SpectralBounds& bounds, const SolverConfig& cfg,
                                       const RestartObserver<typename Op::Scalar>& observer = {},
                                       const Block<typename Op::Scalar>* V0 = nullptr) {
    return detail::run_outer(A, bounds, cfg, observer, V0);
}

} // namespace cjss
