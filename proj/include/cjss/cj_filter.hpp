#pragma once

#include "cjss/bounds.hpp"
#include "cjss/core.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace cjss {

/// Search interval in original coordinates (a, b) and mapped into [-1, 1] (a_m, b_m).
struct Window {
    double a = 0.0;
    double b = 0.0;
    double a_m = 0.0;
    double b_m = 0.0;

    double mapped_width() const { return b_m - a_m; }
    bool contains(double t) const { return a <= t && t <= b; }
};

inline double map_point(const SpectralBounds& bounds, double t) {
    return (2.0 * t - bounds.lambda_max - bounds.lambda_min) / bounds.spread();
}

/// The full interval [lambda_min, lambda_max] is accepted and maps to [-1, 1].
inline Window map_window(const SpectralBounds& bounds, double a, double b) {
    if (bounds.degenerate())
        throw std::invalid_argument("map_window: degenerate spectral bounds [" +
                                    std::to_string(bounds.lambda_min) + ", " +
                                    std::to_string(bounds.lambda_max) + "]");
    if (!(a < b)) throw std::invalid_argument("map_window: need a < b");
    if (a < bounds.lambda_min || b > bounds.lambda_max)
        throw std::invalid_argument("map_window: window [" + std::to_string(a) + ", " + std::to_string(b) +
                                    "] leaves the spectral bounds [" + std::to_string(bounds.lambda_min) +
                                    ", " + std::to_string(bounds.lambda_max) +
                                    "]; re-estimate the bounds with a larger margin");
    Window w{a, b, map_point(bounds, a), map_point(bounds, b)};
    w.a_m = std::clamp(w.a_m, -1.0, 1.0);
    w.b_m = std::clamp(w.b_m, -1.0, 1.0);
    return w;
}

/// Window given directly in mapped coordinates, with bounds (-1, 1).
inline Window mapped_window(double a_m, double b_m) {
    return map_window(SpectralBounds{-1.0, 1.0, 0.0}, a_m, b_m);
}

inline RealVector jackson_factors(Index d) {
    if (d < 1) throw std::invalid_argument("jackson_factors: d must be >= 1");
    const double dd = static_cast<double>(d);
    const double alpha = std::numbers::pi / (dd + 2.0);
    const double s = std::sin(alpha);
    RealVector rho(d + 1);
    rho(0) = 1.0;
    for (Index j = 1; j <= d; ++j) {
        const double jj = static_cast<double>(j);
        rho(j) = std::sin((jj + 1.0) * alpha) / ((dd + 2.0) * s) +
                 (1.0 - (jj + 1.0) / (dd + 2.0)) * std::cos(jj * alpha);
    }
    return rho;
}

namespace detail {

/// T_k(s) for k = 0..K-1 into out (size K).
inline void chebyshev_values(double s, Index K, double* out) {
    if (K > 0) out[0] = 1.0;
    if (K > 1) out[1] = s;
    for (Index k = 2; k < K; ++k) out[k] = 2.0 * s * out[k - 1] - out[k - 2];
}

/// Composite Gauss-Legendre pass over [theta_b, theta_a] with the given panel count.
inline RealMatrix coefficient_pass(const Window& w, Index M, Index d, Index panels) {
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();

    const double theta_a = std::acos(w.a_m);
    const double theta_b = std::acos(w.b_m);
    const double h = (theta_a - theta_b) / static_cast<double>(panels);
    const double width = w.b_m - w.a_m;

    RealMatrix coeff = RealMatrix::Zero(M, d + 1);
    std::vector<double> pk(static_cast<std::size_t>(M));
    RealVector cosj(d + 1);

    auto accumulate = [&](double theta, double weight) {
        const double t = std::cos(theta);
        const double s = std::clamp((2.0 * t - w.a_m - w.b_m) / width, -1.0, 1.0);
        chebyshev_values(s, M, pk.data());
        for (Index j = 0; j <= d; ++j) cosj(j) = std::cos(static_cast<double>(j) * theta);
        for (Index k = 0; k < M; ++k) coeff.row(k) += (weight * pk[static_cast<std::size_t>(k)]) * cosj.transpose();
    };

    for (Index p = 0; p < panels; ++p) {
        const double mid = theta_b + (static_cast<double>(p) + 0.5) * h;
        const double half = 0.5 * h;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] == 0.0) {
                accumulate(mid, half * ws[i]);
            } else {
                accumulate(mid - half * xs[i], half * ws[i]);
                accumulate(mid + half * xs[i], half * ws[i]);
            }
        }
    }
    return coeff * (2.0 / std::numbers::pi);
}

} // namespace detail

struct QuadratureInfo {
    Index panels = 0;
    Index nodes = 0;
    double last_delta = 0.0;
};

/**
 c_j^(k) = (2/pi) * integral over [theta_b, theta_a] of p_k(cos theta) cos(j theta),
 evaluated with composite 20-point Gauss-Legendre. The panel count doubles until no
 coefficient moves by more than 1e-13.
 */
inline RealMatrix chebyshev_coefficients(const Window& w, Index M, Index d, QuadratureInfo* info = nullptr) {
    if (M < 1) throw std::invalid_argument("chebyshev_coefficients: M must be >= 1");
    if (d < M - 1) throw std::invalid_argument("chebyshev_coefficients: need d >= M - 1");
    if (!(w.a_m < w.b_m) || w.a_m < -1.0 || w.b_m > 1.0)
        throw std::invalid_argument("chebyshev_coefficients: invalid mapped window");

    constexpr Index max_nodes = Index(1) << 20;
    constexpr Index nodes_per_panel = 20;
    constexpr double converged = 1e-13;

    const double span = std::acos(w.a_m) - std::acos(w.b_m);
    Index panels = static_cast<Index>(std::ceil(static_cast<double>(d) * span / std::numbers::pi)) + M + 2;
    RealMatrix coarse = detail::coefficient_pass(w, M, d, panels);
    double delta = 0.0;
    while (true) {
        if (2 * panels * nodes_per_panel > max_nodes)
            throw NumericalError("chebyshev_coefficients: quadrature did not converge within 2^20 nodes, "
                                 "worst coefficient change " + std::to_string(delta));
        panels *= 2;
        RealMatrix fine = detail::coefficient_pass(w, M, d, panels);
        delta = (fine - coarse).cwiseAbs().maxCoeff();
        coarse = std::move(fine);
        if (delta <= converged) break;
    }
    if (info) *info = {panels, panels * nodes_per_panel, delta};
    return coarse;
}

/// Closed form of the k = 0 row.
inline RealVector step_coefficients(const Window& w, Index d) {
    const double theta_a = std::acos(w.a_m);
    const double theta_b = std::acos(w.b_m);
    RealVector c(d + 1);
    c(0) = 2.0 / std::numbers::pi * (theta_a - theta_b);
    for (Index j = 1; j <= d; ++j) {
        const double jj = static_cast<double>(j);
        c(j) = 2.0 / (jj * std::numbers::pi) * (std::sin(jj * theta_a) - std::sin(jj * theta_b));
    }
    return c;
}

struct FilterPlan {
    Index d = 0;
    Index M = 0;
    RealVector rho;
    RealMatrix coeff; // M x (d + 1)
    Window window;

    /// rho_j * c_j^(k), with the j = 0 entry already halved.
    RealMatrix damped() const {
        RealMatrix out = coeff;
        for (Index j = 0; j <= d; ++j) out.col(j) *= rho(j);
        out.col(0) *= 0.5;
        return out;
    }
};

inline FilterPlan make_filter_plan(const Window& w, Index M, Index d) {
    FilterPlan plan;
    plan.d = d;
    plan.M = M;
    plan.window = w;
    plan.rho = jackson_factors(d);
    plan.coeff = chebyshev_coefficients(w, M, d);
    return plan;
}

/// Damped series for moment k at mapped point t, by Clenshaw.
inline double scalar_filter_eval(const FilterPlan& plan, Index k, double t) {
    if (k < 0 || k >= plan.M) throw std::out_of_range("scalar_filter_eval: moment index out of range");
    if (t < -1.0 || t > 1.0) throw std::invalid_argument("scalar_filter_eval: t must lie in [-1, 1]");
    double b1 = 0.0;
    double b2 = 0.0;
    for (Index j = plan.d; j >= 1; --j) {
        const double bj = plan.rho(j) * plan.coeff(k, j) + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = bj;
    }
    return 0.5 * plan.coeff(k, 0) + t * b1 - b2;
}

/// d = ceil(D pi^2 / w^(4/3) + pi^2 (M-1)^2 / (K^2 w)) - 2, at least max(3, M - 1).
inline Index degree_heuristic(const Window& w, Index M, double D, double K) {
    const double width = w.mapped_width();
    if (!(width > 0.0)) throw std::invalid_argument("degree_heuristic: mapped width must be positive");
    if (D < 1.0 || D > 8.0) throw std::invalid_argument("degree_heuristic: D must lie in [1, 8]");
    if (K < 1.0 || K > 10.0) throw std::invalid_argument("degree_heuristic: K must lie in [1, 10]");
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const double m1 = static_cast<double>(M - 1);
    const double raw = D * pi2 / std::pow(width, 4.0 / 3.0) + pi2 * m1 * m1 / (K * K * width);
    const Index d = static_cast<Index>(std::ceil(raw)) - 2;
    return std::max<Index>({d, 3, M - 1});
}

} // namespace cjss
