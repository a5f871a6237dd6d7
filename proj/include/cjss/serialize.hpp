#pragma once

// JSON views of plans and reports. nlohmann::json prints doubles in the shortest form
// that parses back to the same value.

#include "cjss/driver.hpp"

#include <json.hpp>

#include <cmath>
#include <vector>

namespace cjss {

using json = nlohmann::json;

namespace detail {

/// Non-finite values become null so the document stays valid JSON.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vector_json(const RealVector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

inline RealVector vector_from_json(const json& j) {
    RealVector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

} // namespace detail

inline json to_json(const Window& w) {
    return {{"a", w.a}, {"b", w.b}, {"a_m", w.a_m}, {"b_m", w.b_m}};
}

inline Window window_from_json(const json& j) {
    return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("a_m").get<double>(), j.at("b_m").get<double>()};
}

inline json to_json(const FilterPlan& plan) {
    json coeff = json::array();
    for (Index k = 0; k < plan.M; ++k) coeff.push_back(detail::vector_json(plan.coeff.row(k).transpose()));
    return {{"degree", plan.d}, {"moments", plan.M}, {"window", to_json(plan.window)},
            {"rho", detail::vector_json(plan.rho)}, {"coeff", coeff}};
}

inline FilterPlan filter_plan_from_json(const json& j) {
    FilterPlan plan;
    plan.d = j.at("degree").get<Index>();
    plan.M = j.at("moments").get<Index>();
    plan.window = window_from_json(j.at("window"));
    plan.rho = detail::vector_from_json(j.at("rho"));
    const auto& coeff = j.at("coeff");
    if (static_cast<Index>(coeff.size()) != plan.M || plan.rho.size() != plan.d + 1)
        throw std::invalid_argument("filter plan: table shape does not match degree and moment count");
    plan.coeff.resize(plan.M, plan.d + 1);
    for (Index k = 0; k < plan.M; ++k) {
        const RealVector row = detail::vector_from_json(coeff[static_cast<std::size_t>(k)]);
        if (row.size() != plan.d + 1) throw std::invalid_argument("filter plan: coefficient row has wrong length");
        plan.coeff.row(k) = row.transpose();
    }
    return plan;
}

inline json to_json(const ClusterReport& c) {
    return {{"members", c.members},
            {"sigma", detail::vector_json(c.sigma)},
            {"tau", detail::number(c.tau)},
            {"rank", c.rank},
            {"pencil_count", c.pencil_count},
            {"retained", c.retained},
            {"gap", detail::number(c.gap)},
            {"gap_fallback", c.gap_fallback},
            {"skipped", c.skipped},
            {"basis", c.basis == ClusterBasis::members ? "members" : "subspace"}};
}

inline json to_json(const RemovalReport& r) {
    json clusters = json::array();
    for (const auto& c : r.clusters) clusters.push_back(to_json(c));
    json out = {{"mode", to_string(r.mode)},   {"n_in", r.n_in},       {"retained", r.retained},
                {"removed", r.removed},         {"replaced", r.replaced}, {"active", r.active},
                {"clusters", clusters},         {"gaps", detail::vector_json(r.gaps)}};
    if (r.mode != RemovalMode::refined) out["threshold"] = r.threshold;
    if (r.mode == RemovalMode::tsvd) out["subspace_dim"] = r.subspace_dim;
    return out;
}

inline json to_json(const SolverConfig& c) {
    json out = {{"a", c.a},
                {"b", c.b},
                {"moments", c.M},
                {"ell", c.ell},
                {"D", c.D},
                {"K", c.K},
                {"tol", c.tol},
                {"mode", to_string(c.mode)},
                {"delta", c.delta},
                {"trunc_tol", c.trunc_tol},
                {"C", c.refined.C},
                {"kappa", c.refined.kappa},
                {"complete_multiplicity", c.refined.complete_multiplicity},
                {"max_restarts", c.max_restarts},
                {"seed", c.seed},
                {"norm", to_string(c.norm)}};
    out["degree"] = c.degree ? json(*c.degree) : json(nullptr);
    out["n_target"] = c.n_target ? json(*c.n_target) : json(nullptr);
    return out;
}

/// Eigenvectors are included only on request; they dominate the document size.
template <class Scalar>
json to_json(const SolveReport<Scalar>& r, bool with_vectors = false) {
    json pairs = json::array();
    for (Index i = 0; i < r.values.size(); ++i) {
        json p = {{"value", r.values(i)}, {"relres", detail::number(r.relres(i))}};
        if (with_vectors) {
            json v = json::array();
            for (Index k = 0; k < r.vectors.rows(); ++k) {
                if constexpr (is_complex_v<Scalar>) v.push_back({r.vectors(k, i).real(), r.vectors(k, i).imag()});
                else v.push_back(r.vectors(k, i));
            }
            p["vector"] = v;
        }
        pairs.push_back(p);
    }
    json removal = json::array();
    for (const auto& rr : r.removal_trace) removal.push_back(to_json(rr));
    json out = {{"converged", r.converged},
                {"restarts", r.restarts},
                {"n_target", r.n_target},
                {"degree", r.degree},
                {"ell", r.ell},
                {"norm", to_string(r.norm)},
                {"normA", r.normA},
                {"bounds", {{"lambda_min", r.bounds.lambda_min}, {"lambda_max", r.bounds.lambda_max},
                            {"margin", r.bounds.margin}}},
                {"window", to_json(r.window)},
                {"pairs", pairs},
                {"n_in_trace", r.n_in_trace},
                {"max_relres_trace", json::array()},
                {"removal_trace", removal},
                {"anomalies", r.anomalies},
                {"warnings", r.warnings},
                {"times", {{"moments", r.times.moments}, {"qr", r.times.qr}, {"projection", r.times.projection},
                           {"removal", r.times.removal}, {"wall", r.wall_seconds}}},
                {"config", to_json(r.config)}};
    for (double v : r.max_relres_trace) out["max_relres_trace"].push_back(detail::number(v));
    if (r.count_estimate)
        out["count_estimate"] = {{"count", r.count_estimate->count}, {"mean", r.count_estimate->mean},
                                 {"std_error", r.count_estimate->std_error},
                                 {"samples", r.count_estimate->samples}};
    return out;
}

} // namespace cjss
