#pragma once

#include "cjss/bench/deviation.hpp"
#include "cjss/bench/matrix_market.hpp"
#include "cjss/bench/synthetic.hpp"
#include "cjss/driver.hpp"
#include "cjss/serialize.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace cjss::bench {

struct ProblemSpec {
    std::string name;
    std::optional<SyntheticSpec> synthetic;
    std::string matrix_path;
    double a = 0.0;
    double b = 0.0;
    bool exact_bounds = true; // synthetic only: use the known extreme eigenvalues
    Index dense_reference_limit = 3000; // file matrices up to this size get a dense reference
};

struct ConfigSpec {
    std::string label;
    SolverConfig solver;         // a, b, seed and ell are filled per run
    double subspace_factor = 1.5; // M*ell = M * ceil(factor * n_ev / M)
    bool single_term_degree = false; // degree from the M = 1 form of the heuristic
};

struct ExperimentSpec {
    std::vector<ProblemSpec> problems;
    std::vector<ConfigSpec> configs;
    std::vector<std::uint64_t> seeds;
    std::string csv_path;
    std::string summary_csv_path;
    std::string json_path;
    unsigned workers = 1;
};

struct DiagnosticsRow {
    std::string problem;
    std::string config;
    std::string mode;
    std::uint64_t seed = 0;
    Index restart = 0;
    double eps_ev = std::numeric_limits<double>::quiet_NaN();
    Index n_in = 0;
    Index n_ev = 0;
    Index n_potential = 0;
    double kappa = std::numeric_limits<double>::quiet_NaN();
    double sin_angle = std::numeric_limits<double>::quiet_NaN();
    double max_relres = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    std::string status = "ok";
    double wall_seconds = 0.0;
};

struct RunSummary {
    std::string problem;
    std::string config;
    Index runs = 0;
    Index converged_runs = 0;
    double avg_restarts = std::numeric_limits<double>::quiet_NaN(); // over converged runs
    Index mismatches_below_1e3 = 0; // restarts with eps_ev <= 1e-3 and n_in != n_ev
    double min_eps_mismatch = std::numeric_limits<double>::infinity();
    double max_final_kappa = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
    std::vector<DiagnosticsRow> rows;
    std::vector<RunSummary> summaries;
};

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {"problem", "config",    "mode",       "seed",      "restart",
                                                  "eps_ev",  "n_in",      "n_ev",       "n_potential", "kappa",
                                                  "sin_angle", "max_relres", "converged", "status",    "wall_seconds"};
    return cols;
}

inline const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> cols = {"problem",        "config",          "runs",
                                                  "converged_runs", "avg_restarts",    "mismatches_below_1e3",
                                                  "min_eps_mismatch", "max_final_kappa"};
    return cols;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline void write_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& r : rows) {
        out << csv_escape(r.problem) << ',' << csv_escape(r.config) << ',' << r.mode << ',' << r.seed << ','
            << r.restart << ',' << format_double(r.eps_ev) << ',' << r.n_in << ',' << r.n_ev << ',' << r.n_potential
            << ',' << format_double(r.kappa) << ',' << format_double(r.sin_angle) << ','
            << format_double(r.max_relres) << ',' << (r.converged ? 1 : 0) << ',' << csv_escape(r.status) << ','
            << format_double(r.wall_seconds) << "\n";
    }
}

inline void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& rows) {
    const auto& cols = summary_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& s : rows)
        out << csv_escape(s.problem) << ',' << csv_escape(s.config) << ',' << s.runs << ',' << s.converged_runs << ','
            << format_double(s.avg_restarts) << ',' << s.mismatches_below_1e3 << ','
            << format_double(s.min_eps_mismatch) << ',' << format_double(s.max_final_kappa) << "\n";
}

inline json to_json(const DiagnosticsRow& r) {
    return {{"problem", r.problem},   {"config", r.config},
            {"mode", r.mode},         {"seed", r.seed},
            {"restart", r.restart},   {"eps_ev", cjss::detail::number(r.eps_ev)},
            {"n_in", r.n_in},         {"n_ev", r.n_ev},
            {"n_potential", r.n_potential}, {"kappa", cjss::detail::number(r.kappa)},
            {"sin_angle", cjss::detail::number(r.sin_angle)}, {"max_relres", cjss::detail::number(r.max_relres)},
            {"converged", r.converged}, {"status", r.status},
            {"wall_seconds", r.wall_seconds}};
}

inline json to_json(const RunSummary& s) {
    return {{"problem", s.problem},
            {"config", s.config},
            {"runs", s.runs},
            {"converged_runs", s.converged_runs},
            {"avg_restarts", cjss::detail::number(s.avg_restarts)},
            {"mismatches_below_1e3", s.mismatches_below_1e3},
            {"min_eps_mismatch", cjss::detail::number(s.min_eps_mismatch)},
            {"max_final_kappa", cjss::detail::number(s.max_final_kappa)}};
}

inline json to_json(const ExperimentResult& r) {
    json rows = json::array(), sums = json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    for (const auto& s : r.summaries) sums.push_back(to_json(s));
    return {{"rows", rows}, {"summaries", sums}};
}

inline SyntheticSpec synthetic_from_json(const json& j) {
    SyntheticSpec s;
    s.n = j.value("n", s.n);
    s.low = j.value("low", s.low);
    s.high = j.value("high", s.high);
    s.spectrum_seed = j.value("spectrum_seed", s.spectrum_seed);
    s.rotation_seed = j.value("rotation_seed", s.rotation_seed);
    s.block = j.value("block", s.block);
    s.centre = j.value("centre", s.centre);
    s.count = j.value("count", s.count);
    s.feature = parse_feature(j.value("feature", std::string("none")));
    s.cluster_gap = j.value("cluster_gap", s.cluster_gap);
    s.edge_offset = j.value("edge_offset", s.edge_offset);
    s.local_count = j.value("local_count", s.local_count);
    s.local_halfwidth = j.value("local_halfwidth", s.local_halfwidth);
    return s;
}

inline ExperimentSpec experiment_from_json(const json& j) {
    ExperimentSpec spec;
    for (const auto& p : j.at("problems")) {
        ProblemSpec ps;
        ps.name = p.at("name").get<std::string>();
        if (p.contains("synthetic")) {
            ps.synthetic = synthetic_from_json(p.at("synthetic"));
            ps.exact_bounds = p.value("exact_bounds", true);
        } else {
            ps.matrix_path = p.at("matrix").get<std::string>();
            const auto w = p.at("window");
            ps.a = w.at(0).get<double>();
            ps.b = w.at(1).get<double>();
            ps.dense_reference_limit = p.value("dense_reference_limit", ps.dense_reference_limit);
        }
        spec.problems.push_back(std::move(ps));
    }
    for (const auto& c : j.at("configs")) {
        ConfigSpec cs;
        cs.label = c.at("label").get<std::string>();
        auto& s = cs.solver;
        s.mode = parse_solver_mode(c.value("mode", std::string("rrr")));
        s.M = c.value("moments", s.M);
        s.D = c.value("D", s.D);
        s.K = c.value("K", s.K);
        if (c.contains("degree") && !c.at("degree").is_null()) s.degree = c.at("degree").get<Index>();
        s.tol = c.value("tol", s.tol);
        s.delta = c.value("delta", s.delta);
        s.trunc_tol = c.value("trunc_tol", s.trunc_tol);
        s.max_restarts = c.value("max_restarts", s.max_restarts);
        s.stop_at_convergence = c.value("stop_at_convergence", false);
        s.refined.C = c.value("C", s.refined.C);
        s.refined.kappa = c.value("kappa", s.refined.kappa);
        s.refined.complete_multiplicity = c.value("complete_multiplicity", s.refined.complete_multiplicity);
        if (c.value("norm", std::string("spectral-bound")) == "one-inf-mean") s.norm = NormConvention::one_inf_mean;
        cs.subspace_factor = c.value("subspace_factor", cs.subspace_factor);
        cs.single_term_degree = c.value("single_term_degree", false);
        spec.configs.push_back(std::move(cs));
    }
    for (const auto& s : j.at("seeds")) spec.seeds.push_back(s.get<std::uint64_t>());
    spec.workers = j.value("workers", spec.workers);
    if (j.contains("outputs")) {
        const auto& o = j.at("outputs");
        spec.csv_path = o.value("csv", std::string());
        spec.summary_csv_path = o.value("summary_csv", std::string());
        spec.json_path = o.value("json", std::string());
    }
    return spec;
}

namespace detail {

struct LoadedProblem {
    std::optional<SparseHermitian<double>> A;
    SpectralBounds bounds;
    double a = 0.0;
    double b = 0.0;
    Index n_ev = 0;
    Block<double> X_ref; // empty when no reference is available
    bool have_reference = false;
};

inline LoadedProblem load_problem(const ProblemSpec& ps) {
    LoadedProblem lp;
    if (ps.synthetic) {
        auto sp = make_synthetic_problem<double>(*ps.synthetic);
        lp.a = sp.a;
        lp.b = sp.b;
        lp.n_ev = sp.n_ev;
        lp.X_ref = std::move(sp.X_ref);
        lp.have_reference = true;
        lp.bounds = ps.exact_bounds ? SpectralBounds{sp.lambda_min, sp.lambda_max, 0.0} : estimate_bounds(sp.op.A);
        lp.A.emplace(std::move(sp.op.A));
        return lp;
    }
    lp.A.emplace(load_matrix_market<double>(ps.matrix_path));
    lp.a = ps.a;
    lp.b = ps.b;
    lp.bounds = estimate_bounds(*lp.A);
    if (lp.A->rows() <= ps.dense_reference_limit) {
        const auto eig = hermitian_eig<double>(Block<double>(lp.A->matrix()));
        std::vector<Index> cols;
        for (Index i = 0; i < eig.values.size(); ++i)
            if (lp.a <= eig.values(i) && eig.values(i) <= lp.b) cols.push_back(i);
        lp.X_ref.resize(lp.A->rows(), static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) lp.X_ref.col(static_cast<Index>(c)) = eig.vectors.col(cols[c]);
        lp.n_ev = static_cast<Index>(cols.size());
        lp.have_reference = true;
    }
    return lp;
}

} // namespace detail

/// Solver configuration for one run of `cs` on a problem with n_ev eigenvalues in its window.
inline SolverConfig configure_run(const ConfigSpec& cs, double a, double b, Index n_ev, std::uint64_t seed,
                                  const SpectralBounds& bounds) {
    SolverConfig cfg = cs.solver;
    cfg.a = a;
    cfg.b = b;
    cfg.seed = seed;
    cfg.n_target = n_ev;
    const double factor_dim = std::ceil(cs.subspace_factor * static_cast<double>(n_ev) / static_cast<double>(cfg.M));
    cfg.ell = std::max<Index>(1, static_cast<Index>(factor_dim));
    if (!cfg.degree && cs.single_term_degree)
        cfg.degree = degree_heuristic(map_window(bounds, a, b), 1, cfg.D, cfg.K);
    return cfg;
}

namespace detail {

struct JobOutput {
    std::vector<DiagnosticsRow> rows;
    std::optional<Index> first_converged; // restarts needed, 1-based
    double final_kappa = std::numeric_limits<double>::quiet_NaN();
};

inline DiagnosticsRow error_row(const std::string& problem, const ConfigSpec& cs, std::uint64_t seed, Index n_ev,
                                const std::string& what) {
    DiagnosticsRow row;
    row.problem = problem;
    row.config = cs.label;
    row.mode = to_string(cs.solver.mode);
    row.seed = seed;
    row.restart = -1;
    row.n_ev = n_ev;
    row.status = "error: " + what;
    return row;
}

inline JobOutput run_job(const ProblemSpec& ps, const LoadedProblem& lp, const ConfigSpec& cs, std::uint64_t seed) {
    JobOutput job;
    const auto t_run = std::chrono::steady_clock::now();
    try {
        const SolverConfig cfg = configure_run(cs, lp.a, lp.b, lp.n_ev, seed, lp.bounds);
        RestartObserver<double> obs = [&](const RestartState<double>& st) {
            DiagnosticsRow row;
            row.problem = ps.name;
            row.config = cs.label;
            row.mode = to_string(cfg.mode);
            row.seed = seed;
            row.restart = st.k;
            row.n_in = st.status.count;
            row.n_ev = lp.n_ev;
            row.n_potential = static_cast<Index>(st.potential.size());
            row.max_relres = st.status.max_relres;
            row.converged = st.status.converged;
            const auto& X = st.removal.pairs.X;
            if (X.cols() > 0) row.kappa = condition_number<double>(X);
            if (lp.have_reference) {
                row.eps_ev = subspace_deviation<double>(st.moments.U, lp.X_ref);
                if (X.cols() == lp.n_ev && X.cols() > 0) row.sin_angle = subspace_sine<double>(X, lp.X_ref);
            }
            row.wall_seconds = cjss::detail::seconds_since(t_run);
            if (st.status.converged && !job.first_converged) {
                job.first_converged = st.k + 1;
                job.final_kappa = row.kappa;
            }
            job.rows.push_back(row);
        };
        solve(*lp.A, lp.bounds, cfg, obs);
    } catch (const std::exception& e) {
        job.rows.push_back(error_row(ps.name, cs, seed, lp.n_ev, e.what()));
    }
    return job;
}

} // namespace detail

/**
 Runs every config on every problem for every seed and records one row per outer
 iteration. Failures become rows with an error status; the harness keeps going. Runs
 are independent and may use up to spec.workers threads; rows come out in job order
 (problem, config, seed) regardless.
 */
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.configs.empty()) throw std::invalid_argument("experiment: no solver configs");
    if (spec.problems.empty()) throw std::invalid_argument("experiment: no problems");
    if (spec.seeds.empty()) throw std::invalid_argument("experiment: no seeds");
    if (std::set<std::uint64_t>(spec.seeds.begin(), spec.seeds.end()).size() != spec.seeds.size())
        throw std::invalid_argument("experiment: seeds must be distinct");

    std::vector<detail::LoadedProblem> problems(spec.problems.size());
    std::vector<std::string> load_errors(spec.problems.size());
    for (std::size_t p = 0; p < spec.problems.size(); ++p) {
        try {
            problems[p] = detail::load_problem(spec.problems[p]);
        } catch (const std::exception& e) {
            load_errors[p] = e.what();
        }
    }

    struct Job {
        std::size_t p, c, s;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < spec.problems.size(); ++p)
        for (std::size_t c = 0; c < spec.configs.size(); ++c)
            for (std::size_t s = 0; s < spec.seeds.size(); ++s) jobs.push_back({p, c, s});
    std::vector<detail::JobOutput> outputs(jobs.size());

    auto run_one = [&](std::size_t j) {
        const auto [p, c, s] = jobs[j];
        if (!load_errors[p].empty()) {
            outputs[j].rows.push_back(
                detail::error_row(spec.problems[p].name, spec.configs[c], spec.seeds[s], 0, load_errors[p]));
            return;
        }
        outputs[j] = detail::run_job(spec.problems[p], problems[p], spec.configs[c], spec.seeds[s]);
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(spec.workers, static_cast<unsigned>(jobs.size())));
    if (workers == 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) run_one(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs.size(); j = next++) run_one(j);
            });
        for (auto& t : pool) t.join();
    }

    ExperimentResult result;
    for (std::size_t p = 0; p < spec.problems.size(); ++p)
        for (std::size_t c = 0; c < spec.configs.size(); ++c) {
            RunSummary sum;
            sum.problem = spec.problems[p].name;
            sum.config = spec.configs[c].label;
            double restart_total = 0.0;
            for (std::size_t j = 0; j < jobs.size(); ++j) {
                if (jobs[j].p != p || jobs[j].c != c) continue;
                const auto& out = outputs[j];
                ++sum.runs;
                if (out.first_converged) {
                    ++sum.converged_runs;
                    restart_total += static_cast<double>(*out.first_converged);
                    if (std::isnan(sum.max_final_kappa) || out.final_kappa > sum.max_final_kappa)
                        sum.max_final_kappa = out.final_kappa;
                }
                for (const auto& row : out.rows) {
                    if (row.restart >= 0 && row.n_in != row.n_ev) {
                        if (row.eps_ev <= 1e-3) ++sum.mismatches_below_1e3;
                        if (row.eps_ev < sum.min_eps_mismatch) sum.min_eps_mismatch = row.eps_ev;
                    }
                }
                result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
            }
            if (sum.converged_runs) sum.avg_restarts = restart_total / static_cast<double>(sum.converged_runs);
            result.summaries.push_back(sum);
        }
    return result;
}

/// Writes whichever outputs the spec names.
inline void write_outputs(const ExperimentSpec& spec, const ExperimentResult& result) {
    auto open = [](const std::string& path) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        return out;
    };
    if (!spec.csv_path.empty()) {
        auto out = open(spec.csv_path);
        write_csv(out, result.rows);
    }
    if (!spec.summary_csv_path.empty()) {
        auto out = open(spec.summary_csv_path);
        write_summary_csv(out, result.summaries);
    }
    if (!spec.json_path.empty()) {
        auto out = open(spec.json_path);
        out << to_json(result).dump(2) << "\n";
    }
}

} // namespace cjss::bench
