// cjss: command-line front end.
//   solve        one matrix, one window, one configuration -> JSON report
//   bench        experiment spec (JSON) -> diagnostics CSV / JSON
//   filter-plot  scalar filter values on a grid -> CSV
//   count        stochastic eigenvalue count for a window -> JSON
//   synth        write a synthetic test matrix with a known spectrum

#include "cjss/bench/experiment.hpp"
#include "cjss/bench/matrix_market.hpp"
#include "cjss/bench/synthetic.hpp"
#include "cjss/cjss.hpp"
#include "cjss/serialize.hpp"

#include <CLI11.hpp>

#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using cjss::json;
using cjss::Index;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::pair<double, double> parse_window(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw UsageError("--window expects a,b");
    try {
        std::size_t used = 0;
        const std::string lo = s.substr(0, comma), hi = s.substr(comma + 1);
        const double a = std::stod(lo, &used);
        if (used != lo.size()) throw UsageError("--window: bad number '" + lo + "'");
        const double b = std::stod(hi, &used);
        if (used != hi.size()) throw UsageError("--window: bad number '" + hi + "'");
        if (!(a < b)) throw UsageError("--window needs a < b, got '" + s + "'");
        return {a, b};
    } catch (const std::logic_error&) {
        throw UsageError("--window expects two numbers a,b, got '" + s + "'");
    }
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

bool file_is_complex(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("matrix market: cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    return cjss::bench::parse_mm_header(line).field == "complex";
}

struct DegreeOptions {
    Index degree = 0;
    std::vector<double> auto_degree; // D K
};

Index resolve_degree(const DegreeOptions& o, const cjss::Window& w, Index M) {
    if (o.degree > 0) return o.degree;
    const double D = o.auto_degree.size() == 2 ? o.auto_degree[0] : 2.0;
    const double K = o.auto_degree.size() == 2 ? o.auto_degree[1] : 5.0;
    return cjss::degree_heuristic(w, M, D, K);
}

void add_degree_options(CLI::App* cmd, DegreeOptions& o) {
    auto* deg = cmd->add_option("--degree", o.degree, "Filter degree d");
    auto* autod = cmd->add_option("--auto-degree", o.auto_degree, "Degree from the heuristic with parameters D K")
                      ->expected(2);
    deg->excludes(autod);
}

struct SolveArgs {
    std::string matrix;
    std::string window;
    Index M = 8;
    Index ell = 0;
    DegreeOptions degree;
    std::string mode = "rrr";
    double tol = 1e-12;
    double delta = 1e-4;
    double trunc_tol = 1e-12;
    std::uint64_t seed = 0;
    Index max_restarts = 10;
    Index n_target = 0;
    std::string norm = "spectral-bound";
    bool vectors = false;
    std::string out;
};

template <class Scalar>
json run_solve(const SolveArgs& args) {
    cjss::bench::LoadedMatrixInfo info;
    const auto A = cjss::bench::load_matrix_market<Scalar>(args.matrix, &info);
    const auto [a, b] = parse_window(args.window);
    const auto bounds = cjss::estimate_bounds(A);

    cjss::SolverConfig cfg;
    cfg.a = a;
    cfg.b = b;
    cfg.M = args.M;
    cfg.ell = args.ell;
    if (args.degree.degree > 0) cfg.degree = args.degree.degree;
    if (args.degree.auto_degree.size() == 2) {
        cfg.D = args.degree.auto_degree[0];
        cfg.K = args.degree.auto_degree[1];
    }
    cfg.mode = cjss::parse_solver_mode(args.mode);
    cfg.tol = args.tol;
    cfg.delta = args.delta;
    cfg.trunc_tol = args.trunc_tol;
    cfg.seed = args.seed;
    cfg.max_restarts = args.max_restarts;
    if (args.n_target > 0) cfg.n_target = args.n_target;
    cfg.norm = args.norm == "one-inf-mean" ? cjss::NormConvention::one_inf_mean : cjss::NormConvention::spectral_bound;

    const auto rep = cjss::solve(A, bounds, cfg);
    json out = cjss::to_json(rep, args.vectors);
    out["matrix"] = {{"path", args.matrix}, {"n", A.rows()}, {"nnz", A.nnz()}, {"field", info.header.field}};
    for (const auto& w : info.warnings) out["warnings"].push_back(w);
    return out;
}

template <class Scalar>
json run_count(const std::string& matrix, const std::string& window, const DegreeOptions& deg, Index samples,
               std::uint64_t seed) {
    const auto A = cjss::bench::load_matrix_market<Scalar>(matrix);
    const auto [a, b] = parse_window(window);
    const auto bounds = cjss::estimate_bounds(A);
    const auto w = cjss::map_window(bounds, a, b);
    const Index d = resolve_degree(deg, w, 1);
    const auto est = cjss::estimate_eigencount(A, bounds, w, d, samples, seed);
    return {{"count", est.count},
            {"mean", est.mean},
            {"std_error", est.std_error},
            {"samples", est.samples},
            {"degree", d},
            {"window", cjss::to_json(w)},
            {"bounds", {{"lambda_min", bounds.lambda_min}, {"lambda_max", bounds.lambda_max}}}};
}

int fail(const std::string& kind, const std::string& message) {
    std::cout << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Filtered moment-subspace interior eigensolver"};
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Compute the eigenpairs of a Matrix Market file inside a window");
    solve->add_option("--matrix", sa.matrix, "Matrix Market file")->required()->check(CLI::ExistingFile);
    solve->add_option("--window", sa.window, "Search interval a,b")->required();
    solve->add_option("--moments", sa.M, "Number of moments M")->check(CLI::PositiveNumber);
    solve->add_option("--ell", sa.ell, "Block width (default: from the eigenvalue count)");
    add_degree_options(solve, sa.degree);
    solve->add_option("--mode", sa.mode, "Extraction and removal")
        ->check(CLI::IsMember({"rr-tsvd", "rr-residual", "rrr"}));
    solve->add_option("--tol", sa.tol, "Relative residual tolerance");
    solve->add_option("--delta", sa.delta, "Residual threshold for rr-residual");
    solve->add_option("--trunc-tol", sa.trunc_tol, "Singular value cutoff for rr-tsvd");
    solve->add_option("--seed", sa.seed, "Seed for the starting block");
    solve->add_option("--max-restarts", sa.max_restarts, "Outer iteration limit")->check(CLI::PositiveNumber);
    solve->add_option("--n-target", sa.n_target, "Known eigenvalue count (default: stochastic estimate)");
    solve->add_option("--norm", sa.norm, "Residual normalisation")
        ->check(CLI::IsMember({"spectral-bound", "one-inf-mean"}));
    solve->add_flag("--vectors", sa.vectors, "Include eigenvectors in the report");
    solve->add_option("--out", sa.out, "Output file (default stdout)");

    std::string spec_path, bench_csv;
    unsigned workers = 0;
    auto* bench = app.add_subcommand("bench", "Run an experiment spec");
    bench->add_option("spec", spec_path, "Experiment spec JSON")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", bench_csv, "Diagnostics CSV (overrides the spec)");
    bench->add_option("--workers", workers, "Parallel runs (overrides the spec)");

    std::string plot_window, plot_out, plot_matrix;
    DegreeOptions plot_deg;
    Index plot_M = 1, plot_points = 2001;
    auto* plot = app.add_subcommand("filter-plot", "Tabulate the scalar filters on [-1, 1]");
    plot->add_option("--window", plot_window, "Window a,b (mapped units unless --matrix is given)")->required();
    plot->add_option("--matrix", plot_matrix, "Map the window with this matrix's spectral bounds")
        ->check(CLI::ExistingFile);
    plot->add_option("--moments", plot_M, "Filters k = 0..M-1")->check(CLI::PositiveNumber);
    add_degree_options(plot, plot_deg);
    plot->add_option("--points", plot_points, "Grid size")->check(CLI::Range(2, 10000000));
    plot->add_option("--out", plot_out, "Output CSV (default stdout)");

    std::string count_matrix, count_window, count_out;
    DegreeOptions count_deg;
    Index count_samples = 64;
    std::uint64_t count_seed = 0;
    auto* count = app.add_subcommand("count", "Estimate the number of eigenvalues in a window");
    count->add_option("--matrix", count_matrix, "Matrix Market file")->required()->check(CLI::ExistingFile);
    count->add_option("--window", count_window, "Window a,b")->required();
    add_degree_options(count, count_deg);
    count->add_option("--samples", count_samples, "Probe vectors")->check(CLI::Range(10, 1000000));
    count->add_option("--seed", count_seed, "Probe seed");
    count->add_option("--out", count_out, "Output file (default stdout)");

    cjss::bench::SyntheticSpec ss;
    std::string synth_feature = "none", synth_out, synth_meta;
    bool synth_complex = false;
    auto* synth = app.add_subcommand("synth", "Write a synthetic matrix with a known spectrum");
    synth->add_option("--n", ss.n, "Dimension")->check(CLI::Range(16, 5000));
    synth->add_option("--centre", ss.centre, "Window centre");
    synth->add_option("--count", ss.count, "Eigenvalues in the window");
    synth->add_option("--feature", synth_feature, "none, double or cluster")
        ->check(CLI::IsMember({"none", "double", "cluster"}));
    synth->add_option("--cluster-gap", ss.cluster_gap, "Split of the clustered pair");
    synth->add_option("--spectrum-seed", ss.spectrum_seed, "Seed for the eigenvalues");
    synth->add_option("--rotation-seed", ss.rotation_seed, "Seed for the eigenvectors");
    synth->add_flag("--complex", synth_complex, "Complex Hermitian instead of real symmetric");
    synth->add_option("--out", synth_out, "Matrix Market output")->required();
    synth->add_option("--meta", synth_meta, "Window and reference eigenvalues as JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "cjss: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    try {
        if (*solve) {
            const json out = file_is_complex(sa.matrix) ? run_solve<std::complex<double>>(sa) : run_solve<double>(sa);
            emit(sa.out, out.dump(2) + "\n");
        } else if (*bench) {
            std::ifstream in(spec_path);
            auto spec = cjss::bench::experiment_from_json(json::parse(in));
            if (!bench_csv.empty()) spec.csv_path = bench_csv;
            if (workers > 0) spec.workers = workers;
            const auto result = cjss::bench::run_experiment(spec);
            if (spec.csv_path.empty() && spec.json_path.empty()) cjss::bench::write_csv(std::cout, result.rows);
            cjss::bench::write_outputs(spec, result);
            std::ostringstream summary;
            cjss::bench::write_summary_csv(summary, result.summaries);
            std::cerr << summary.str();
        } else if (*plot) {
            auto [a, b] = parse_window(plot_window);
            cjss::Window w = plot_matrix.empty()
                                 ? cjss::mapped_window(a, b)
                                 : (file_is_complex(plot_matrix)
                                        ? cjss::map_window(cjss::estimate_bounds(
                                                               cjss::bench::load_matrix_market<std::complex<double>>(
                                                                   plot_matrix)),
                                                           a, b)
                                        : cjss::map_window(
                                              cjss::estimate_bounds(cjss::bench::load_matrix_market<double>(plot_matrix)),
                                              a, b));
            const Index d = resolve_degree(plot_deg, w, plot_M);
            const auto plan = cjss::make_filter_plan(w, plot_M, d);
            std::ostringstream csv;
            csv << "t";
            for (Index k = 0; k < plot_M; ++k) csv << ",F" << k;
            csv << "\n";
            for (Index i = 0; i < plot_points; ++i) {
                const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(plot_points - 1);
                csv << cjss::bench::format_double(t);
                for (Index k = 0; k < plot_M; ++k) csv << ',' << cjss::bench::format_double(cjss::scalar_filter_eval(plan, k, t));
                csv << "\n";
            }
            emit(plot_out, csv.str());
        } else if (*count) {
            const json out = file_is_complex(count_matrix)
                                 ? run_count<std::complex<double>>(count_matrix, count_window, count_deg,
                                                                   count_samples, count_seed)
                                 : run_count<double>(count_matrix, count_window, count_deg, count_samples, count_seed);
            emit(count_out, out.dump(2) + "\n");
        } else if (*synth) {
            ss.feature = cjss::bench::parse_feature(synth_feature);
            json meta;
            auto write = [&](const auto& problem) {
                std::ofstream out(synth_out);
                if (!out) throw std::runtime_error("cannot write '" + synth_out + "'");
                cjss::bench::write_matrix_market(out, problem.op.A);
                std::vector<double> inside;
                for (Index i = 0; i < problem.op.lambda.size(); ++i)
                    if (problem.a <= problem.op.lambda(i) && problem.op.lambda(i) <= problem.b)
                        inside.push_back(problem.op.lambda(i));
                std::sort(inside.begin(), inside.end());
                meta = {{"n", ss.n},
                        {"window", {problem.a, problem.b}},
                        {"n_ev", problem.n_ev},
                        {"eigenvalues", inside},
                        {"lambda_min", problem.lambda_min},
                        {"lambda_max", problem.lambda_max}};
            };
            if (synth_complex) write(cjss::bench::make_synthetic_problem<std::complex<double>>(ss));
            else write(cjss::bench::make_synthetic_problem<double>(ss));
            emit(synth_meta, meta.dump(2) + "\n");
        }
    } catch (const UsageError& e) {
        std::cerr << "cjss: " << e.what() << "\n";
        return 2;
    } catch (const cjss::NumericalError& e) {
        return fail("numerical", e.what());
    } catch (const json::exception& e) {
        return fail("spec", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("invalid-argument", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return 0;
}
