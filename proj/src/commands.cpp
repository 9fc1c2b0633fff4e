#include "laxqsl/commands.hpp"

#include "laxqsl/analysis.hpp"
#include "laxqsl/io.hpp"
#include "laxqsl/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace laxqsl {

namespace fs = std::filesystem;

namespace {

// Usage problems detected after parsing (exit 2).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

fs::path output_dir() {
    const char* env = std::getenv("LAXQSL_OUTPUT_DIR");
    return (env && *env) ? fs::path(env) : fs::path(".");
}

fs::path default_output(const std::string& name) { return output_dir() / name; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void check_odd(int n) {
    if (n < 3 || n % 2 == 0) throw UsageError("N must be odd ≥ 3 (got " + std::to_string(n) + ")");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

SolutionDocument load_or_usage(const std::string& path) {
    try {
        return load_document(path);
    } catch (const DocumentError& e) {
        throw UsageError(e.what());
    }
}

Trajectory sampled_trajectory(const BrachSolution& sol, double t_end, int samples, double tol) {
    IntegrationOptions io;
    io.rtol = io.atol = tol;
    io.samples = samples;
    return integrate(sol.a0, t_end, sol.config, io).trajectory;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
    int n = 0;
    std::string guess = "fit";
    std::uint64_t seed = 1;
    double tol = 1e-10;
    double accept = 1e-8;
    int max_iter = 100;
    int restarts = 4;
    int threads = 1;
    int samples = 0;
    std::string initial;
    std::string out;
    bool timestamp = false;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
    check_odd(a.n);
    RunConfig rc;
    rc.command = "solve";
    rc.n_sites = a.n;
    try {
        rc.guess = guess_from_string(a.guess);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    rc.seed = a.seed;
    rc.restarts = a.restarts;
    rc.integration_tol = a.tol;
    rc.accept_tol = a.accept;
    rc.max_iterations = a.max_iter;
    rc.threads = a.threads;
    rc.trajectory_samples = a.samples;
    rc.initial = a.initial;
    try {
        rc.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (a.samples < 0) throw UsageError("--samples must be >= 0");

    SolveOptions so = rc.solve_options();
    if (rc.guess == GuessMode::file) {
        if (a.initial.empty()) throw UsageError("--guess file requires --initial <solution.json>");
        const auto init = load_or_usage(a.initial);
        const auto& prev = init.solution;
        so.initial = prev.config.n_sites == a.n ? extract_unknowns(prev.a0, prev.l0) : warm_start_guess(prev, a.n);
    }

    SolutionDocument doc;
    doc.run = rc;
    doc.solution = solve(a.n, so);
    if (a.timestamp) {
        char buf[32];
        const std::time_t now = std::time(nullptr);
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        doc.created = buf;
    }
    const fs::path path = a.out.empty() ? default_output("sol" + std::to_string(a.n) + ".json") : fs::path(a.out);
    save_document(doc, path);

    const auto& s = doc.solution;
    out << "N          " << s.config.n_sites << "\n"
        << "L0         " << fmt("%.12g", s.l0) << "\n"
        << "tau        " << fmt("%.12g", s.tau) << "\n"
        << "J0         " << fmt("%.12g", s.j0) << "\n"
        << "J0*tau     " << fmt("%.12g", s.j0_tau) << "\n"
        << "residual   " << fmt("%.3e", s.residual_norm) << "\n"
        << "iterations " << s.iterations << " (attempts " << s.attempts << ")\n"
        << "converged  " << (s.converged ? "yes" : "no") << "\n"
        << "written    " << path.string() << "\n";
    if (!s.converged) {
        err << "solve: no convergence (" << s.message << "), best residual " << fmt("%.3e", s.residual_norm)
            << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    std::string solution;
    std::string checks = "invariants,oracle,transfer,spectrum,phase,profile";
    double tol = 1e-12;
    int samples = 200;
    int threads = 1;
    std::string report;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream&) {
    const auto doc = load_or_usage(a.solution);
    const auto names = split_list(a.checks);
    if (names.empty()) throw UsageError("--checks is empty");
    for (const auto& nm : names)
        if (std::find(check_names().begin(), check_names().end(), nm) == check_names().end())
            throw UsageError("unknown check '" + nm + "'");
    if (a.samples < 2) throw UsageError("--samples must be >= 2");
    if (!(a.tol > 0.0)) throw UsageError("--tol must be positive");
    VerifyOptions vo;
    vo.tol = a.tol;
    vo.samples_per_period = a.samples;
    vo.threads = std::max(1, a.threads);
    const auto rep = verify_solution(doc.solution, names, vo);

    for (const auto& c : rep.checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << "\n";
        for (const auto& m : c.measurements) {
            out << "    " << m.name << " = " << fmt("%.3e", m.value);
            if (std::isfinite(m.threshold))
                out << "  (< " << fmt("%.1e", m.threshold) << ")" << (m.passed() ? "" : "  <-- fails");
            else
                out << "  (reported)";
            out << "\n";
        }
        if (!c.note.empty()) out << "    note: " << c.note << "\n";
    }
    out << (rep.passed() ? "all checks passed" : "verification failed") << "\n";
    if (!a.report.empty()) {
        const fs::path p(a.report);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + a.report);
        os << rep.to_json().dump(2) << "\n";
    }
    return rep.passed() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    int n_min = 7;
    int n_max = 15;
    int step = 2;
    std::string out;
    std::string fit_out;
    std::string fit_only;
    bool no_warm = false;
    double tol = 1e-10;
    double accept = 1e-8;
    int threads = 1;
};

nlohmann::json fit_report(const std::vector<SweepRow>& rows, const std::optional<ScalingFit>& fit) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& r : rows)
        jr.push_back({{"n_sites", r.n_sites}, {"converged", r.converged}, {"l0_tau", r.l0_tau},
                      {"j0_tau", r.j0_tau}, {"residual", r.residual}});
    return {{"schema_version", kSchemaVersion},
            {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
            {"model", "l0_tau = c0 + c1 * N^c2"},
            {"rows", jr},
            {"fit", fit ? to_json(*fit) : nlohmann::json(nullptr)}};
}

void print_fit(std::ostream& out, const std::vector<SweepRow>& rows, const std::optional<ScalingFit>& fit) {
    out << "    N   L0*tau            J0*tau            residual\n";
    for (const auto& r : rows) {
        char buf[128];
        if (r.converged)
            std::snprintf(buf, sizeof buf, "%5d   %-16.10f  %-16.10f  %.2e\n", r.n_sites, r.l0_tau, r.j0_tau,
                          r.residual);
        else
            std::snprintf(buf, sizeof buf, "%5d   (failed, residual %.2e)\n", r.n_sites, r.residual);
        out << buf;
    }
    if (!fit) {
        out << "fit: refused (fewer than 4 converged sizes)\n";
        return;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "fit: c0 = %.6f +- %.2g, c1 = %.6f +- %.2g, c2 = %.6f +- %.2g\n", fit->c0,
                  fit->se0, fit->c1, fit->se1, fit->c2, fit->se2);
    out << buf;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<SweepRow> rows;
    fs::path table;
    if (!a.fit_only.empty()) {
        std::ifstream is(a.fit_only, std::ios::binary);
        if (!is) throw UsageError("cannot read " + a.fit_only);
        try {
            rows = read_sweep_csv(is);
        } catch (const DocumentError& e) {
            throw UsageError(e.what());
        }
        table = a.fit_only;
    } else {
        check_odd(a.n_min);
        check_odd(a.n_max);
        if (a.step <= 0 || a.step % 2 != 0) throw UsageError("--step must be a positive even integer");
        if (a.n_min > a.n_max) throw UsageError("empty range: --n-min exceeds --n-max");
        if (!(a.tol > 0.0) || !(a.accept > 0.0)) throw UsageError("tolerances must be positive");
        std::vector<int> ns;
        for (int n = a.n_min; n <= a.n_max; n += a.step) ns.push_back(n);
        SweepOptions so;
        so.solve.integration_tol = a.tol;
        so.solve.accept_tol = a.accept;
        so.solve.threads = std::max(1, a.threads);
        so.warm_start = !a.no_warm;
        rows = sweep(ns, so).rows;
        table = a.out.empty() ? default_output("sweep.csv") : fs::path(a.out);
        if (table.has_parent_path()) fs::create_directories(table.parent_path());
        std::ofstream os(table, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + table.string());
        write_sweep_csv(os, rows);
    }
    const auto fit = fit_scaling(rows);
    print_fit(out, rows, fit);

    fs::path fit_path;
    if (!a.fit_out.empty()) {
        fit_path = a.fit_out;
    } else {
        fit_path = table;
        fit_path.replace_extension(".fit.json");
    }
    if (fit_path.has_parent_path()) fs::create_directories(fit_path.parent_path());
    std::ofstream fo(fit_path, std::ios::binary);
    if (!fo) throw std::runtime_error("cannot write " + fit_path.string());
    fo << fit_report(rows, fit).dump(2) << "\n";
    if (a.fit_only.empty()) out << "table      " << table.string() << "\n";
    out << "fit report " << fit_path.string() << "\n";

    const bool all = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
    if (!all) {
        err << "sweep: some sizes did not converge\n";
        return kExitFailure;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- export

struct ExportArgs {
    std::string solution;
    std::string what;
    std::string format = "csv";
    std::string out;
    int samples = 200;
    double tol = 1e-12;
    int threads = 1;
};

void add_profile_rows(std::vector<CsvRow>& rows, double t, const LaxEigenvector& a) {
    const VecR pop = 2.0 * a.x.cwiseAbs2();  // |psi_m|^2 in either gauge
    for (int m = 0; m < a.size(); ++m) {
        rows.push_back({t, m + 1, "x", a.x[m]});
        rows.push_back({t, m + 1, "y", a.y[m]});
        rows.push_back({t, m + 1, "population", pop[m]});
    }
}

int cmd_export(const ExportArgs& a, std::ostream& out, std::ostream&) {
    static const std::vector<std::string> kinds{"profiles", "couplings", "spectrum", "trajectory"};
    if (std::find(kinds.begin(), kinds.end(), a.what) == kinds.end())
        throw UsageError("unknown --what '" + a.what + "' (profiles|couplings|spectrum|trajectory)");
    if (a.format != "csv") throw UsageError("unsupported --format '" + a.format + "' (csv)");
    if (a.samples < 2) throw UsageError("--samples must be >= 2");
    const auto doc = load_or_usage(a.solution);
    const auto& sol = doc.solution;
    if (!sol.a0.is_valid(1e-10)) throw std::runtime_error("export: a0 violates the normalisation constraints");

    // stored trajectory when present, otherwise re-integrate over [0, tau]
    const Trajectory traj =
        sol.trajectory ? *sol.trajectory : sampled_trajectory(sol, sol.tau, a.samples, a.tol);

    std::vector<CsvRow> rows;
    if (a.what == "profiles") {
        const auto t3 = sampled_trajectory(sol, sol.tau, 2, a.tol);  // t = 0, tau/2, tau
        for (std::size_t k = 0; k < t3.size(); ++k) add_profile_rows(rows, t3.times[k], t3.states[k]);
    } else if (a.what == "couplings") {
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const auto j = couplings_from_lax(traj.states[k], sol.config).j;
            for (Eigen::Index m = 0; m < j.size(); ++m)
                rows.push_back({traj.times[static_cast<Eigen::Index>(k)], static_cast<int>(m) + 1, "J", j[m]});
        }
    } else if (a.what == "spectrum") {
        const auto spec = instantaneous_spectrum(traj, Gauge::q_transformed, std::max(1, a.threads));
        for (const auto& s : spec) {
            for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
                rows.push_back({s.time, static_cast<int>(k) + 1, "energy", s.eigenvalues[k]});
                rows.push_back({s.time, static_cast<int>(k) + 1, "overlap_sq", std::norm(s.overlap_coeffs[k])});
            }
        }
    } else {
        for (std::size_t k = 0; k < traj.size(); ++k)
            add_profile_rows(rows, traj.times[static_cast<Eigen::Index>(k)], traj.states[k]);
    }

    if (a.out == "-") {
        write_long_csv(out, rows);
        return kExitOk;
    }
    const fs::path path = a.out.empty() ? default_output(a.what + ".csv") : fs::path(a.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_long_csv(os, rows);
    out << "wrote " << rows.size() << " rows to " << path.string() << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-optimal single-excitation transfer on an antiperiodic qubit ring", "laxqsl"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve_cmd = app.add_subcommand("solve", "Solve the traveling-soliton boundary-value problem");
    solve_cmd->add_option("--n", sa.n, "Number of sites (odd, >= 3)")->required();
    solve_cmd->add_option("--guess", sa.guess, "Initial guess: fit|random|file")->capture_default_str();
    solve_cmd->add_option("--seed", sa.seed, "Seed for random guesses")->capture_default_str();
    solve_cmd->add_option("--tol", sa.tol, "Integration tolerance (rtol = atol)")->capture_default_str();
    solve_cmd->add_option("--accept", sa.accept, "Accepted residual infinity norm")->capture_default_str();
    solve_cmd->add_option("--max-iter", sa.max_iter, "Levenberg-Marquardt iterations per start")
        ->capture_default_str();
    solve_cmd->add_option("--restarts", sa.restarts, "Extra seeded starts in random mode")->capture_default_str();
    solve_cmd->add_option("--threads", sa.threads, "Threads for Jacobian columns")->capture_default_str();
    solve_cmd->add_option("--samples", sa.samples, "Store a trajectory with this many intervals over tau")
        ->capture_default_str();
    solve_cmd->add_option("--initial", sa.initial, "Solution document used by --guess file");
    solve_cmd->add_option("--out", sa.out, "Output document (default $LAXQSL_OUTPUT_DIR/sol<N>.json)");
    solve_cmd->add_flag("--timestamp", sa.timestamp, "Record the creation time in the document");

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "Run the verification checks on a solution document");
    verify_cmd->add_option("--solution", va.solution, "Solution document")->required();
    verify_cmd->add_option("--checks", va.checks, "Comma separated subset of " + va.checks)
        ->capture_default_str();
    verify_cmd->add_option("--tol", va.tol, "Integration tolerance of the checks")->capture_default_str();
    verify_cmd->add_option("--samples", va.samples, "Uniform samples per period tau")->capture_default_str();
    verify_cmd->add_option("--threads", va.threads, "Threads for spectrum samples")->capture_default_str();
    verify_cmd->add_option("--report", va.report, "Write the JSON report here");

    SweepArgs wa;
    auto* sweep_cmd = app.add_subcommand("sweep", "Solve a range of ring sizes and fit L0(N) tau");
    sweep_cmd->add_option("--n-min", wa.n_min, "Smallest N (odd)")->capture_default_str();
    sweep_cmd->add_option("--n-max", wa.n_max, "Largest N (odd)")->capture_default_str();
    sweep_cmd->add_option("--step", wa.step, "Increment (even)")->capture_default_str();
    sweep_cmd->add_option("--out", wa.out, "Table CSV (default $LAXQSL_OUTPUT_DIR/sweep.csv)");
    sweep_cmd->add_option("--fit-out", wa.fit_out, "Fit report JSON (default: table path with .fit.json)");
    sweep_cmd->add_option("--fit-only", wa.fit_only, "Refit an existing table instead of solving");
    sweep_cmd->add_flag("--no-warm-start", wa.no_warm, "Start every N from the analytical fit");
    sweep_cmd->add_option("--tol", wa.tol, "Integration tolerance")->capture_default_str();
    sweep_cmd->add_option("--accept", wa.accept, "Accepted residual infinity norm")->capture_default_str();
    sweep_cmd->add_option("--threads", wa.threads, "Worker threads")->capture_default_str();

    ExportArgs ea;
    auto* export_cmd = app.add_subcommand("export", "Write plot data as long-format CSV");
    export_cmd->add_option("--solution", ea.solution, "Solution document")->required();
    export_cmd->add_option("--what", ea.what, "profiles|couplings|spectrum|trajectory")->required();
    export_cmd->add_option("--format", ea.format, "Output format (csv)")->capture_default_str();
    export_cmd->add_option("--out", ea.out, "Output file, '-' for stdout (default $LAXQSL_OUTPUT_DIR/<what>.csv)");
    export_cmd->add_option("--samples", ea.samples, "Intervals over tau when re-integrating")
        ->capture_default_str();
    export_cmd->add_option("--tol", ea.tol, "Integration tolerance when re-integrating")->capture_default_str();
    export_cmd->add_option("--threads", ea.threads, "Threads for spectrum samples")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());  // CLI11 consumes from the back
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(sa, out, err);
        if (verify_cmd->parsed()) return cmd_verify(va, out, err);
        if (sweep_cmd->parsed()) return cmd_sweep(wa, out, err);
        if (export_cmd->parsed()) return cmd_export(ea, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace laxqsl
