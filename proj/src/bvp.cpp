#include "laxqsl/bvp.hpp"

#include <cmath>
#include <random>
#include <thread>

namespace laxqsl {

namespace {

void require_odd(int n) {
    if (n < 3 || n % 2 == 0) throw std::invalid_argument("N must be odd >= 3, got " + std::to_string(n));
}

RingConfig shooting_config(int n, double l0, double tau) {
    RingConfig c;
    c.n_sites = n;
    c.lax_scale = l0;
    c.transfer_time = tau;
    return c;
}

ShootingUnknowns normalised_unknowns(VecR x_half, VecR y_half, double l0) {
    ShootingUnknowns u{std::move(x_half), std::move(y_half), l0};
    const int n = static_cast<int>(u.x_half.size() + u.y_half.size());
    auto a = expand_unknowns(u, shooting_config(n, l0, 1.0));
    a.x *= std::sqrt(0.5 / a.x.squaredNorm());
    a.y *= std::sqrt(0.5 / a.y.squaredNorm());
    return extract_unknowns(a, l0);
}

}  // namespace

VecR ShootingUnknowns::flatten() const {
    VecR u(x_half.size() + y_half.size() + 1);
    u << x_half, y_half, l0;
    return u;
}

ShootingUnknowns ShootingUnknowns::unflatten(const VecR& u, int n_sites) {
    require_odd(n_sites);
    const int hx = (n_sites + 1) / 2, hy = (n_sites - 1) / 2;
    if (u.size() != hx + hy + 1) throw std::invalid_argument("ShootingUnknowns: length mismatch");
    return {u.head(hx), u.segment(hx, hy), u[hx + hy]};
}

double fitted_lax_scale(int n_sites, double tau) {
    return (0.58 + 0.42 * std::pow(static_cast<double>(n_sites), 0.58)) / tau;
}

LaxEigenvector expand_unknowns(const ShootingUnknowns& u, const RingConfig& config) {
    const int n = config.n_sites;
    require_odd(n);
    const int hx = (n + 1) / 2, hy = (n - 1) / 2;
    if (u.x_half.size() != hx || u.y_half.size() != hy) {
        throw std::invalid_argument("expand_unknowns: half-vector lengths do not match N");
    }
    VecR x(n), y(n);
    for (int i = 0; i < hx; ++i) x[i] = x[n - 1 - i] = u.x_half[i];
    for (int i = 0; i < hy; ++i) {
        y[i] = u.y_half[i];
        y[n - 1 - i] = -u.y_half[i];
    }
    y[hy] = 0.0;
    return {std::move(x), std::move(y)};
}

ShootingUnknowns extract_unknowns(const LaxEigenvector& a, double l0) {
    const int n = a.size();
    require_odd(n);
    return {a.x.head((n + 1) / 2), a.y.head((n - 1) / 2), l0};
}

VecR shooting_residual(const ShootingUnknowns& u, const RingConfig& config, double tol) {
    const int n = config.n_sites;
    if (!(u.l0 > 0.0) || !std::isfinite(u.l0)) {
        throw ShootingError("shooting_residual: L0 must be positive", u.flatten());
    }
    const RingConfig c = shooting_config(n, u.l0, config.transfer_time);
    const LaxEigenvector a0 = expand_unknowns(u, c);
    LaxEigenvector at;
    try {
        at = propagate(a0, c.transfer_time, c, tol, tol);
    } catch (const ode::IntegrationError& e) {
        throw ShootingError(std::string("shooting_residual: ") + e.what() + " at t=" + std::to_string(e.time()),
                            u.flatten());
    }
    VecR r(2 * n + 3);
    for (int i = 0; i + 1 < n; ++i) {
        r[i] = at.x[i + 1] - a0.x[i];
        r[n + i] = at.y[i + 1] - a0.y[i];
    }
    r[n - 1] = at.x[0] + a0.x[n - 1];
    r[2 * n - 1] = at.y[0] + a0.y[n - 1];
    r[2 * n] = a0.x.squaredNorm() - 0.5;
    r[2 * n + 1] = a0.y.squaredNorm() - 0.5;
    r[2 * n + 2] = a0.x.dot(a0.y);
    return r;
}

std::string to_string(GuessMode g) {
    switch (g) {
        case GuessMode::fit: return "fit";
        case GuessMode::random: return "random";
        default: return "file";
    }
}

GuessMode guess_from_string(const std::string& s) {
    if (s == "fit") return GuessMode::fit;
    if (s == "random") return GuessMode::random;
    if (s == "file") return GuessMode::file;
    throw std::invalid_argument("unknown guess mode: " + s);
}

ShootingUnknowns random_guess(int n_sites, std::uint64_t seed) {
    require_odd(n_sites);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-1.0, 1.0);
    VecR xh((n_sites + 1) / 2), yh((n_sites - 1) / 2);
    for (auto& v : xh) v = ux(rng);
    for (auto& v : yh) v = uy(rng);
    return normalised_unknowns(std::move(xh), std::move(yh), fitted_lax_scale(n_sites));
}

ShootingUnknowns warm_start_guess(const BrachSolution& prev, int new_n) {
    require_odd(new_n);
    const int old_n = prev.config.n_sites;
    const int shift = (new_n - old_n) / 2;  // new index = old index + shift
    VecR x(new_n), y(new_n);
    for (int i = 0; i < new_n; ++i) {
        const int j = i - shift;
        if (j >= 0 && j < old_n) {
            x[i] = prev.a0.x[j];
            y[i] = prev.a0.y[j];
        } else {
            x[i] = 0.0;
            y[i] = j < 0 ? prev.a0.y[0] : prev.a0.y[old_n - 1];
        }
    }
    LaxEigenvector a{x, y};
    const double l0 = prev.l0 * fitted_lax_scale(new_n) / fitted_lax_scale(old_n);
    auto u = extract_unknowns(a, l0);
    return normalised_unknowns(u.x_half, u.y_half, l0);
}

void finalize_solution(BrachSolution& sol, double verify_tol, int trajectory_samples) {
    sol.config = shooting_config(sol.a0.size(), sol.l0, sol.tau);
    sol.j0 = couplings_from_lax(sol.a0, sol.config).norm();
    sol.j0_tau = sol.j0 * sol.tau;
    if (!sol.a0.is_valid(1e-10)) return;  // invariant pass needs a valid state
    IntegrationOptions io;
    io.rtol = io.atol = verify_tol;
    io.samples = trajectory_samples > 0 ? trajectory_samples : 200;
    auto run = integrate(sol.a0, sol.tau, sol.config, io);
    sol.invariants = run.invariants;
    if (trajectory_samples > 0) sol.trajectory = std::move(run.trajectory);
}

BrachSolution solve(int n_sites, const SolveOptions& opts) {
    require_odd(n_sites);
    const double tau = 1.0;
    const RingConfig base = shooting_config(n_sites, fitted_lax_scale(n_sites, tau), tau);

    std::vector<ShootingUnknowns> starts;
    switch (opts.guess) {
        case GuessMode::fit:
            starts.push_back(extract_unknowns(initial_guess_fit(base), base.lax_scale));
            break;
        case GuessMode::random:
            for (int k = 0; k <= opts.restarts; ++k) starts.push_back(random_guess(n_sites, opts.seed + k));
            break;
        case GuessMode::file:
            if (!opts.initial) throw std::invalid_argument("solve: guess=file needs initial unknowns");
            starts.push_back(*opts.initial);
            break;
    }

    LmOptions lm;
    lm.max_iterations = opts.max_iterations;
    lm.accept_tol = opts.accept_tol;
    lm.stop_tol = opts.stop_tol;
    lm.threads = opts.threads;

    const double itol = opts.integration_tol;
    ResidualFn fn = [&](const VecR& u) {
        return shooting_residual(ShootingUnknowns::unflatten(u, n_sites), base, itol);
    };

    std::optional<LmResult> best;
    int attempts = 0;
    for (const auto& start : starts) {
        ++attempts;
        LmResult r = levenberg_marquardt(fn, start.flatten(), lm);
        if (!best || r.residual_inf < best->residual_inf) best = std::move(r);
        if (best->converged) break;
    }

    BrachSolution sol;
    const auto u = ShootingUnknowns::unflatten(best->params, n_sites);
    sol.l0 = u.l0;
    sol.tau = tau;
    sol.a0 = expand_unknowns(u, shooting_config(n_sites, u.l0, tau));
    sol.residual_norm = best->residual_inf;
    sol.converged = best->converged;
    sol.iterations = best->iterations;
    sol.attempts = attempts;
    sol.jacobian_condition = condition_number(best->jacobian);
    sol.message = best->message;
    finalize_solution(sol, opts.verify_tol, opts.trajectory_samples);
    return sol;
}

std::optional<ScalingFit> fit_scaling(const std::vector<SweepRow>& rows) {
    std::vector<double> ns, ls;
    for (const auto& r : rows) {
        if (r.converged) {
            ns.push_back(r.n_sites);
            ls.push_back(r.l0_tau);
        }
    }
    if (ns.size() < 4) return std::nullopt;
    const Eigen::Index m = static_cast<Eigen::Index>(ns.size());
    ResidualFn fn = [&](const VecR& c) {
        VecR r(m);
        for (Eigen::Index i = 0; i < m; ++i) r[i] = c[0] + c[1] * std::pow(ns[i], c[2]) - ls[i];
        return r;
    };
    JacobianFn jac = [&](const VecR& c, const VecR&) {
        MatR j(m, 3);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double p = std::pow(ns[i], c[2]);
            j(i, 0) = 1.0;
            j(i, 1) = p;
            j(i, 2) = c[1] * p * std::log(ns[i]);
        }
        return j;
    };
    LmOptions lm;
    lm.max_iterations = 500;
    lm.stop_tol = 0.0;
    lm.stall_iterations = 25;
    lm.step_tol = 1e-13;
    VecR c0(3);
    c0 << 0.58, 0.42, 0.58;
    const auto res = levenberg_marquardt(fn, c0, lm, jac);

    ScalingFit fit;
    fit.c0 = res.params[0];
    fit.c1 = res.params[1];
    fit.c2 = res.params[2];
    const double rss = res.residual.squaredNorm();
    fit.rms_residual = std::sqrt(rss / static_cast<double>(m));
    const Eigen::Index dof = m - 3;
    const MatR jtj = res.jacobian.transpose() * res.jacobian;
    const MatR cov = (rss / static_cast<double>(dof)) * jtj.inverse();
    fit.se0 = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.se1 = std::sqrt(std::max(0.0, cov(1, 1)));
    fit.se2 = std::sqrt(std::max(0.0, cov(2, 2)));
    for (Eigen::Index i = 0; i < m; ++i) fit.relative_deviation.push_back(res.residual[i] / ls[i]);
    return fit;
}

SweepResult sweep(const std::vector<int>& n_list, const SweepOptions& opts) {
    for (int n : n_list) require_odd(n);
    SweepResult out;
    out.solutions.resize(n_list.size());

    auto row_of = [](const BrachSolution& s) {
        return SweepRow{s.config.n_sites, s.converged, s.l0 * s.tau, s.j0_tau, s.residual_norm};
    };

    if (!opts.warm_start && opts.solve.threads > 1 && n_list.size() > 1) {
        SolveOptions so = opts.solve;
        so.threads = 1;
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(n_list.size());
        const std::size_t nthreads = std::min<std::size_t>(opts.solve.threads, n_list.size());
        for (std::size_t t = 0; t < nthreads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t k = t; k < n_list.size(); k += nthreads) {
                    try {
                        out.solutions[k] = solve(n_list[k], so);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    } else {
        const BrachSolution* prev = nullptr;
        for (std::size_t k = 0; k < n_list.size(); ++k) {
            SolveOptions so = opts.solve;
            BrachSolution sol;
            if (opts.warm_start && prev && prev->converged) {
                so.guess = GuessMode::file;
                so.initial = warm_start_guess(*prev, n_list[k]);
                sol = solve(n_list[k], so);
                if (!sol.converged) {
                    so = opts.solve;
                    sol = solve(n_list[k], so);
                }
            } else {
                sol = solve(n_list[k], so);
            }
            out.solutions[k] = std::move(sol);
            prev = &out.solutions[k];
        }
    }
    for (const auto& s : out.solutions) out.rows.push_back(row_of(s));
    out.fit = fit_scaling(out.rows);
    return out;
}

}  // namespace laxqsl
