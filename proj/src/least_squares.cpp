#include "laxqsl/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace laxqsl {

MatR fd_jacobian(const ResidualFn& fn, const VecR& u, const VecR& r0, const LmOptions& opts) {
    const Eigen::Index np = u.size();
    MatR jac(r0.size(), np);
    auto column = [&](Eigen::Index k) {
        VecR up = u;
        const double h = std::max(opts.fd_min_step, opts.fd_rel_step * std::abs(u[k]));
        up[k] += h;
        const double hk = up[k] - u[k];  // exactly representable step
        jac.col(k) = (fn(up) - r0) / hk;
    };
    const int nthreads = std::clamp<int>(opts.threads, 1, static_cast<int>(np));
    if (nthreads == 1) {
        for (Eigen::Index k = 0; k < np; ++k) column(k);
        return jac;
    }
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (Eigen::Index k = t; k < np; k += nthreads) {
                try {
                    column(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return jac;
}

double condition_number(const MatR& m) {
    Eigen::JacobiSVD<MatR> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return std::numeric_limits<double>::infinity();
    const double smin = s[s.size() - 1];
    return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

LmResult levenberg_marquardt(const ResidualFn& fn, const VecR& u0, const LmOptions& opts,
                             const JacobianFn& jac_fn) {
    LmResult res;
    res.params = u0;
    res.residual = fn(u0);
    res.evaluations = 1;
    if (!res.residual.allFinite()) throw std::runtime_error("levenberg_marquardt: non-finite initial residual");

    const Eigen::Index np = u0.size();
    double cost = 0.5 * res.residual.squaredNorm();
    double lambda = opts.initial_damping;
    double nu = 2.0;
    VecR diag_scale = VecR::Zero(np);
    double best_checkpoint = cost;
    int stalled = 0;

    auto jacobian = [&](const VecR& u, const VecR& r) {
        if (jac_fn) return jac_fn(u, r);
        res.evaluations += static_cast<int>(np);
        return fd_jacobian(fn, u, r, opts);
    };

    res.jacobian = jacobian(res.params, res.residual);
    res.message = "iteration limit reached";
    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        res.residual_inf = res.residual.lpNorm<Eigen::Infinity>();
        if (res.residual_inf < opts.stop_tol) {
            res.message = "residual below stop tolerance";
            break;
        }
        const MatR& j = res.jacobian;
        // Marquardt scaling, non-decreasing as in MINPACK
        for (Eigen::Index k = 0; k < np; ++k) diag_scale[k] = std::max(diag_scale[k], j.col(k).norm());
        VecR d = diag_scale;
        for (Eigen::Index k = 0; k < np; ++k)
            if (d[k] == 0.0) d[k] = 1.0;

        MatR aug(j.rows() + np, np);
        aug.topRows(j.rows()) = j;
        aug.bottomRows(np) = (std::sqrt(lambda) * d).asDiagonal();
        VecR rhs_vec = VecR::Zero(j.rows() + np);
        rhs_vec.head(j.rows()) = -res.residual;
        const VecR step = aug.colPivHouseholderQr().solve(rhs_vec);

        const VecR trial = res.params + step;
        VecR r_trial;
        bool ok = true;
        try {
            r_trial = fn(trial);
            ++res.evaluations;
            ok = r_trial.allFinite();
        } catch (const std::exception&) {
            ++res.evaluations;
            ok = false;
        }

        const VecR jstep = j * step;
        const double predicted = -(res.residual.dot(jstep) + 0.5 * jstep.squaredNorm());
        const double new_cost = ok ? 0.5 * r_trial.squaredNorm() : std::numeric_limits<double>::infinity();
        const double rho = predicted > 0.0 ? (cost - new_cost) / predicted : -1.0;

        if (ok && new_cost < cost && rho > 1e-4) {
            res.params = trial;
            res.residual = std::move(r_trial);
            cost = new_cost;
            lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
            nu = 2.0;
            res.jacobian = jacobian(res.params, res.residual);
            if (step.norm() <= opts.step_tol * (res.params.norm() + opts.step_tol)) {
                res.message = "step below tolerance";
                ++res.iterations;
                break;
            }
        } else {
            lambda *= nu;
            nu *= 2.0;
        }

        if (cost < 0.99 * best_checkpoint) {
            best_checkpoint = cost;
            stalled = 0;
        } else if (++stalled >= opts.stall_iterations) {
            res.message = "no further progress";
            ++res.iterations;
            break;
        }
        if (lambda > 1e20) {
            res.message = "damping diverged";
            ++res.iterations;
            break;
        }
    }
    res.residual_inf = res.residual.lpNorm<Eigen::Infinity>();
    res.converged = res.residual_inf < opts.accept_tol;
    return res;
}

}  // namespace laxqsl
