// least_squares.hpp - damped Gauss-Newton (Levenberg-Marquardt) for small dense problems
#pragma once

#include "laxqsl/ring.hpp"

#include <functional>
#include <string>

namespace laxqsl {

using ResidualFn = std::function<VecR(const VecR&)>;
using JacobianFn = std::function<MatR(const VecR&, const VecR&)>;  // (params, residual at params)

struct LmOptions {
    int max_iterations = 200;
    double stop_tol = 1e-12;      // stop once ||r||_inf falls below this
    double accept_tol = 1e-8;     // converged flag threshold on ||r||_inf
    double fd_rel_step = 1e-7;    // forward difference h_i = max(fd_min_step, fd_rel_step |u_i|)
    double fd_min_step = 1e-7;
    double initial_damping = 1e-3;
    int stall_iterations = 6;     // stop after this many iterations without 1% cost progress
    double step_tol = 0.0;        // stop after an accepted step with ||du|| <= step_tol (||u|| + step_tol)
    int threads = 1;              // Jacobian columns evaluated in parallel
};

struct LmResult {
    VecR params;
    VecR residual;
    MatR jacobian;  // at params
    double residual_inf = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string message;
};

// Forward-difference Jacobian. Column k only depends on parameter k, so the
// result is identical for any thread count.
MatR fd_jacobian(const ResidualFn& fn, const VecR& u, const VecR& r0, const LmOptions& opts);

// Residual evaluations that throw are treated as rejected trial steps; a throw
// at the starting point propagates.
LmResult levenberg_marquardt(const ResidualFn& fn, const VecR& u0, const LmOptions& opts,
                             const JacobianFn& jac = nullptr);

// Ratio of extreme singular values; infinity for rank deficiency.
double condition_number(const MatR& m);

}  // namespace laxqsl
