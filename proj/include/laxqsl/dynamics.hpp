// dynamics.hpp - evolution of the Lax eigenvector under the reduced equations
#pragma once

#include "laxqsl/ode.hpp"
#include "laxqsl/ring.hpp"

#include <optional>
#include <vector>

namespace laxqsl {

// Tangent [xdot; ydot] of
//   xdot_m = 2 L0 [(x_{m-1}^2 + x_{m+1}^2) y_m - (x_{m-1} y_{m-1} + x_{m+1} y_{m+1}) x_m]
//   ydot_m = 2 L0 [-(y_{m-1}^2 + y_{m+1}^2) x_m + (x_{m-1} y_{m-1} + x_{m+1} y_{m+1}) y_m]
VecR rhs(const LaxEigenvector& a, const RingConfig& config);

// Same tangent computed as -i H^Q a with H^Q assembled from the reconstructed
// couplings. Agreement with rhs() certifies the coupling formula.
VecR rhs_via_hamiltonian(const LaxEigenvector& a, const RingConfig& config);

VecR pack(const LaxEigenvector& a);
LaxEigenvector unpack(const VecR& state);

// Restores <x|x> = <y|y> = 1/2 and <x|y> = 0 with a symmetric orthogonalisation.
void project_to_constraints(LaxEigenvector& a);

struct InvariantReport {
    double max_norm_drift = 0.0;           // max_t |<x|x> - 1/2| + |<y|y> - 1/2|
    double max_orthogonality_drift = 0.0;  // max_t |<x|y>|
    double max_coupling_norm_drift = 0.0;  // max_t relative drift of sum J^2
    std::optional<double> lax_eigenvalue_drift;  // set by the matrix oracle
    bool drift_flag = false;               // any drift above 1e3 * tol
};

struct Trajectory {
    VecR times;
    std::vector<LaxEigenvector> states;
    RingConfig config;

    std::size_t size() const { return states.size(); }
};

struct IntegrationOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    int samples = 100;     // number of uniform intervals in the returned trajectory
    bool project = false;  // re-impose the constraints after every step
};

struct IntegrationResult {
    Trajectory trajectory;
    InvariantReport invariants;
    ode::Stats stats;
};

// Adaptive integration over [0, t_end]. Throws ode::IntegrationError on step
// size underflow; excessive drift is flagged in the report, not thrown.
IntegrationResult integrate(const LaxEigenvector& a0, double t_end, const RingConfig& config,
                            const IntegrationOptions& opts = {});

// Final state only, no sampling or monitoring. Used inside the shooting residual.
LaxEigenvector propagate(const LaxEigenvector& a0, double t_end, const RingConfig& config, double rtol,
                         double atol);

}  // namespace laxqsl
