// analysis.hpp - speed limit, traveling-wave profile, instantaneous spectrum,
// Aharonov-Anandan phase
#pragma once

#include "laxqsl/bvp.hpp"
#include "laxqsl/dynamics.hpp"
#include "laxqsl/ring.hpp"

#include <numbers>
#include <vector>

namespace laxqsl {

struct SpeedLimit {
    double j0 = 0.0;
    double j0_tau = 0.0;
    VecR coupling_norm_series;        // sqrt(sum J^2) at every trajectory sample
    double relative_variation = 0.0;  // (max - min) / j0, zero when j0 = 0
};

SpeedLimit speed_limit(const Trajectory& traj);

// Uses the stored trajectory or, when absent, integrates a0 over [0, tau] with
// `samples` uniform intervals at tolerance tol.
SpeedLimit speed_limit(const BrachSolution& sol, int samples = 200, double tol = 1e-12);

struct ProfileCheck {
    double max_error = 0.0;  // max over x and y
    double max_error_x = 0.0;
    double max_error_y = 0.0;
    int samples_per_period = 0;
    std::size_t comparisons = 0;
};

// Compares every a_m(t_k) with the time series of site N at t_k + (N - m) tau,
// continued antiperiodically (a(t + N tau) = -a(t)). Requires a uniform grid
// whose step divides tau and that covers at least one period.
// Throws std::invalid_argument on insufficient sampling.
ProfileCheck traveling_wave_check(const Trajectory& traj);

struct SpectrumSample {
    double time = 0.0;
    VecR eigenvalues;     // ascending
    VecC overlap_coeffs;  // c_m = <v_m | psi>
};

// Diagonalises H(t) in the requested gauge at every sample and expands psi(t).
// Eigenvector phases are fixed so that the largest component is real positive.
std::vector<SpectrumSample> instantaneous_spectrum(const Trajectory& traj, Gauge gauge = Gauge::q_transformed,
                                                   int threads = 1);

struct SpectrumSummary {
    double max_asymmetry = 0.0;          // max_t max_k |E_k + E_{N-1-k}|
    double max_overlap_norm_defect = 0.0;  // max_t |sum |c|^2 - 1|
    double max_dominant_overlap = 0.0;   // max_t max_m |c_m|^2
    double max_min_abs_eigenvalue = 0.0; // max_t min_k |E_k|
    double max_eigenvalue_drift = 0.0;   // max_t max_k |E_k(t) - E_k(0)|, reported only
};

SpectrumSummary summarize_spectrum(const std::vector<SpectrumSample>& samples);

struct PhaseResult {
    double winding_phase = 0.0;      // phi, branch nearest the requested winding
    double dynamical_integral = 0.0; // integral of <psi|H|psi> dt
    double aa_phase = 0.0;           // phi + integral, wrapped to (-pi, pi]
    double closure_defect = 0.0;     // || psi(T) - e^{i phi} psi(0) ||
    double winding_mismatch = 0.0;   // |phi - winding|
};

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Composite Simpson on a uniform grid (3/8 rule on the last three intervals
// when the interval count is odd). Throws on non-uniform spacing.
double simpson(const VecR& times, const VecR& values);

// Generic form: psi samples on a uniform time grid with the matching energies
// <psi|H|psi>. phi is read from <psi(0)|psi(T)>.
PhaseResult aa_phase(const VecR& times, const std::vector<VecC>& psi, const VecR& energies,
                     double winding = std::numbers::pi);

// q-gauge wave function and Hamiltonian reconstructed along the trajectory.
PhaseResult aa_phase(const Trajectory& traj, double winding = std::numbers::pi);

// <psi|H|psi> at each trajectory sample (complex; the imaginary part measures
// Hermiticity loss).
VecC expectation_energy(const Trajectory& traj, Gauge gauge = Gauge::q_transformed);

}  // namespace laxqsl
