// bvp.hpp - shooting solver for the traveling soliton on the antiperiodic ring
//
// Unknowns are the free halves of a mirror-symmetric x(0), a mirror-antisymmetric
// y(0) and L0, with tau fixed. The residual asks for a one-site right shift
// after tau (sign-flipped across the seam) plus the normalisation rows.
#pragma once

#include "laxqsl/dynamics.hpp"
#include "laxqsl/least_squares.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace laxqsl {

struct ShootingUnknowns {
    VecR x_half;  // x_1 .. x_{(N+1)/2}
    VecR y_half;  // y_1 .. y_{(N-1)/2}; the middle y is pinned to 0
    double l0 = 1.0;

    VecR flatten() const;
    static ShootingUnknowns unflatten(const VecR& u, int n_sites);
};

class ShootingError : public std::runtime_error {
public:
    ShootingError(const std::string& what, VecR params)
        : std::runtime_error(what), params_(std::move(params)) {}
    const VecR& params() const noexcept { return params_; }

private:
    VecR params_;
};

// Empirical fit L0(N) tau = 0.58 + 0.42 N^0.58, used as the starting L0.
double fitted_lax_scale(int n_sites, double tau = 1.0);

LaxEigenvector expand_unknowns(const ShootingUnknowns& u, const RingConfig& config);
ShootingUnknowns extract_unknowns(const LaxEigenvector& a, double l0);

// 2N + 3 rows: N x-shift rows, N y-shift rows, <x|x> - 1/2, <y|y> - 1/2, <x|y>.
// L0 is taken from u; config supplies N and tau.
VecR shooting_residual(const ShootingUnknowns& u, const RingConfig& config, double tol);

enum class GuessMode { fit, random, file };
std::string to_string(GuessMode g);
GuessMode guess_from_string(const std::string& s);

struct SolveOptions {
    GuessMode guess = GuessMode::fit;
    std::uint64_t seed = 1;
    int restarts = 4;              // extra seeded attempts in random mode
    double integration_tol = 1e-10;
    double accept_tol = 1e-8;
    double stop_tol = 1e-12;
    int max_iterations = 100;
    int threads = 1;
    std::optional<ShootingUnknowns> initial;  // used by GuessMode::file and warm starts
    double verify_tol = 1e-12;     // tolerance for the invariant pass over [0, tau]
    int trajectory_samples = 0;    // > 0 keeps a sampled trajectory over [0, tau]
};

struct BrachSolution {
    RingConfig config;  // lax_scale = l0, transfer_time = tau
    LaxEigenvector a0;
    double l0 = 0.0;
    double tau = 1.0;
    double j0 = 0.0;
    double j0_tau = 0.0;
    double residual_norm = 0.0;  // ||r||_inf
    bool converged = false;
    int iterations = 0;
    int attempts = 1;
    double jacobian_condition = 0.0;
    std::string message;
    InvariantReport invariants;
    std::optional<Trajectory> trajectory;
};

// Seeded random guess with the required mirror symmetries, normalised.
ShootingUnknowns random_guess(int n_sites, std::uint64_t seed);

// Interpolates a converged envelope onto a ring of new_n sites (centre aligned,
// x padded with zeros, y with its edge values) and rescales L0 along the fit.
ShootingUnknowns warm_start_guess(const BrachSolution& prev, int new_n);

BrachSolution solve(int n_sites, const SolveOptions& opts = {});

// Fills j0, j0_tau, invariants and the optional trajectory from a0 and l0.
void finalize_solution(BrachSolution& sol, double verify_tol, int trajectory_samples);

struct SweepRow {
    int n_sites = 0;
    bool converged = false;
    double l0_tau = 0.0;
    double j0_tau = 0.0;
    double residual = 0.0;
};

// l0 tau ~ c0 + c1 N^c2
struct ScalingFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double se0 = 0.0, se1 = 0.0, se2 = 0.0;  // standard errors
    std::vector<double> relative_deviation;  // per fitted point, (fit - data) / data
    double rms_residual = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<BrachSolution> solutions;
    std::optional<ScalingFit> fit;  // absent with fewer than 4 converged points
};

struct SweepOptions {
    SolveOptions solve;
    bool warm_start = true;
};

SweepResult sweep(const std::vector<int>& n_list, const SweepOptions& opts = {});

// Nonlinear least-squares fit over converged rows. Empty with fewer than 4.
std::optional<ScalingFit> fit_scaling(const std::vector<SweepRow>& rows);

}  // namespace laxqsl
