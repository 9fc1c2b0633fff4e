#include "laxqsl/verify.hpp"

#include "laxqsl/analysis.hpp"
#include "laxqsl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace laxqsl {

namespace {

constexpr double kReportOnly = std::numeric_limits<double>::infinity();

struct Context {
    const BrachSolution& sol;
    const VerifyOptions& opts;
    std::optional<Trajectory> period;   // [0, tau]
    std::optional<Trajectory> transit;  // [0, N tau]

    const Trajectory& over_period() {
        if (!period) {
            IntegrationOptions io;
            io.rtol = io.atol = opts.tol;
            io.samples = opts.samples_per_period;
            period = integrate(sol.a0, sol.tau, sol.config, io).trajectory;
        }
        return *period;
    }
    const Trajectory& over_transit() {
        if (!transit) {
            IntegrationOptions io;
            io.rtol = io.atol = opts.tol;
            io.samples = opts.samples_per_period * sol.config.n_sites;
            transit = integrate(sol.a0, sol.tau * sol.config.n_sites, sol.config, io).trajectory;
        }
        return *transit;
    }
};

void require_valid(const BrachSolution& sol) {
    if (!sol.a0.is_valid(1e-10))
        throw std::runtime_error("a0 violates the normalisation constraints; dynamics not evaluated");
}

void check_invariants(Context& c, CheckResult& r) {
    const auto& s = c.sol;
    r.measurements.push_back({"a0_norm_defect", s.a0.norm_defect(), 1e-10});
    r.measurements.push_back({"a0_orthogonality_defect", s.a0.orthogonality_defect(), 1e-10});
    require_valid(s);
    const VecR res = shooting_residual(extract_unknowns(s.a0, s.l0), s.config, c.opts.tol);
    r.measurements.push_back({"shooting_residual_inf", res.lpNorm<Eigen::Infinity>(), 1e-8});
    IntegrationOptions io;
    io.rtol = io.atol = c.opts.tol;
    io.samples = c.opts.samples_per_period;
    const auto run = integrate(s.a0, s.tau, s.config, io);
    r.measurements.push_back({"norm_drift", run.invariants.max_norm_drift, 1e-8});
    r.measurements.push_back({"orthogonality_drift", run.invariants.max_orthogonality_drift, 1e-8});
    r.measurements.push_back({"coupling_norm_drift", run.invariants.max_coupling_norm_drift, 1e-6});
    const double j0 = couplings_from_lax(s.a0, s.config).norm();
    r.measurements.push_back({"stored_j0_tau_mismatch", std::abs(j0 * s.tau - s.j0_tau), 1e-9});
}

void check_oracle(Context& c, CheckResult& r) {
    const auto& s = c.sol;
    require_valid(s);
    const double l0 = s.l0;
    const auto lstart = lax_matrix_from_eigenvector(s.a0, l0);
    r.measurements.push_back({"lax_real_part", lstart.l_matrix.entries.real().cwiseAbs().maxCoeff(), 1e-12});
    const auto jp = project_hamiltonian(lstart, s.config).j;
    const auto jr = couplings_from_lax(s.a0, s.config).j;
    r.measurements.push_back({"projection_vs_reconstruction", (jp - jr).lpNorm<Eigen::Infinity>(), 1e-10});
    r.measurements.push_back({"conjugate_pair_defect", conjugate_pair_defect(lstart), 1e-8});

    OracleOptions oo;
    oo.rtol = oo.atol = c.opts.tol;
    oo.samples = c.opts.oracle_samples;
    const auto evo = evolve_lax_matrix(lstart, s.tau, s.config, oo);
    IntegrationOptions io;
    io.rtol = io.atol = c.opts.tol;
    io.samples = c.opts.oracle_samples;
    const auto red = integrate(s.a0, s.tau, s.config, io).trajectory;

    const VecR ev0 = lax_spectrum(lstart);
    const MatC& lm0 = lstart.l_matrix.entries;
    const VecC psi0 = wavefunction_from_lax(s.a0, Gauge::q_transformed).amplitudes;
    double entry = 0.0, iso = 0.0, rank2 = 0.0, conj = 0.0, conjugation = 0.0, inside = 0.0, outside = 0.0;
    for (std::size_t k = 0; k < evo.states.size(); ++k) {
        const auto& lk = evo.states[k];
        const MatC lred = lax_matrix_from_eigenvector(red.states[k], l0).l_matrix.entries;
        entry = std::max(entry, (lk.l_matrix.entries - lred).cwiseAbs().maxCoeff());
        iso = std::max(iso, (lax_spectrum(lk) - ev0).cwiseAbs().maxCoeff() / l0);
        rank2 = std::max(rank2, rank2_defect(lk, l0) / l0);
        conj = std::max(conj, conjugate_pair_defect(lk));
        const MatC& u = evo.propagators[k].u_matrix;
        conjugation = std::max(conjugation, (u * lm0 * u.adjoint() - lk.l_matrix.entries).cwiseAbs().maxCoeff());
        WaveFunction psi{u * psi0, Gauge::q_transformed};
        const auto bc = check_bvp_conditions(lk, psi);
        inside = std::max(inside, bc.inside);
        outside = std::max(outside, bc.outside);
    }
    r.measurements.push_back({"matrix_vs_reduced_entrywise", entry, 1e-8});
    r.measurements.push_back({"isospectral_drift_over_l0", iso, 1e-8});
    r.measurements.push_back({"rank2_defect_over_l0", rank2, 1e-8});
    r.measurements.push_back({"conjugate_pair_defect_max", conj, 1e-8});
    r.measurements.push_back({"unitarity_defect", evo.max_unitarity_defect, 1e-8});
    r.measurements.push_back({"u_l0_udag_vs_l", conjugation, 1e-8});
    r.measurements.push_back({"bvp_inside_norm", inside, 1e-7});
    r.measurements.push_back({"bvp_outside_norm", outside, 1e-7});
}

void check_transfer(Context& c, CheckResult& r) {
    const auto& s = c.sol;
    require_valid(s);
    const auto& traj = c.over_period();
    CouplingSeries series;
    series.times = traj.times;
    for (const auto& a : traj.states) series.samples.push_back(couplings_from_lax(a, s.config));
    const auto psi0 = wavefunction_from_lax(s.a0, Gauge::q_transformed);
    PropagationOptions po;
    po.rtol = po.atol = c.opts.tol;
    const auto psi = schrodinger_propagate(psi0, series, s.config, po);

    const int n = s.config.n_sites;
    const VecR p0 = psi0.populations();
    const VecR pt = psi.back().populations();
    double shift = 0.0;
    for (int m = 0; m < n; ++m) shift = std::max(shift, std::abs(pt[m] - p0[(m + n - 1) % n]));
    double lax_match = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        const VecC ref = wavefunction_from_lax(traj.states[k], Gauge::q_transformed).amplitudes;
        const cplx ov = ref.dot(psi[k].amplitudes);
        const double phase = std::arg(ov);
        lax_match = std::max(lax_match, (psi[k].amplitudes - std::polar(1.0, phase) * ref).cwiseAbs().maxCoeff());
        norm = std::max(norm, std::abs(psi[k].norm_sq() - 1.0));
    }
    r.measurements.push_back({"population_shift_error", shift, 1e-6});
    r.measurements.push_back({"schrodinger_vs_lax_wavefunction", lax_match, 1e-6});
    r.measurements.push_back({"norm_defect", norm, 1e-9});
}

void check_spectrum(Context& c, CheckResult& r) {
    require_valid(c.sol);
    const auto samples = instantaneous_spectrum(c.over_period(), Gauge::q_transformed, c.opts.threads);
    const auto sum = summarize_spectrum(samples);
    r.measurements.push_back({"spectrum_asymmetry", sum.max_asymmetry, 1e-10});
    r.measurements.push_back({"overlap_norm_defect", sum.max_overlap_norm_defect, 1e-10});
    r.measurements.push_back({"max_dominant_overlap", sum.max_dominant_overlap, c.opts.dominance_threshold});
    if (c.sol.config.n_sites % 2 == 1) r.measurements.push_back({"zero_mode", sum.max_min_abs_eigenvalue, 1e-10});
    r.measurements.push_back({"eigenvalue_drift", sum.max_eigenvalue_drift, kReportOnly});
}

void check_phase(Context& c, CheckResult& r) {
    require_valid(c.sol);
    const auto& traj = c.over_transit();
    const auto ph = aa_phase(traj, std::numbers::pi);
    const double dev = std::abs(wrap_angle(ph.aa_phase - std::numbers::pi));
    r.measurements.push_back({"aa_phase_minus_pi", dev, 1e-3});
    r.measurements.push_back({"closure_defect", ph.closure_defect, 1e-5});
    r.measurements.push_back({"winding_mismatch", ph.winding_mismatch, 1e-3});
    r.measurements.push_back({"dynamical_integral", std::abs(ph.dynamical_integral), kReportOnly});
    const VecC e = expectation_energy(traj);
    r.measurements.push_back({"energy_imaginary_part", e.imag().cwiseAbs().maxCoeff(), 1e-12});
}

void check_profile(Context& c, CheckResult& r) {
    require_valid(c.sol);
    const auto pc = traveling_wave_check(c.over_transit());
    r.measurements.push_back({"profile_error", pc.max_error, 1e-5});
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"invariants", "oracle", "transfer", "spectrum", "phase", "profile"};
    return names;
}

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json ms = nlohmann::json::array();
        for (const auto& m : c.measurements)
            ms.push_back({{"name", m.name}, {"value", finite_or_null(m.value)},
                          {"threshold", finite_or_null(m.threshold)}, {"passed", m.passed()}});
        nlohmann::json cj{{"name", c.name}, {"passed", c.passed}, {"measurements", ms}};
        if (!c.note.empty()) cj["note"] = c.note;
        arr.push_back(cj);
    }
    return {{"passed", passed()}, {"checks", arr}};
}

VerifyReport verify_solution(const BrachSolution& sol, const std::vector<std::string>& checks,
                            const VerifyOptions& opts) {
    for (const auto& name : checks)
        if (std::find(check_names().begin(), check_names().end(), name) == check_names().end())
            throw std::invalid_argument("unknown check '" + name + "'");
    if (opts.samples_per_period < 2 || opts.oracle_samples < 1 || !(opts.tol > 0.0))
        throw std::invalid_argument("verify: invalid options");
    Context ctx{sol, opts, std::nullopt, std::nullopt};
    VerifyReport rep;
    for (const auto& name : check_names()) {
        if (std::find(checks.begin(), checks.end(), name) == checks.end()) continue;
        CheckResult r;
        r.name = name;
        try {
            if (name == "invariants") check_invariants(ctx, r);
            else if (name == "oracle") check_oracle(ctx, r);
            else if (name == "transfer") check_transfer(ctx, r);
            else if (name == "spectrum") check_spectrum(ctx, r);
            else if (name == "phase") check_phase(ctx, r);
            else check_profile(ctx, r);
            r.passed = std::all_of(r.measurements.begin(), r.measurements.end(),
                                   [](const Measurement& m) { return m.passed(); });
        } catch (const std::exception& e) {
            r.passed = false;
            r.note = e.what();
        }
        rep.checks.push_back(std::move(r));
    }
    return rep;
}

}  // namespace laxqsl
