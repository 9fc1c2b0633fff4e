#include "laxqsl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <mutex>
#include <thread>

namespace laxqsl {

namespace {

bool uniform_grid(const VecR& t, double& dt) {
    const Eigen::Index n = t.size();
    if (n < 2) return false;
    dt = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) return false;
    for (Eigen::Index k = 1; k < n; ++k)
        if (std::abs((t[k] - t[k - 1]) - dt) > 1e-9 * dt) return false;
    return true;
}

// largest component real positive; near-ties resolved to the lowest index
VecC fix_phase(const VecC& v) {
    const double vmax = v.cwiseAbs().maxCoeff();
    if (vmax == 0.0) return v;
    Eigen::Index imax = 0;
    while (std::abs(v[imax]) < vmax * (1.0 - 1e-8)) ++imax;
    return v * (std::conj(v[imax]) / std::abs(v[imax]));
}

}  // namespace

SpeedLimit speed_limit(const Trajectory& traj) {
    if (traj.size() == 0) throw std::invalid_argument("speed_limit: empty trajectory");
    SpeedLimit s;
    s.coupling_norm_series.resize(static_cast<Eigen::Index>(traj.size()));
    for (std::size_t k = 0; k < traj.size(); ++k)
        s.coupling_norm_series[static_cast<Eigen::Index>(k)] = couplings_from_lax(traj.states[k], traj.config).norm();
    s.j0 = s.coupling_norm_series[0];
    s.j0_tau = s.j0 * traj.config.transfer_time;
    if (s.j0 > 0.0)
        s.relative_variation = (s.coupling_norm_series.maxCoeff() - s.coupling_norm_series.minCoeff()) / s.j0;
    return s;
}

SpeedLimit speed_limit(const BrachSolution& sol, int samples, double tol) {
    if (sol.trajectory) return speed_limit(*sol.trajectory);
    IntegrationOptions io;
    io.rtol = io.atol = tol;
    io.samples = samples;
    return speed_limit(integrate(sol.a0, sol.tau, sol.config, io).trajectory);
}

ProfileCheck traveling_wave_check(const Trajectory& traj) {
    const int n = traj.config.n_sites;
    const double tau = traj.config.transfer_time;
    double dt = 0.0;
    if (traj.size() < 3 || !uniform_grid(traj.times, dt))
        throw std::invalid_argument("traveling_wave_check: needs a uniform grid with at least three samples");
    const double kd = tau / dt;
    const auto kper = static_cast<long>(std::llround(kd));
    if (kper < 2 || std::abs(kd - static_cast<double>(kper)) > 1e-6)
        throw std::invalid_argument("traveling_wave_check: sample step must divide tau at least twice");
    if (std::abs(traj.times[0]) > 1e-12 * tau)
        throw std::invalid_argument("traveling_wave_check: trajectory must start at t = 0");
    const long last = static_cast<long>(traj.size()) - 1;
    if (last < kper) throw std::invalid_argument("traveling_wave_check: trajectory shorter than one period");

    const long ring = kper * n;  // samples per full transit
    ProfileCheck pc;
    pc.samples_per_period = static_cast<int>(kper);
    for (long k = 0; k <= last; ++k) {
        const auto& a = traj.states[static_cast<std::size_t>(k)];
        for (int m = 0; m < n; ++m) {
            // site index m is 0-based: the reference is site N at t + (N - 1 - m) tau
            long s = k + static_cast<long>(n - 1 - m) * kper;
            double sign = 1.0;
            while (s >= ring) {
                s -= ring;
                sign = -sign;
            }
            if (s > last || (s == k && m == n - 1)) continue;
            const auto& ref = traj.states[static_cast<std::size_t>(s)];
            pc.max_error_x = std::max(pc.max_error_x, std::abs(a.x[m] - sign * ref.x[n - 1]));
            pc.max_error_y = std::max(pc.max_error_y, std::abs(a.y[m] - sign * ref.y[n - 1]));
            ++pc.comparisons;
        }
    }
    pc.max_error = std::max(pc.max_error_x, pc.max_error_y);
    return pc;
}

std::vector<SpectrumSample> instantaneous_spectrum(const Trajectory& traj, Gauge gauge, int threads) {
    std::vector<SpectrumSample> out(traj.size());
    auto work = [&](std::size_t k) {
        const auto& a = traj.states[k];
        const auto h = hamiltonian_matrix(couplings_from_lax(a, traj.config), gauge, traj.config);
        const VecC psi = wavefunction_from_lax(a, gauge, 1e-6).amplitudes;
        Eigen::SelfAdjointEigenSolver<MatC> es(h.entries);
        SpectrumSample s;
        s.time = traj.times[static_cast<Eigen::Index>(k)];
        s.eigenvalues = es.eigenvalues();
        const Eigen::Index n = s.eigenvalues.size();
        s.overlap_coeffs.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const VecC v = fix_phase(es.eigenvectors().col(i));
            s.overlap_coeffs[i] = v.dot(psi);  // conjugates v
        }
        out[k] = std::move(s);
    };
    const int nt = std::clamp<int>(threads, 1, std::max<int>(1, static_cast<int>(traj.size())));
    if (nt == 1) {
        for (std::size_t k = 0; k < traj.size(); ++k) work(k);
        return out;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex mu;
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t k = static_cast<std::size_t>(t); k < traj.size(); k += static_cast<std::size_t>(nt)) {
                try {
                    work(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

SpectrumSummary summarize_spectrum(const std::vector<SpectrumSample>& samples) {
    SpectrumSummary s;
    if (samples.empty()) return s;
    const VecR& e0 = samples.front().eigenvalues;
    for (const auto& smp : samples) {
        const auto& e = smp.eigenvalues;
        const Eigen::Index n = e.size();
        for (Eigen::Index k = 0; k < n; ++k) {
            s.max_asymmetry = std::max(s.max_asymmetry, std::abs(e[k] + e[n - 1 - k]));
            s.max_eigenvalue_drift = std::max(s.max_eigenvalue_drift, std::abs(e[k] - e0[k]));
        }
        s.max_min_abs_eigenvalue = std::max(s.max_min_abs_eigenvalue, e.cwiseAbs().minCoeff());
        const VecR w = smp.overlap_coeffs.cwiseAbs2();
        s.max_overlap_norm_defect = std::max(s.max_overlap_norm_defect, std::abs(w.sum() - 1.0));
        s.max_dominant_overlap = std::max(s.max_dominant_overlap, w.maxCoeff());
    }
    return s;
}

double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    if (r > std::numbers::pi) r -= two_pi;
    return r;
}

double simpson(const VecR& times, const VecR& values) {
    if (times.size() != values.size()) throw std::invalid_argument("simpson: size mismatch");
    double h = 0.0;
    if (!uniform_grid(times, h)) throw std::invalid_argument("simpson: needs a uniform grid of at least two points");
    const Eigen::Index intervals = times.size() - 1;
    const auto& f = values;
    if (intervals == 1) return 0.5 * h * (f[0] + f[1]);
    double total = 0.0;
    Eigen::Index even = intervals;
    if (intervals % 2 == 1) {
        // 3/8 rule on the last three intervals
        even = intervals - 3;
        const Eigen::Index b = even;
        total += 3.0 * h / 8.0 * (f[b] + 3.0 * f[b + 1] + 3.0 * f[b + 2] + f[b + 3]);
    }
    if (even > 0) {
        double s = f[0] + f[even];
        for (Eigen::Index k = 1; k < even; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * f[k];
        total += h / 3.0 * s;
    }
    return total;
}

PhaseResult aa_phase(const VecR& times, const std::vector<VecC>& psi, const VecR& energies, double winding) {
    const auto n = static_cast<std::size_t>(times.size());
    if (psi.size() != n || static_cast<std::size_t>(energies.size()) != n)
        throw std::invalid_argument("aa_phase: times, states and energies must have equal length");
    if (n < 2) throw std::invalid_argument("aa_phase: need at least two samples");
    const VecC& p0 = psi.front();
    const VecC& pt = psi.back();
    PhaseResult r;
    const cplx ov = p0.dot(pt);
    const double two_pi = 2.0 * std::numbers::pi;
    double phi = std::arg(ov);
    phi += two_pi * std::round((winding - phi) / two_pi);
    r.winding_phase = phi;
    r.winding_mismatch = std::abs(phi - winding);
    r.closure_defect = (pt - std::polar(1.0, phi) * p0).norm();
    r.dynamical_integral = simpson(times, energies);
    r.aa_phase = wrap_angle(phi + r.dynamical_integral);
    return r;
}

VecC expectation_energy(const Trajectory& traj, Gauge gauge) {
    VecC e(static_cast<Eigen::Index>(traj.size()));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& a = traj.states[k];
        const auto h = hamiltonian_matrix(couplings_from_lax(a, traj.config), gauge, traj.config);
        const VecC psi = wavefunction_from_lax(a, gauge, 1e-6).amplitudes;
        e[static_cast<Eigen::Index>(k)] = psi.dot(h.entries * psi);
    }
    return e;
}

PhaseResult aa_phase(const Trajectory& traj, double winding) {
    std::vector<VecC> psi;
    psi.reserve(traj.size());
    for (const auto& a : traj.states) psi.push_back(wavefunction_from_lax(a, Gauge::q_transformed, 1e-6).amplitudes);
    const VecR energies = expectation_energy(traj, Gauge::q_transformed).real();
    return aa_phase(traj.times, psi, energies, winding);
}

}  // namespace laxqsl
