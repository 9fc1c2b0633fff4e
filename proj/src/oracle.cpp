#include "laxqsl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace laxqsl {

namespace {

const cplx I{0.0, 1.0};

cplx ipow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// Re/Im of an n x n block, column major.
void store(const MatC& m, double* dst) {
    const Eigen::Index nn = m.size();
    for (Eigen::Index k = 0; k < nn; ++k) {
        dst[k] = m.data()[k].real();
        dst[nn + k] = m.data()[k].imag();
    }
}

MatC load(const double* src, int n) {
    MatC m(n, n);
    const Eigen::Index nn = m.size();
    for (Eigen::Index k = 0; k < nn; ++k) m.data()[k] = {src[k], src[nn + k]};
    return m;
}

MatC ring_mask(const MatC& l) {
    const int n = static_cast<int>(l.rows());
    MatC h = MatC::Zero(n, n);
    for (int m = 0; m < n; ++m) {
        const int r = detail::neighbor0(m, 1, n).site;
        h(m, r) = l(m, r);
        h(r, m) = l(r, m);
    }
    return h;
}

// Rotates v so that its largest-magnitude component is real and positive.
// Near-ties (mirror-symmetric states) go to the lowest index so that v and
// conj(v) pick the same reference site.
VecC fix_phase(const VecC& v) {
    const double vmax = v.cwiseAbs().maxCoeff();
    if (vmax == 0.0) return v;
    Eigen::Index imax = 0;
    while (std::abs(v[imax]) < vmax * (1.0 - 1e-8)) ++imax;
    return v * (std::conj(v[imax]) / std::abs(v[imax]));
}

}  // namespace

double Propagator::unitarity_defect() const {
    const MatC d = u_matrix.adjoint() * u_matrix - MatC::Identity(u_matrix.rows(), u_matrix.cols());
    return d.cwiseAbs().maxCoeff();
}

LaxMatrixState lax_matrix_from_eigenvector(const LaxEigenvector& a, double l0, double time) {
    const VecC v = a.complex();
    const VecC vc = v.conjugate();
    LaxMatrixState s;
    s.l_matrix.entries = l0 * (v * v.adjoint() - vc * vc.adjoint());
    s.time = time;
    return s;
}

HermitianMatrix nearest_neighbor_part(const HermitianMatrix& l) { return {ring_mask(l.entries)}; }

CouplingProfile project_hamiltonian(const LaxMatrixState& l, const RingConfig& config) {
    const int n = config.n_sites;
    if (l.l_matrix.size() != n) throw std::invalid_argument("project_hamiltonian: size mismatch with config");
    CouplingProfile j;
    j.j.resize(n);
    for (int m = 0; m < n; ++m) {
        const auto r = detail::neighbor0(m, 1, n);
        j.j[m] = r.sign * l.l_matrix.entries(m, r.site).imag();
    }
    return j;
}

LaxEvolution evolve_lax_matrix(const LaxMatrixState& l0, double t_end, const RingConfig& config,
                               const OracleOptions& opts) {
    config.validate();
    const int n = config.n_sites;
    if (l0.l_matrix.size() != n) throw std::invalid_argument("evolve_lax_matrix: size mismatch with config");
    if (!(t_end > 0.0)) throw std::invalid_argument("evolve_lax_matrix: T must be positive");
    if (opts.samples < 1) throw std::invalid_argument("evolve_lax_matrix: samples must be >= 1");

    const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
    ode::State y(4 * nn);
    store(l0.l_matrix.entries, y.data());
    store(MatC::Identity(n, n), y.data() + 2 * nn);

    const ode::RhsFn f = [n, nn](double, const ode::State& s, ode::State& ds) {
        const MatC l = load(s.data(), n);
        const MatC u = load(s.data() + 2 * nn, n);
        const MatC h = ring_mask(l);
        store(I * (l * h - h * l), ds.data());
        store(-I * (h * u), ds.data() + 2 * nn);
    };

    std::vector<double> times(opts.samples + 1);
    for (int k = 0; k <= opts.samples; ++k) times[k] = l0.time + t_end * k / opts.samples;
    times.back() = l0.time + t_end;

    LaxEvolution out;
    out.states.reserve(times.size());
    out.propagators.reserve(times.size());
    const ode::SampleFn sample = [&](std::size_t, double t, const ode::State& s) {
        LaxMatrixState ls;
        ls.l_matrix.entries = load(s.data(), n);
        ls.time = t;
        Propagator p;
        p.u_matrix = load(s.data() + 2 * nn, n);
        p.time = t;
        out.max_unitarity_defect = std::max(out.max_unitarity_defect, p.unitarity_defect());
        out.states.push_back(std::move(ls));
        out.propagators.push_back(std::move(p));
    };
    ode::Options o;
    o.rtol = opts.rtol;
    o.atol = opts.atol;
    ode::dopri5(f, y, l0.time, l0.time + t_end, std::span<const double>(times), sample, nullptr, o);
    out.unitarity_flag = out.max_unitarity_defect > 1e-6;
    return out;
}

BoundaryConditionNorms check_bvp_conditions(const LaxMatrixState& l, const WaveFunction& psi) {
    const int n = l.l_matrix.size();
    if (psi.amplitudes.size() != n) throw std::invalid_argument("check_bvp_conditions: size mismatch");
    const MatC p = psi.amplitudes * psi.amplitudes.adjoint();
    const MatC q = MatC::Identity(n, n) - p;
    const MatC& lm = l.l_matrix.entries;
    return {(p * lm * p).norm(), (q * lm * q).norm()};
}

VecR lax_spectrum(const LaxMatrixState& l) {
    Eigen::SelfAdjointEigenSolver<MatC> es(l.l_matrix.entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double rank2_defect(const LaxMatrixState& l, double l0) {
    const VecR ev = lax_spectrum(l);
    const Eigen::Index n = ev.size();
    if (n < 2) throw std::invalid_argument("rank2_defect: need at least a 2x2 matrix");
    double d = std::max(std::abs(ev[n - 1] - l0), std::abs(ev[0] + l0));
    for (Eigen::Index k = 1; k + 1 < n; ++k) d = std::max(d, std::abs(ev[k]));
    return d;
}

double conjugate_pair_defect(const LaxMatrixState& l) {
    Eigen::SelfAdjointEigenSolver<MatC> es(l.l_matrix.entries);
    const Eigen::Index n = es.eigenvalues().size();
    const VecC vminus = fix_phase(es.eigenvectors().col(0));
    const VecC vplus = fix_phase(es.eigenvectors().col(n - 1));
    return (vminus - fix_phase(vplus.conjugate())).norm();
}

CubicSpline::CubicSpline(VecR t, VecR v) : t_(std::move(t)), v_(std::move(v)) {
    const Eigen::Index n = t_.size();
    if (n != v_.size()) throw std::invalid_argument("CubicSpline: size mismatch");
    if (n < 2) throw std::invalid_argument("CubicSpline: need at least two nodes");
    for (Eigen::Index k = 1; k < n; ++k)
        if (!(t_[k] > t_[k - 1])) throw std::invalid_argument("CubicSpline: nodes must increase");

    // derivative at node `at` of the interpolating polynomial through nodes [lo, lo+cnt)
    auto lagrange_slope = [&](Eigen::Index lo, Eigen::Index cnt, Eigen::Index at) {
        double s = 0.0;
        for (Eigen::Index j = lo; j < lo + cnt; ++j) {
            double w;
            if (j == at) {
                w = 0.0;
                for (Eigen::Index k = lo; k < lo + cnt; ++k)
                    if (k != j) w += 1.0 / (t_[at] - t_[k]);
            } else {
                double num = 1.0, den = 1.0;
                for (Eigen::Index k = lo; k < lo + cnt; ++k) {
                    if (k == j) continue;
                    den *= t_[j] - t_[k];
                    if (k != at) num *= t_[at] - t_[k];
                }
                w = num / den;
            }
            s += w * v_[j];
        }
        return s;
    };
    const Eigen::Index cnt = std::min<Eigen::Index>(4, n);
    m_.resize(n);
    m_[0] = lagrange_slope(0, cnt, 0);
    m_[n - 1] = lagrange_slope(n - cnt, cnt, n - 1);
    if (n == 2) return;

    // C2 continuity at interior nodes, tridiagonal in the slopes
    const Eigen::Index ni = n - 2;
    VecR sub(ni), dia(ni), sup(ni), rhs(ni);
    for (Eigen::Index i = 1; i <= ni; ++i) {
        const double h0 = t_[i] - t_[i - 1], h1 = t_[i + 1] - t_[i];
        const double d0 = (v_[i] - v_[i - 1]) / h0, d1 = (v_[i + 1] - v_[i]) / h1;
        sub[i - 1] = h1;
        dia[i - 1] = 2.0 * (h0 + h1);
        sup[i - 1] = h0;
        rhs[i - 1] = 3.0 * (h1 * d0 + h0 * d1);
    }
    rhs[0] -= sub[0] * m_[0];
    rhs[ni - 1] -= sup[ni - 1] * m_[n - 1];
    for (Eigen::Index i = 1; i < ni; ++i) {
        const double w = sub[i] / dia[i - 1];
        dia[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m_[ni] = rhs[ni - 1] / dia[ni - 1];
    for (Eigen::Index i = ni - 2; i >= 0; --i) m_[i + 1] = (rhs[i] - sup[i] * m_[i + 2]) / dia[i];
}

double CubicSpline::operator()(double tq) const {
    const Eigen::Index n = t_.size();
    const double* begin = t_.data();
    Eigen::Index k = std::upper_bound(begin, begin + n, tq) - begin - 1;
    k = std::clamp<Eigen::Index>(k, 0, n - 2);
    const double h = t_[k + 1] - t_[k];
    const double s = (tq - t_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * v_[k] + h10 * h * m_[k] + h01 * v_[k + 1] + h11 * h * m_[k + 1];
}

std::vector<WaveFunction> schrodinger_propagate(const WaveFunction& psi0, const CouplingSeries& couplings,
                                                const RingConfig& config, const PropagationOptions& opts) {
    const int n = config.n_sites;
    const auto ns = static_cast<std::size_t>(couplings.times.size());
    if (ns != couplings.samples.size()) throw std::invalid_argument("schrodinger_propagate: series size mismatch");
    if (ns < 2) throw std::invalid_argument("schrodinger_propagate: need at least two coupling samples");
    if (psi0.amplitudes.size() != n) throw std::invalid_argument("schrodinger_propagate: size mismatch");

    std::vector<CubicSpline> links;
    links.reserve(n);
    for (int m = 0; m < n; ++m) {
        VecR v(ns);
        for (std::size_t k = 0; k < ns; ++k) {
            if (couplings.samples[k].j.size() != n)
                throw std::invalid_argument("schrodinger_propagate: coupling size mismatch");
            v[static_cast<Eigen::Index>(k)] = couplings.samples[k].j[m];
        }
        links.emplace_back(couplings.times, std::move(v));
    }

    const Gauge gauge = psi0.gauge;
    const ode::RhsFn f = [&](double t, const ode::State& s, ode::State& ds) {
        CouplingProfile j;
        j.j.resize(n);
        for (int m = 0; m < n; ++m) j.j[m] = links[m](t);
        const MatC h = hamiltonian_matrix(j, gauge, config).entries;
        VecC psi(n);
        for (int m = 0; m < n; ++m) psi[m] = {s[m], s[n + m]};
        const VecC dpsi = -I * (h * psi);
        ds.head(n) = dpsi.real();
        ds.tail(n) = dpsi.imag();
    };

    ode::State y(2 * n);
    y.head(n) = psi0.amplitudes.real();
    y.tail(n) = psi0.amplitudes.imag();
    std::vector<WaveFunction> out;
    out.reserve(ns);
    const ode::SampleFn sample = [&](std::size_t, double, const ode::State& s) {
        WaveFunction w;
        w.gauge = gauge;
        w.amplitudes.resize(n);
        for (int m = 0; m < n; ++m) w.amplitudes[m] = {s[m], s[n + m]};
        out.push_back(std::move(w));
    };
    ode::Options o;
    o.rtol = opts.rtol;
    o.atol = opts.atol;
    const std::span<const double> times(couplings.times.data(), ns);
    ode::dopri5(f, y, times.front(), times.back(), times, sample, nullptr, o);
    return out;
}

std::vector<BasisElement> a_basis(int n) {
    if (n < 2) throw std::invalid_argument("a_basis: n must be >= 2");
    std::vector<BasisElement> out;
    const double r = 1.0 / std::sqrt(2.0);
    for (int p = 1; p < n; ++p) {
        for (int m = 1; m + p <= n; ++m) {
            MatC e = MatC::Zero(n, n);
            e(m - 1, m + p - 1) = r * ipow(p - 1);
            e(m + p - 1, m - 1) = r * ipow(1 - p);
            out.push_back({m, p, std::move(e)});
        }
    }
    return out;
}

std::vector<BasisElement> b_basis(int n) {
    if (n < 2) throw std::invalid_argument("b_basis: n must be >= 2");
    std::vector<BasisElement> out;
    const double r = 1.0 / std::sqrt(2.0);
    for (int p = 1; p < n; ++p) {
        for (int m = 1; m + p <= n; ++m) {
            MatC e = MatC::Zero(n, n);
            e(m - 1, m + p - 1) = r * ipow(p);
            e(m + p - 1, m - 1) = r * ipow(-p);
            out.push_back({m, p, std::move(e)});
        }
    }
    for (int m = 1; m < n; ++m) {
        MatC e = MatC::Zero(n, n);
        const double s = 1.0 / std::sqrt(static_cast<double>(m) * (m + 1));
        for (int k = 0; k < m; ++k) e(k, k) = s;
        e(m, m) = -m * s;
        out.push_back({m, 0, std::move(e)});
    }
    return out;
}

double leakage(const MatC& c, const std::vector<BasisElement>& basis) {
    MatC rem = c;
    for (const auto& b : basis) {
        const cplx coef = (b.matrix.adjoint() * c).trace();
        rem -= coef * b.matrix;
    }
    return rem.norm();
}

ClosureReport subspace_closure_check(int n, int trials, std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("subspace_closure_check: n must be >= 3");
    if (trials < 1) throw std::invalid_argument("subspace_closure_check: trials must be >= 1");
    const auto a = a_basis(n);
    const auto b = b_basis(n);
    ClosureReport rep;

    std::vector<const BasisElement*> all;
    for (const auto& e : a) all.push_back(&e);
    for (const auto& e : b) all.push_back(&e);
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t k = i; k < all.size(); ++k) {
            const cplx g = (all[i]->matrix.adjoint() * all[k]->matrix).trace();
            const double target = i == k ? 1.0 : 0.0;
            rep.orthonormality_defect = std::max(rep.orthonormality_defect, std::abs(g - target));
        }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto combo = [&](const std::vector<BasisElement>& basis) {
        MatC c = MatC::Zero(n, n);
        for (const auto& e : basis) c += gauss(rng) * e.matrix;
        return c;
    };
    for (int t = 0; t < trials; ++t) {
        const MatC a1 = combo(a), a2 = combo(a), b1 = combo(b);
        rep.aa_leakage = std::max(rep.aa_leakage, leakage(I * (a1 * a2 - a2 * a1), a) / (a1.norm() * a2.norm()));
        rep.ab_leakage = std::max(rep.ab_leakage, leakage(I * (a1 * b1 - b1 * a1), b) / (a1.norm() * b1.norm()));
    }

    VecC sigma(n);
    for (int m = 0; m < n; ++m) sigma[m] = (m % 2 == 0) ? 1.0 : -1.0;
    const MatC s = sigma.asDiagonal();
    for (const auto& e : a) {
        if (e.p % 2 == 0) continue;
        rep.chiral_defect = std::max(rep.chiral_defect, (e.matrix * s + s * e.matrix).norm());
    }
    return rep;
}

}  // namespace laxqsl
