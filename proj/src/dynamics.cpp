#include "laxqsl/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace laxqsl {

namespace {

void rhs_into(const double* x, const double* y, int n, double l0, double* dx, double* dy) {
    for (int m = 0; m < n; ++m) {
        const auto lft = detail::neighbor0(m, -1, n);
        const auto rgt = detail::neighbor0(m, 1, n);
        // seam signs enter squared in every term below
        const double xl = lft.sign * x[lft.site], yl = lft.sign * y[lft.site];
        const double xr = rgt.sign * x[rgt.site], yr = rgt.sign * y[rgt.site];
        const double cross = xl * yl + xr * yr;
        dx[m] = 2.0 * l0 * ((xl * xl + xr * xr) * y[m] - cross * x[m]);
        dy[m] = 2.0 * l0 * (-(yl * yl + yr * yr) * x[m] + cross * y[m]);
    }
}

}  // namespace

VecR pack(const LaxEigenvector& a) {
    VecR s(2 * a.size());
    s << a.x, a.y;
    return s;
}

LaxEigenvector unpack(const VecR& s) {
    const Eigen::Index n = s.size() / 2;
    return {s.head(n), s.tail(n)};
}

VecR rhs(const LaxEigenvector& a, const RingConfig& config) {
    const int n = a.size();
    if (n != config.n_sites) throw std::invalid_argument("rhs: size mismatch with config");
    VecR out(2 * n);
    rhs_into(a.x.data(), a.y.data(), n, config.lax_scale, out.data(), out.data() + n);
    return out;
}

VecR rhs_via_hamiltonian(const LaxEigenvector& a, const RingConfig& config) {
    const auto h = hamiltonian_matrix(couplings_from_lax(a, config), Gauge::q_transformed, config);
    const VecC da = cplx{0.0, -1.0} * (h.entries * a.complex());
    VecR out(2 * a.size());
    out << da.real(), da.imag();
    return out;
}

void project_to_constraints(LaxEigenvector& a) {
    // Lowdin orthogonalisation of the pair (x, y) followed by rescaling.
    const double xx = a.x.squaredNorm(), yy = a.y.squaredNorm(), xy = a.x.dot(a.y);
    Eigen::Matrix2d gram;
    gram << xx, xy, xy, yy;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(gram);
    const Eigen::Matrix2d inv_sqrt =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    const double s = std::sqrt(0.5);
    VecR nx = s * (inv_sqrt(0, 0) * a.x + inv_sqrt(1, 0) * a.y);
    VecR ny = s * (inv_sqrt(0, 1) * a.x + inv_sqrt(1, 1) * a.y);
    a.x = std::move(nx);
    a.y = std::move(ny);
}

IntegrationResult integrate(const LaxEigenvector& a0, double t_end, const RingConfig& config,
                            const IntegrationOptions& opts) {
    config.validate();
    const int n = config.n_sites;
    if (a0.size() != n) throw std::invalid_argument("integrate: size mismatch with config");
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");
    if (opts.samples < 1) throw std::invalid_argument("integrate: need at least one sample interval");
    if (!a0.is_valid(1e-10)) throw std::invalid_argument("integrate: initial eigenvector violates constraints");

    const double l0 = config.lax_scale;
    ode::RhsFn f = [n, l0](double, const ode::State& s, ode::State& ds) {
        rhs_into(s.data(), s.data() + n, n, l0, ds.data(), ds.data() + n);
    };

    IntegrationResult res;
    auto& traj = res.trajectory;
    traj.config = config;
    traj.times.resize(opts.samples + 1);
    for (int k = 0; k <= opts.samples; ++k) traj.times[k] = t_end * static_cast<double>(k) / opts.samples;
    traj.times[opts.samples] = t_end;
    traj.states.resize(opts.samples + 1);

    const double j2_0 = couplings_from_lax(a0, config).norm_sq();
    auto& inv = res.invariants;
    auto monitor = [&](const LaxEigenvector& a) {
        inv.max_norm_drift = std::max(inv.max_norm_drift, a.norm_defect());
        inv.max_orthogonality_drift = std::max(inv.max_orthogonality_drift, a.orthogonality_defect());
        const double j2 = couplings_from_lax(a, config).norm_sq();
        const double drift = j2_0 > 0.0 ? std::abs(j2 - j2_0) / j2_0 : std::abs(j2);
        inv.max_coupling_norm_drift = std::max(inv.max_coupling_norm_drift, drift);
    };

    ode::SampleFn on_sample = [&](std::size_t k, double, const ode::State& s) {
        traj.states[k] = unpack(s);
        monitor(traj.states[k]);
    };
    ode::StepFn on_step = nullptr;
    if (opts.project) {
        on_step = [&](double, ode::State& s) {
            auto a = unpack(s);
            project_to_constraints(a);
            s = pack(a);
        };
    }

    ode::State y = pack(a0);
    ode::Options o;
    o.rtol = opts.rtol;
    o.atol = opts.atol;
    res.stats = ode::dopri5(f, y, 0.0, t_end, std::span<const double>(traj.times.data(), traj.times.size()),
                            on_sample, on_step, o);
    const double tol = std::max(opts.rtol, opts.atol);
    inv.drift_flag = inv.max_norm_drift > 1e3 * tol || inv.max_orthogonality_drift > 1e3 * tol ||
                     inv.max_coupling_norm_drift > 1e3 * tol;
    return res;
}

LaxEigenvector propagate(const LaxEigenvector& a0, double t_end, const RingConfig& config, double rtol,
                         double atol) {
    const int n = config.n_sites;
    if (a0.size() != n) throw std::invalid_argument("propagate: size mismatch with config");
    const double l0 = config.lax_scale;
    ode::RhsFn f = [n, l0](double, const ode::State& s, ode::State& ds) {
        rhs_into(s.data(), s.data() + n, n, l0, ds.data(), ds.data() + n);
    };
    ode::State y = pack(a0);
    ode::Options o;
    o.rtol = rtol;
    o.atol = atol;
    ode::dopri5(f, y, 0.0, t_end, o);
    return unpack(y);
}

}  // namespace laxqsl
