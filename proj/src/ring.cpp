#include "laxqsl/ring.hpp"

#include <cmath>
#include <stdexcept>

namespace laxqsl {

namespace {

// i^k for integer k
cplx ipow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

}  // namespace

std::string to_string(Gauge g) {
    return g == Gauge::site ? "site" : "q_transformed";
}

std::string to_string(Boundary) {
    return "antiperiodic";
}

Gauge gauge_from_string(const std::string& s) {
    if (s == "site") return Gauge::site;
    if (s == "q_transformed" || s == "q") return Gauge::q_transformed;
    throw std::invalid_argument("unknown gauge: " + s);
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "antiperiodic") return Boundary::antiperiodic;
    throw std::invalid_argument("unsupported boundary condition: " + s);
}

void RingConfig::validate() const {
    if (n_sites < 3) {
        throw std::invalid_argument("ring needs at least 3 sites, got " + std::to_string(n_sites));
    }
    if (!(lax_scale > 0.0) || !std::isfinite(lax_scale)) {
        throw std::invalid_argument("lax_scale must be positive and finite");
    }
    if (!(transfer_time > 0.0) || !std::isfinite(transfer_time)) {
        throw std::invalid_argument("transfer_time must be positive and finite");
    }
}

RingConfig make_ring(int n_sites, double lax_scale, double transfer_time) {
    RingConfig c{n_sites, lax_scale, transfer_time, Boundary::antiperiodic};
    c.validate();
    return c;
}

LaxEigenvector::LaxEigenvector(VecR x_, VecR y_) : x(std::move(x_)), y(std::move(y_)) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("LaxEigenvector: x and y must have equal length");
    }
}

VecC LaxEigenvector::complex() const {
    VecC a(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) a[i] = {x[i], y[i]};
    return a;
}

LaxEigenvector LaxEigenvector::from_complex(const VecC& a) {
    return {a.real(), a.imag()};
}

double LaxEigenvector::norm_defect() const {
    return std::abs(x.squaredNorm() - 0.5) + std::abs(y.squaredNorm() - 0.5);
}

double LaxEigenvector::orthogonality_defect() const {
    return std::abs(x.dot(y));
}

bool LaxEigenvector::is_valid(double tol) const {
    return x.allFinite() && y.allFinite() && norm_defect() <= tol && orthogonality_defect() <= tol;
}

double HermitianMatrix::hermiticity_defect() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

Neighbor ring_neighbor(int m, int direction, const RingConfig& config) {
    const int n = config.n_sites;
    if (m < 1 || m > n) {
        throw std::out_of_range("site index " + std::to_string(m) + " outside 1.." + std::to_string(n));
    }
    if (direction != 1 && direction != -1) {
        throw std::invalid_argument("direction must be +1 or -1");
    }
    auto nb = detail::neighbor0(m - 1, direction, n);
    return {nb.site + 1, nb.sign};
}

VecC q_transform(const VecC& v, QDirection direction) {
    VecC out(v.size());
    const int s = direction == QDirection::forward ? 1 : -1;
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = ipow(s * static_cast<int>(i)) * v[i];
    return out;
}

WaveFunction wavefunction_from_lax(const LaxEigenvector& a, Gauge gauge, double norm_tol) {
    VecC psi = (std::sqrt(2.0) * a.x).cast<cplx>();
    const double defect = std::abs(psi.squaredNorm() - 1.0);
    if (defect > norm_tol) {
        throw std::domain_error("wave function norm off by " + std::to_string(defect));
    }
    if (gauge == Gauge::site) psi = q_transform(psi, QDirection::forward);
    return {std::move(psi), gauge};
}

CouplingProfile couplings_from_lax(const LaxEigenvector& a, const RingConfig& config) {
    const int n = a.size();
    if (n != config.n_sites) throw std::invalid_argument("couplings_from_lax: size mismatch with config");
    CouplingProfile out{VecR(n)};
    for (int m = 0; m < n; ++m) {
        const auto nb = detail::neighbor0(m, 1, n);
        const double xr = nb.sign * a.x[nb.site];
        const double yr = nb.sign * a.y[nb.site];
        out.j[m] = 2.0 * config.lax_scale * (xr * a.y[m] - a.x[m] * yr);
    }
    return out;
}

HermitianMatrix hamiltonian_matrix(const CouplingProfile& j, Gauge gauge, const RingConfig& config) {
    const int n = config.n_sites;
    if (j.j.size() != n) throw std::invalid_argument("hamiltonian_matrix: size mismatch with config");
    MatC h = MatC::Zero(n, n);
    const cplx iu{0.0, 1.0};
    for (int m = 0; m < n; ++m) {
        const auto nb = detail::neighbor0(m, 1, n);
        const cplx hop = iu * static_cast<double>(nb.sign) * j.j[m];
        h(m, nb.site) += hop;
        h(nb.site, m) += std::conj(hop);
    }
    if (gauge == Gauge::site) {
        // Q H^Q Q^dagger with Q = diag(i^{m-1})
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if (h(r, c) != cplx{}) h(r, c) *= ipow(r - c);
    }
    return {std::move(h)};
}

double partial_theta(double p, double q, double tol) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("partial_theta: q must lie in (0, 1)");
    if (!std::isfinite(p)) throw std::invalid_argument("partial_theta: p must be finite");
    // The terms are log-concave in m, so the first term below tol past m = 0
    // bounds the tail.
    const double log_q = std::log(q);
    double sum = 1.0;
    for (long m = 1; m < 1'000'000; ++m) {
        const double md = static_cast<double>(m);
        double term;
        if (p == 0.0) {
            term = 0.0;
        } else {
            const double mag = std::exp(md * std::log(std::abs(p)) + md * md * log_q);
            term = (p < 0.0 && (m % 2 == 1)) ? -mag : mag;
        }
        if (std::abs(term) < tol) return sum;
        sum += term;
    }
    throw std::runtime_error("partial_theta: series did not converge within 1e6 terms");
}

LaxEigenvector initial_guess_fit(const RingConfig& config) {
    config.validate();
    const int n = config.n_sites;
    if (n % 2 == 0) throw std::invalid_argument("initial_guess_fit requires odd N");
    const double centre = 0.5 * (n + 1);
    const double q = std::exp(-1.0);
    VecR x(n), y(n);
    for (int i = 0; i < n; ++i) {
        const double z = (i + 1) - centre;
        const double z2 = z * z, z4 = z2 * z2, z6 = z4 * z2, z8 = z4 * z4;
        x[i] = std::exp(-2.0 * partial_theta(z2, q));
        y[i] = std::tanh(0.8 * z) *
               (0.14853 + std::exp(-1.38 - 0.3 * z2 - 0.08 * z4 + 0.009 * z6 - 0.00028 * z8));
    }
    // exact mirror symmetry, then numerical normalization in place of A_N, B_N
    const VecR xs = 0.5 * (x + x.reverse());
    VecR ys = 0.5 * (y - y.reverse());
    ys[n / 2] = 0.0;
    return {xs * std::sqrt(0.5 / xs.squaredNorm()), ys * std::sqrt(0.5 / ys.squaredNorm())};
}

}  // namespace laxqsl
