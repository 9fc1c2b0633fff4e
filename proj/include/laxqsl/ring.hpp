// ring.hpp - domain types and reconstruction formulas for the qubit ring
//
// Sites are numbered 1..N in the public formulas and stored 0-based.
// The ring is closed with an antiperiodic seam: a_{N+1} = -a_1 and the left
// neighbour of site 1 is -a_N.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>

namespace laxqsl {

using cplx = std::complex<double>;
using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;

enum class Boundary { antiperiodic };

// site: physical qubit basis. q_transformed: basis rotated by Q = diag(i^{m-1}),
// where the Lax operator and Hamiltonian are purely imaginary.
enum class Gauge { site, q_transformed };

enum class QDirection { forward, inverse };

std::string to_string(Gauge g);
std::string to_string(Boundary b);
Gauge gauge_from_string(const std::string& s);
Boundary boundary_from_string(const std::string& s);

struct RingConfig {
    int n_sites = 15;
    double lax_scale = 1.0;      // L0
    double transfer_time = 1.0;  // tau
    Boundary boundary = Boundary::antiperiodic;

    // Throws std::invalid_argument when N < 3 or L0, tau are not positive.
    void validate() const;
};

RingConfig make_ring(int n_sites, double lax_scale = 1.0, double transfer_time = 1.0);

// a = x + i y. A valid eigenvector has <x|x> = <y|y> = 1/2 and <x|y> = 0.
struct LaxEigenvector {
    VecR x;
    VecR y;

    LaxEigenvector() = default;
    LaxEigenvector(VecR x_, VecR y_);

    int size() const { return static_cast<int>(x.size()); }
    VecC complex() const;
    static LaxEigenvector from_complex(const VecC& a);

    double norm_defect() const;           // |<x|x> - 1/2| + |<y|y> - 1/2|
    double orthogonality_defect() const;  // |<x|y>|
    bool is_valid(double tol) const;
};

// Entry m (0-based) is J_{m+1,m+2}; the last entry is the seam link J_{N,1}.
struct CouplingProfile {
    VecR j;

    double norm_sq() const { return j.squaredNorm(); }
    double norm() const { return j.norm(); }
};

struct WaveFunction {
    VecC amplitudes;
    Gauge gauge = Gauge::q_transformed;

    double norm_sq() const { return amplitudes.squaredNorm(); }
    VecR populations() const { return amplitudes.cwiseAbs2(); }
};

struct HermitianMatrix {
    MatC entries;

    int size() const { return static_cast<int>(entries.rows()); }
    double hermiticity_defect() const;  // max |H_mn - conj(H_nm)|
    cplx trace() const { return entries.trace(); }
};

struct Neighbor {
    int site;  // 1-based
    int sign;  // -1 when the link crosses the antiperiodic seam
};

// Neighbour of 1-based site m in direction +1 or -1.
Neighbor ring_neighbor(int m, int direction, const RingConfig& config);

namespace detail {
// 0-based variant used in the inner loops. Assumes valid arguments.
inline Neighbor neighbor0(int i, int direction, int n) {
    int j = i + direction;
    if (j == n) return {0, -1};
    if (j == -1) return {n - 1, -1};
    return {j, 1};
}
}  // namespace detail

// Multiplies component m by i^{m-1} (forward) or i^{1-m} (inverse).
VecC q_transform(const VecC& v, QDirection direction);

// psi^Q = sqrt(2) x. The site gauge is reached with the forward Q transform.
// Throws std::domain_error if |<psi|psi> - 1| exceeds norm_tol.
WaveFunction wavefunction_from_lax(const LaxEigenvector& a, Gauge gauge, double norm_tol = 1e-8);

// J_{m,m+1} = 2 L0 (x_{m+1} y_m - x_m y_{m+1}), seam amplitudes sign-flipped.
CouplingProfile couplings_from_lax(const LaxEigenvector& a, const RingConfig& config);

// q gauge: H_{m,n} = i s J_m for n = m+1 with seam sign s, Hermitian partner below.
// site gauge: Q H^Q Q^dagger, i.e. real J on interior links. The seam link keeps
// the phase -i^N picked up by the twisted boundary, so both gauges are unitarily
// equivalent.
HermitianMatrix hamiltonian_matrix(const CouplingProfile& j, Gauge gauge, const RingConfig& config);

// Sum_{m>=0} p^m q^{m^2}, truncated once the next term is below tol in magnitude.
double partial_theta(double p, double q, double tol = 1e-16);

// Analytical soliton envelope evaluated at zeta = m - (N+1)/2, projected onto
// exact mirror symmetry and renormalized. Requires odd N.
LaxEigenvector initial_guess_fit(const RingConfig& config);

}  // namespace laxqsl
