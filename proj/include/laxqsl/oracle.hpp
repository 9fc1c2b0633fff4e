// oracle.hpp - full-matrix brachistochrone/Lax equations used to certify the
// reduced eigenvector dynamics.
//
// Nothing here calls the reduced equations of motion: the Lax operator is
// evolved by its commutator equation with the Hamiltonian re-read from the
// nearest-neighbour entries of L at every stage.
#pragma once

#include "laxqsl/dynamics.hpp"
#include "laxqsl/ring.hpp"

#include <cstdint>
#include <vector>

namespace laxqsl {

// Lax operator in the q gauge.
struct LaxMatrixState {
    HermitianMatrix l_matrix;
    double time = 0.0;
};

struct Propagator {
    MatC u_matrix;
    double time = 0.0;

    double unitarity_defect() const;  // max |U^dagger U - I|
};

// L = L0 (|a><a| - |a*><a*|)
LaxMatrixState lax_matrix_from_eigenvector(const LaxEigenvector& a, double l0, double time = 0.0);

// Ring mask of L: entries (m, m+1), (m+1, m) and the seam pair (1, N), (N, 1).
HermitianMatrix nearest_neighbor_part(const HermitianMatrix& l);

// J_m = s Im L_{m,n} for n the right neighbour of m with seam sign s.
CouplingProfile project_hamiltonian(const LaxMatrixState& l, const RingConfig& config);

struct OracleOptions {
    double rtol = 1e-12;
    double atol = 1e-12;
    int samples = 100;
};

struct LaxEvolution {
    std::vector<LaxMatrixState> states;
    std::vector<Propagator> propagators;
    double max_unitarity_defect = 0.0;
    bool unitarity_flag = false;  // defect above 1e-6
};

// Co-integrates dL/dt = i[L, H(L)] and i dU/dt = H U from U(0) = I.
LaxEvolution evolve_lax_matrix(const LaxMatrixState& l0, double t_end, const RingConfig& config,
                               const OracleOptions& opts = {});

struct BoundaryConditionNorms {
    double inside = 0.0;   // ||P L P||_F
    double outside = 0.0;  // ||(I - P) L (I - P)||_F
};

BoundaryConditionNorms check_bvp_conditions(const LaxMatrixState& l, const WaveFunction& psi);

// Eigenvalues (ascending) of L.
VecR lax_spectrum(const LaxMatrixState& l);

// max over the N - 2 smallest |eigenvalue| ; the two largest should be +-L0.
double rank2_defect(const LaxMatrixState& l, double l0);

// ||v_- - conj(v_+)|| after fixing each eigenvector's largest component to be
// real positive.
double conjugate_pair_defect(const LaxMatrixState& l);

struct CouplingSeries {
    VecR times;
    std::vector<CouplingProfile> samples;
};

struct PropagationOptions {
    double rtol = 1e-12;
    double atol = 1e-12;
};

// Integrates i dpsi/dt = H(t) psi with H assembled from cubic-spline
// interpolated couplings. Returns psi at every sample time of the series.
std::vector<WaveFunction> schrodinger_propagate(const WaveFunction& psi0, const CouplingSeries& couplings,
                                                const RingConfig& config, const PropagationOptions& opts = {});

// Clamped cubic spline through (t_k, v_k); end slopes from the cubic through
// the four nearest points.
class CubicSpline {
public:
    CubicSpline(VecR t, VecR v);
    double operator()(double tq) const;

private:
    VecR t_, v_, m_;  // m_: nodal first derivatives
};

// Basis of the subspace A: A_{m,m+p} = (i^{p-1} E_{m,m+p} + i^{1-p} E_{m+p,m}) / sqrt 2.
struct BasisElement {
    int m = 0;  // 1-based
    int p = 0;  // offset (0 for diagonal B elements)
    MatC matrix;
};
std::vector<BasisElement> a_basis(int n);
// Complement B: off-diagonal (i^p E_{m,m+p} + i^{-p} E_{m+p,m}) / sqrt 2 and the
// traceless diagonal elements.
std::vector<BasisElement> b_basis(int n);

// Frobenius norm of the component of c outside span(basis).
double leakage(const MatC& c, const std::vector<BasisElement>& basis);

struct ClosureReport {
    double aa_leakage = 0.0;       // i[A, A] outside A
    double ab_leakage = 0.0;       // i[A, B] outside B
    double chiral_defect = 0.0;    // max ||{A_{m,m+2p-1}, sigma}||_F
    double orthonormality_defect = 0.0;
};

ClosureReport subspace_closure_check(int n, int trials, std::uint64_t seed);

}  // namespace laxqsl
