"""Time-optimal excitation transfer on an antiperiodic qubit ring."""

import json as _json

from ._laxqsl import (
    BrachSolution,
    DocumentError,
    InvariantReport,
    LaxEigenvector,
    RingConfig,
    __version__,
    aa_phase,
    couplings_from_lax,
    hamiltonian_matrix,
    initial_guess_fit,
    integrate,
    load_solution,
    partial_theta,
    rhs,
    rhs_via_hamiltonian,
    ring_neighbor,
    save_solution,
    solve,
    subspace_closure_check,
    sweep,
    wavefunction_from_lax,
)
from ._laxqsl import verify as _verify


def verify(solution, checks=(), tol=1e-12):
    """Run verification checks; returns the report as a dict."""
    return _json.loads(_verify(solution, list(checks), tol))


__all__ = [
    "BrachSolution",
    "DocumentError",
    "InvariantReport",
    "LaxEigenvector",
    "RingConfig",
    "__version__",
    "aa_phase",
    "couplings_from_lax",
    "hamiltonian_matrix",
    "initial_guess_fit",
    "integrate",
    "load_solution",
    "partial_theta",
    "rhs",
    "rhs_via_hamiltonian",
    "ring_neighbor",
    "save_solution",
    "solve",
    "subspace_closure_check",
    "sweep",
    "verify",
    "wavefunction_from_lax",
]
