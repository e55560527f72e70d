"""Numerical laboratory for Cao's U(n)-invariant steady Kähler-Ricci solitons on C^n."""

from .potential import (
    ConvergenceFailure,
    PhiGrid,
    PhiJet,
    SolitonParams,
    build_grid,
    cigar_closed_form,
    implicit_residual,
    phi_derivatives,
    poly_P,
    solve_phi,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceFailure",
    "PhiGrid",
    "PhiJet",
    "SolitonParams",
    "build_grid",
    "cigar_closed_form",
    "implicit_residual",
    "phi_derivatives",
    "poly_P",
    "solve_phi",
    "__version__",
]
