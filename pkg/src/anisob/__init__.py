"""Spectral lab for stratified flow with horizontal-only dissipation.

Subpackages cover the periodic-box spectral grid, anisotropic dyadic/Besov
analysis, the exact linear propagator and its output multipliers, a
pseudo-spectral nonlinear solver with a Duhamel-term ledger, direct quadrature
of the dispersive kernel, and a decay-rate measurement harness.
"""

from .grid import (
    BoxSpec,
    BoussinesqState,
    SpectralField,
    anisotropic_mixed_norm,
    forward_transform,
    inverse_transform,
    lp_norm,
)
from .linear import decay_rate_table, helmholtz3, helmholtz_h, propagate_linear, q_multiplier

__all__ = [
    "BoxSpec",
    "BoussinesqState",
    "SpectralField",
    "anisotropic_mixed_norm",
    "forward_transform",
    "inverse_transform",
    "lp_norm",
    "decay_rate_table",
    "helmholtz3",
    "helmholtz_h",
    "propagate_linear",
    "q_multiplier",
]
