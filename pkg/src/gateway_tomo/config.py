"""Numerical tolerance knobs.

One frozen dataclass threaded through gauge fixing, the recursion engine, and
the cycle solver, so experiments can tighten or loosen thresholds in one place.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used by reconstruction and its supporting numerics.

    Attributes
    ----------
    gap_factor:
        Eigenvalue pairs closer than ``gap_factor`` times the spectral range
        are treated as degenerate.
    overlap_tol:
        Eigenvector components at or below this magnitude count as zero when
        gauge fixing or chaining signs through a junction.
    coupling_tol:
        Residual norms at or below this value abort a recursion step instead
        of producing an unreliable coupling.
    norm_tol:
        Allowed deviation of per-site modulus-square sums from one for exact
        (noise-free) measurement records.
    slack_factor:
        Squared couplings from the cycle solve may be negative by this factor
        times the largest solved square before being flagged as inconsistent;
        smaller excursions are clamped to zero.
    condition_limit:
        Least-squares systems with condition number above this value raise
        instead of returning a solution.
    """

    gap_factor: float = 1e-9
    overlap_tol: float = 1e-9
    coupling_tol: float = 1e-9
    norm_tol: float = 1e-8
    slack_factor: float = 1e-10
    condition_limit: float = 1e10


DEFAULT_TOLERANCES = Tolerances()
