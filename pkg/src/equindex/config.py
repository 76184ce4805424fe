"""Global tolerance and discretisation defaults.

All tolerances are relative to the norm of the inputs unless stated
otherwise.  Every operation accepts an optional ``Tolerances`` override;
the module-level ``DEFAULT`` is used when none is given.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # linear algebra
    tol_rel: float = 1e-10          # generic relative residual (involutions, relations)
    tol_lag: float = 1e-9           # isotropy / principal-angle tolerance for frames
    tol_sympl: float = 1e-8         # symplecticity drift of integrated paths
    tol_null: float = 1e-8          # relative nullity window for eigenvalue counts

    # Maslov engine
    tol_cross: float = 1e-10        # bisection tolerance in t for crossing location
    cross_eig_tol: float = 1e-7     # |lambda - 1| below which a refined minimum is a crossing
    cross_ambiguous_tol: float = 1e-4   # between eig_tol and this -> perturbation fallback
    form_step: float = 3e-3         # finite-difference step (relative to interval length)
    form_disagree: float = 1e-6     # Richardson disagreement flagging a degenerate form
    max_bisect: int = 80

    # perturbation sweeps
    delta_min: float = 1e-6
    delta_max: float = 1e-3
    shift_min: float = 1e-8         # delta*I shifts for degenerate lambda-crossings
    shift_max: float = 1e-5

    # stability module
    tol_circ: float = 1e-8          # |abs(eigenvalue) - 1| unit-circle classification
    q_max: int = 64                 # denominator bound for rationality screening
    theta_probes: tuple[float, float] = (1e-3, 5e-4)
    tol_angle: float = 1e-9         # closeness to p/q in the rationality screen

    # three-body problem
    tol_grad: float = 1e-10
    dist_floor: float = 1e-3


DEFAULT = Tolerances()


def override(base: Tolerances | None = None, **kwargs) -> Tolerances:
    """Return a copy of ``base`` (or the defaults) with fields replaced."""
    return replace(base or DEFAULT, **kwargs)


def default_jobs() -> int:
    """Worker count for component sweeps; EQUI_INDEX_JOBS overrides."""
    raw = os.environ.get("EQUI_INDEX_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
