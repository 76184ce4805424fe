"""Linear Hamiltonian systems: fundamental solutions and index computations.

The geometric index of a boundary-value problem is the Maslov index of
the graph path t -> Gr(gamma(t)) against the boundary Lagrangian in the
product space with (-omega (+) omega); the spectral index is minus the
spectral flow of the Galerkin family lambda -> -J d/dt - lambda B on the
constrained domain.  Both are computed by entirely separate machinery and
agree on regular problems, which the test suites exercise heavily.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DriftExceeded, LegendreViolation, SymmetryViolated
from .dihedral import DihedralRep, component_boundary_data
from .galerkin import ProductBoundary, first_order_family, subspace_pair
from .linalg import (
    SymplecticStructure,
    graph_lagrangian,
    spectral_projectors,
    standard_J,
    symplectic_residual,
)
from .maslov import LagrangianPath, maslov_clm
from .spectral_flow import spectral_flow

__all__ = ["LinearHamiltonianSystem", "SymplecticPath", "SturmSystem",
           "fundamental_solution", "legendre_reduce", "monodromy",
           "geometric_index", "spectral_index", "iota_L", "boundary_frame",
           "bott_hamiltonian", "equivariant_hamiltonian_system"]


@dataclass
class LinearHamiltonianSystem:
    """z' = J B(t) z with symmetric B(t) on [0, T]."""

    B: Callable[[float], np.ndarray]
    T: float
    m: int
    rep: DihedralRep | None = None

    def coefficient(self, t: float) -> np.ndarray:
        Bt = np.asarray(self.B(float(t)), dtype=float if self.rep is None else float)
        return Bt

    def check_symmetry(self, tol: Tolerances = DEFAULT) -> None:
        """Verify the equivariance relations of B against the attached rep."""
        if self.rep is None:
            return
        rep = self.rep
        M, N = rep.M, rep.N
        ts = np.linspace(0, self.T, 13)
        scale = max(np.linalg.norm(self.coefficient(t)) for t in ts) + 1.0
        for t in ts:
            r1 = np.linalg.norm(M @ self.B(t + rep.T / rep.n) - self.B(t) @ M)
            r2 = np.linalg.norm(N @ self.B(rep.T / rep.n - t) - self.B(t) @ N)
            if max(r1, r2) > 1e3 * DEFAULT.tol_rel * scale:
                raise SymmetryViolated(
                    f"B equivariance residual {max(r1, r2):.2e} at t={t:.4f}")


@dataclass
class SymplecticPath:
    """Grid samples of a fundamental solution, with one-step re-integration."""

    ts: np.ndarray
    gammas: np.ndarray          # (K+1, 2m, 2m)
    B: Callable[[float], np.ndarray]
    drift: float = 0.0

    @property
    def T(self) -> float:
        return float(self.ts[-1])

    @property
    def m(self) -> int:
        return self.gammas.shape[1] // 2

    def monodromy(self) -> np.ndarray:
        return self.gammas[-1]

    def at(self, t: float) -> np.ndarray:
        """gamma(t) by a short RK4 re-integration from the nearest grid node."""
        t = float(np.clip(t, self.ts[0], self.ts[-1]))
        i = int(np.searchsorted(self.ts, t, side="right") - 1)
        i = min(max(i, 0), len(self.ts) - 1)
        g = self.gammas[i]
        dt = t - self.ts[i]
        if abs(dt) < 1e-15:
            return g
        J = standard_J(self.m)
        for t0, hh in ((self.ts[i], dt / 2), (self.ts[i] + dt / 2, dt / 2)):
            g = _rk4_step(self.B, J, t0, g, hh)
        return _symplectic_project(g, J)


def _rk4_step(B, J, t, g, h):
    def f(tt, gg):
        return J @ np.asarray(B(tt)) @ gg
    k1 = f(t, g)
    k2 = f(t + h / 2, g + h / 2 * k1)
    k3 = f(t + h / 2, g + h / 2 * k2)
    k4 = f(t + h, g + h * k3)
    return g + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _symplectic_project(g, J, sweeps: int = 3):
    """Newton-type correction g <- g (I + J E / 2), E = g^H J g - J."""
    for _ in range(sweeps):
        E = g.conj().T @ J @ g - J
        if np.linalg.norm(E) < 1e-15 * max(1.0, np.linalg.norm(g) ** 2):
            break
        g = g @ (np.eye(g.shape[0]) + 0.5 * J @ E)
    return g


def fundamental_solution(sys: LinearHamiltonianSystem, steps: int | None = None,
                         tol: Tolerances = DEFAULT) -> SymplecticPath:
    """Integrate gamma' = J B(t) gamma, gamma(0) = I, with symplectic re-projection."""
    n_factor = sys.rep.n if sys.rep is not None else 4
    K = steps or max(64 * n_factor, 256)
    J = standard_J(sys.m)
    ts = np.linspace(0.0, sys.T, K + 1)
    h = sys.T / K
    gam = np.empty((K + 1, 2 * sys.m, 2 * sys.m))
    gam[0] = np.eye(2 * sys.m)
    g = gam[0]
    worst = 0.0
    for i in range(K):
        g = _rk4_step(sys.B, J, ts[i], g, h)
        g = _symplectic_project(g, J)
        res = symplectic_residual(g, J) / max(1.0, np.linalg.norm(g) ** 2)
        worst = max(worst, res)
        if res > tol.tol_sympl:
            raise DriftExceeded(f"symplectic drift {res:.2e} at step {i}")
        gam[i + 1] = g.real
    return SymplecticPath(ts=ts, gammas=gam, B=sys.B, drift=worst)


def monodromy(sys: LinearHamiltonianSystem, steps: int | None = None) -> np.ndarray:
    return fundamental_solution(sys, steps).monodromy()


@dataclass
class SturmSystem:
    """Coefficients of -(P x' + Q x)' + Q^T x' + R x on [0, T]."""

    T: float
    m: int
    P: Callable[[float], np.ndarray] | None = None
    Q: Callable[[float], np.ndarray] | None = None
    R: Callable[[float], np.ndarray] | None = None
    rep: DihedralRep | None = None
    meta: dict = field(default_factory=dict)

    def p_at(self, t):
        if self.P is None:
            return np.eye(self.m)
        out = np.asarray(self.P(t), dtype=float)
        return out * np.eye(self.m) if out.ndim == 0 else out

    def q_at(self, t):
        if self.Q is None:
            return np.zeros((self.m, self.m))
        out = np.asarray(self.Q(t), dtype=float)
        return out * np.eye(self.m) if out.ndim == 0 else out

    def r_at(self, t):
        if self.R is None:
            return np.zeros((self.m, self.m))
        out = np.asarray(self.R(t), dtype=float)
        return out * np.eye(self.m) if out.ndim == 0 else out


def legendre_reduce(sturm: SturmSystem) -> LinearHamiltonianSystem:
    """Phase-space coefficient B(t) of the reduced first-order system.

    Solutions correspond through z = (P x' + Q x, x).
    """
    m = sturm.m

    def B(t: float) -> np.ndarray:
        P = sturm.p_at(t)
        ev = np.linalg.eigvalsh((P + P.T) / 2)
        if np.min(ev) <= 0:
            raise LegendreViolation(f"P(t) not positive definite at t={t:.5f}")
        Q = sturm.q_at(t)
        R = sturm.r_at(t)
        Pinv = np.linalg.inv(P)
        return np.block([[Pinv, -Pinv @ Q],
                         [-Q.T @ Pinv, Q.T @ Pinv @ Q - R]])

    return LinearHamiltonianSystem(B=B, T=sturm.T, m=m, rep=None)


# ---------------------------------------------------------------------------
# boundary data and indices


def boundary_frame(name_or_frame, m: int) -> np.ndarray:
    """Boundary Lagrangian of the product space: named constants or a frame.

    "dirichlet" is L_D x L_D with L_D = R^m x {0} in each factor (the
    configuration components vanish), "neumann" clamps the momentum
    components, "periodic" is the diagonal.
    """
    if isinstance(name_or_frame, str):
        name = name_or_frame.lower()
        zero = np.zeros((m, m))
        eye = np.eye(m)
        if name == "dirichlet":
            LD = np.vstack([eye, zero])
            return _pair_frame(LD, LD)
        if name == "neumann":
            LN = np.vstack([zero, eye])
            return _pair_frame(LN, LN)
        if name in ("periodic", "diagonal"):
            return np.vstack([np.eye(2 * m), np.eye(2 * m)])
        raise ValueError(f"unknown boundary name {name_or_frame!r}")
    return np.asarray(name_or_frame, dtype=complex)


def _pair_frame(F0: np.ndarray, F1: np.ndarray) -> np.ndarray:
    d = F0.shape[0]
    top = np.hstack([F0, np.zeros((d, F1.shape[1]))])
    bot = np.hstack([np.zeros((d, F0.shape[1])), F1])
    return np.vstack([top, bot])


def geometric_index(path: SymplecticPath, L, tol: Tolerances = DEFAULT,
                    a: float | None = None, b: float | None = None,
                    grid: int = 257) -> int:
    """Maslov index of the graph path against the boundary Lagrangian L."""
    m = path.m
    L = boundary_frame(L, m)
    st = SymplecticStructure.doubled(m)
    eye = np.eye(2 * m)

    def sampler(t: float) -> np.ndarray:
        return np.vstack([eye, path.at(t)])

    lp = LagrangianPath(sampler, a if a is not None else 0.0,
                        b if b is not None else path.T, st, grid=grid)
    return maslov_clm(L, lp, tol)


def spectral_index(sys: LinearHamiltonianSystem, L, n_el: int = 72,
                   tol: Tolerances = DEFAULT) -> int:
    """Minus the spectral flow of lambda -> -J d/dt - lambda B on the L-domain."""
    L = boundary_frame(L, sys.m)
    fam = first_order_family(sys.B, sys.T, n_el, sys.m, ProductBoundary(L, "L"))
    return -spectral_flow(fam, tol, method="counting")


def iota_L(L, m: int, T: float = 1.0, n_el: int = 64, tol: Tolerances = DEFAULT) -> int:
    """Index correction iota(L) relating Morse and geometric indices.

    Computed as the relative index of -J d/dt against -J d/dt - C with
    C = diag(I_m, -I_m) on the L-constrained domain.
    """
    C = np.diag([1.0] * m + [-1.0] * m)
    sys = LinearHamiltonianSystem(B=lambda t: C, T=T, m=m)
    return spectral_index(sys, L, n_el=n_el, tol=tol)


# ---------------------------------------------------------------------------
# the equivariant splitting of the geometric index


def equivariant_hamiltonian_system(rng: np.random.Generator, rep: DihedralRep,
                                   amplitude: float = 1.0, n_modes: int = 2,
                                   T: float | None = None) -> LinearHamiltonianSystem:
    """Random smooth B(t) commuting with the loop-space action of the rep."""
    from .dihedral import equivariant_coefficient
    B = equivariant_coefficient(rng, rep, kind="B", n_modes=n_modes,
                                amplitude=amplitude)
    sys = LinearHamiltonianSystem(B=B, T=T or rep.T, m=rep.dim // 2, rep=rep)
    sys.check_symmetry()
    return sys


def _component_maslov(path: SymplecticPath, L0: np.ndarray, moving: np.ndarray,
                      b: float, st: SymplecticStructure, doubled: bool,
                      tol: Tolerances, grid: int) -> dict:
    """mu(L0, gamma(t) V; [0, b]) with gamma doubled when the frames are."""
    m = path.m

    def sampler(t: float) -> np.ndarray:
        g = path.at(t)
        if doubled:
            z = np.zeros_like(g)
            g = np.block([[g, z], [z, g]])
        return g @ moving

    lp = LagrangianPath(sampler, 0.0, b, st, grid=grid)
    from .errors import NonIsolatedCrossing
    from .maslov import _perturbed_index
    try:
        idx = maslov_clm(L0, lp, tol)
        flag = None
    except NonIsolatedCrossing:
        # constant-intersection path (e.g. B = 0): the rotation device still
        # defines the intersection number
        idx = _perturbed_index(lp, L0, tol)
        flag = "constant-intersection"
    return {"index": int(idx), "regularized": flag}


def bott_hamiltonian(sys: LinearHamiltonianSystem, tol: Tolerances = DEFAULT,
                     steps: int | None = None, grid: int = 257) -> dict:
    """Split the geometric index of an equivariant system along its components.

    Returns every component integer over [0, T/(2n)], the half-period plus
    and minus indices, the full-period index against Gr(Q), and the equality
    flags between the totals and the component sums.
    """
    rep = sys.rep
    if rep is None:
        raise SymmetryViolated("system carries no dihedral rep metadata")
    sys.check_symmetry(tol)
    n, m = rep.n, sys.m
    M, N, Q = (np.asarray(a, dtype=float) for a in (rep.M, rep.N, rep.Q))
    path = fundamental_solution(sys, steps)
    st1 = SymplecticStructure.standard(m)
    st_pair = SymplecticStructure.pair_sum(m)
    std = SymplecticStructure.doubled(m)

    MN = M @ N
    NM1 = N @ np.linalg.matrix_power(M, n - 1)
    V_MN = spectral_projectors(MN, tol)
    V_N = spectral_projectors(N, tol)
    V_NM1 = spectral_projectors(NM1, tol)

    # full-period geometric index against Gr(Q): frame [Q; I]
    LQ = np.vstack([Q, np.eye(2 * m)])
    total = _component_maslov(path, LQ, np.eye(2 * m), sys.T, std, True, tol, grid)

    # half-period plus/minus indices
    halves = {}
    for i, sign in enumerate((+1, -1)):
        Lpm = _pair_frame(V_MN[i], V_NM1[i])
        halves[sign] = _component_maslov(path, Lpm, np.eye(2 * m), sys.T / 2,
                                         std, True, tol, grid)

    # components over [0, T/(2n)]
    zeta = rep.zeta
    P_big = np.block([[np.zeros((2 * m, 2 * m)), MN], [MN, np.zeros((2 * m, 2 * m))]])
    comps: dict = {}
    for i, sign in enumerate((+1, -1)):
        comps[sign] = {}
        comps[sign][0] = _component_maslov(path, V_N[i], V_MN[i], sys.T / (2 * n),
                                           st1, False, tol, grid)
        for k in rep.middle_k():
            ph = zeta ** (-k * (n - 1))
            Qk = np.block([[np.zeros((2 * m, 2 * m)), ph * N],
                           [np.conjugate(ph) * N, np.zeros((2 * m, 2 * m))]])
            VP = spectral_projectors(P_big, tol)[i]
            VQk = spectral_projectors(Qk, tol)[i]
            comps[sign][k] = _component_maslov(path, VQk, VP, sys.T / (2 * n),
                                               st_pair, True, tol, grid)
        if n % 2 == 0:
            half_k = n // 2
            V_mN = spectral_projectors(-N, tol)
            comps[sign][half_k] = _component_maslov(path, V_mN[i], V_MN[i],
                                                    sys.T / (2 * n), st1, False,
                                                    tol, grid)

    sums = {sign: sum(c["index"] for c in comps[sign].values()) for sign in (+1, -1)}
    report = {
        "n": n, "m": m, "T": sys.T,
        "total_index": total["index"],
        "half_index": {"+": halves[+1]["index"], "-": halves[-1]["index"]},
        "components": {
            ("+" if sign > 0 else "-"): {str(k): comps[sign][k] for k in sorted(comps[sign])}
            for sign in (+1, -1)
        },
        "component_sums": {"+": sums[+1], "-": sums[-1]},
        "total_equals_half_sum":
            total["index"] == halves[+1]["index"] + halves[-1]["index"],
        "half_equals_component_sum": {
            "+": halves[+1]["index"] == sums[+1],
            "-": halves[-1]["index"] == sums[-1],
        },
    }
    report["lhs_equals_sum"] = (report["total_equals_half_sum"]
                                and report["half_equals_component_sum"]["+"]
                                and report["half_equals_component_sum"]["-"])
    return report
