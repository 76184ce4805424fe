"""Dihedral group actions on discretised loop spaces and their isotypic pieces.

The group of order 2n acts on loops with the twisted periodicity
``z(t) = Q z(t + T)`` through

    (M z)(t) = M z(t + T/n)        (N z)(t) = N z(T/n - t).

On a uniform grid of N_mesh points with N_mesh divisible by 2n both time
maps are exact index permutations, so the discrete action satisfies the
group relations to machine precision and every projector, component basis
and restricted quadratic form inherits exact integer bookkeeping.

The local description of the components lives on [0, T/(2n)]: a component
is determined by its values there together with subspace conditions at the
two endpoints (boundary data of the reflection eigenspaces).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT, Tolerances
from .errors import InvalidComponent, MeshIncommensurate
from .linalg import (
    DihedralMatrixData,
    random_symmetric_unitary,
    spectral_projectors,
    standard_J,
    validate_dihedral_data,
)

__all__ = ["DihedralRep", "LoopSpace", "IsotypicComponent", "isotypic_projector",
           "component_boundary_data", "plus_minus_split", "random_quaternionic_rep",
           "planar_dihedral_rep", "equivariant_matrix", "equivariant_coefficient"]


@dataclass(frozen=True)
class DihedralRep:
    """Order parameter n, generator matrices and the period of the loop space."""

    n: int
    M: np.ndarray
    N: np.ndarray
    Q: np.ndarray
    T: float = 2 * np.pi
    quaternionic: bool = False

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    @property
    def zeta(self) -> complex:
        return np.exp(2j * np.pi / self.n)

    def data(self) -> DihedralMatrixData:
        return DihedralMatrixData(self.M, self.N, self.Q, self.n, self.quaternionic)

    def validate(self, tol: Tolerances = DEFAULT) -> dict:
        return validate_dihedral_data(self.data(), tol)

    @property
    def n_bar(self) -> int:
        return self.n // 2

    def k_range(self) -> list[int]:
        return list(range(self.n_bar + 1))

    def middle_k(self) -> list[int]:
        return list(range(1, (self.n - 1) // 2 + 1))


class LoopSpace:
    """Discrete loop space C^{d * N_mesh} carrying the exact dihedral action."""

    def __init__(self, rep: DihedralRep, n_mesh: int):
        if n_mesh % (2 * rep.n) != 0:
            raise MeshIncommensurate(f"N_mesh={n_mesh} not divisible by 2n={2 * rep.n}")
        self.rep = rep
        self.n_mesh = n_mesh
        self.d = rep.dim
        self.dim = rep.dim * n_mesh
        self._bases: dict = {}

    # -- node bookkeeping -------------------------------------------------
    def _time_map_op(self, A0: np.ndarray, target, wrap_mat) -> sp.csr_matrix:
        """Operator (U z)_j = A z_{target(j)} with a twist matrix on wrapped nodes."""
        d, N = self.d, self.n_mesh
        rows, cols, vals = [], [], []
        for j in range(N):
            jp = target(j)
            A = A0
            if jp >= N:
                jp -= N
                A = A @ wrap_mat[0]
            elif jp < 0:
                jp += N
                A = A @ wrap_mat[1]
            for a in range(d):
                for b in range(d):
                    if A[a, b] != 0:
                        rows.append(j * d + a)
                        cols.append(jp * d + b)
                        vals.append(A[a, b])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    @property
    def op_M(self) -> sp.csr_matrix:
        """(M z)_j = M z_{j + N/n}, wrapping through z(t + T) = Q^H z(t)."""
        if "M" not in self._bases:
            QH = np.asarray(self.rep.Q, dtype=complex).conj().T
            Q = np.asarray(self.rep.Q, dtype=complex)
            self._bases["M"] = self._time_map_op(
                np.asarray(self.rep.M, dtype=complex),
                lambda j: j + self.n_mesh // self.rep.n, (QH, Q))
        return self._bases["M"]

    @property
    def op_N(self) -> sp.csr_matrix:
        """(N z)_j = N z_{N/n - j}, wrapping through z(t - T) = Q z(t)."""
        if "N" not in self._bases:
            QH = np.asarray(self.rep.Q, dtype=complex).conj().T
            Q = np.asarray(self.rep.Q, dtype=complex)
            self._bases["N"] = self._time_map_op(
                np.asarray(self.rep.N, dtype=complex),
                lambda j: self.n_mesh // self.rep.n - j, (QH, Q))
        return self._bases["N"]

    def op_NMh(self, h: int) -> sp.csr_matrix:
        op = self.op_N
        for _ in range(h % self.rep.n):
            op = op @ self.op_M
        return op

    def relation_residuals(self) -> dict[str, float]:
        eye = sp.identity(self.dim, format="csr")
        Mn = sp.identity(self.dim, format="csr")
        for _ in range(self.rep.n):
            Mn = Mn @ self.op_M
        out = {
            "M^n = 1": sp.linalg.norm(Mn - eye),
            "N^2 = 1": sp.linalg.norm(self.op_N @ self.op_N - eye),
            "(NM)^2 = 1": sp.linalg.norm(self.op_NMh(1) @ self.op_NMh(1) - eye),
        }
        return {k: float(v) for k, v in out.items()}

    # -- projectors and bases ---------------------------------------------
    def projector_cyclic(self, k: int) -> np.ndarray:
        """P_k = (1/n) sum_j zeta^{-kj} M^j projecting onto E_k."""
        if not (0 <= k <= self.rep.n - 1):
            raise InvalidComponent(f"k={k} outside 0..n-1")
        key = ("P", k % self.rep.n)
        if key not in self._bases:
            n = self.rep.n
            acc = sp.csr_matrix((self.dim, self.dim), dtype=complex)
            Mj = sp.identity(self.dim, format="csr", dtype=complex)
            for j in range(n):
                acc = acc + self.rep.zeta ** (-k * j) * Mj
                Mj = Mj @ self.op_M
            self._bases[key] = np.asarray(acc.toarray()) / n
        return self._bases[key]

    def _orth(self, P: np.ndarray) -> np.ndarray:
        evals, evecs = np.linalg.eigh((P + P.conj().T) / 2)
        return evecs[:, evals > 0.5]

    def basis_E(self, k: int) -> np.ndarray:
        key = ("E", k % self.rep.n)
        if key not in self._bases:
            self._bases[key] = self._orth(self.projector_cyclic(k))
        return self._bases[key]

    def projector_F(self, k: int) -> np.ndarray:
        """F_0 = E_0, F_{n/2} = E_{n/2} (n even), F_k = E_k + E_{-k} otherwise."""
        if not (0 <= k <= self.rep.n_bar):
            raise InvalidComponent(f"k={k} outside 0..floor(n/2)")
        P = self.projector_cyclic(k)
        if 0 < k < self.rep.n / 2:
            P = P + self.projector_cyclic(self.rep.n - k)
        return P

    def basis_F(self, k: int) -> np.ndarray:
        key = ("F", k)
        if key not in self._bases:
            self._bases[key] = self._orth(self.projector_F(k))
        return self._bases[key]

    def basis_F_kh(self, k: int, h: int, sign: int) -> np.ndarray:
        """Orthonormal basis of the +/- eigenspace of N M^h inside F_k."""
        key = ("Fkh", k, h % self.rep.n, sign)
        if key not in self._bases:
            refl = self.op_NMh(h).toarray()
            P = self.projector_F(k) @ (np.eye(self.dim) + sign * refl) / 2
            self._bases[key] = self._orth(P)
        return self._bases[key]

    def basis_E_h(self, h: int, sign: int) -> np.ndarray:
        key = ("Eh", h % self.rep.n, sign)
        if key not in self._bases:
            refl = self.op_NMh(h).toarray()
            self._bases[key] = self._orth((np.eye(self.dim) + sign * refl) / 2)
        return self._bases[key]

    def rank_table(self) -> dict:
        rep = self.rep
        table = {
            "total": self.dim,
            "E_k": {k: self.basis_E(k).shape[1] for k in range(rep.n)},
            "F_k": {k: self.basis_F(k).shape[1] for k in rep.k_range()},
            "F_kh": {},
            "E_h": {},
        }
        for h in range(rep.n):
            table["E_h"][h] = {s: self.basis_E_h(h, s).shape[1] for s in (+1, -1)}
            table["F_kh"][h] = {f"{k}{'+' if s > 0 else '-'}":
                                self.basis_F_kh(k, h, s).shape[1]
                                for k in rep.k_range() for s in (+1, -1)}
        return table


def isotypic_projector(rep: DihedralRep, k: int, n_mesh: int) -> np.ndarray:
    """The averaging projector P_k on the discretised loop space."""
    return LoopSpace(rep, n_mesh).projector_cyclic(k)


@dataclass(frozen=True)
class IsotypicComponent:
    """Interval [0, T/(2n)] together with endpoint subspace frames.

    For middle k the values are doubled (pairs in C^{2d}); for k = 0 and
    k = n/2 they stay in C^d.
    """

    k: int
    h: int | None
    sign: int | None
    interval: tuple[float, float]
    frame_start: np.ndarray
    frame_end: np.ndarray
    doubled: bool
    transfer_M: np.ndarray | None = None
    transfer_N: np.ndarray | None = None


def component_boundary_data(rep: DihedralRep, k: int, h: int, sign: int,
                            tol: Tolerances = DEFAULT) -> IsotypicComponent:
    """Endpoint subspaces of the component (k, h, sign) on [0, T/(2n)].

    k = 0:    u(0) in V_sign(MN),              u(T/2n) in V_sign(N)
    k = n/2:  u(0) in V_sign((-1)^{h+1} MN),   u(T/2n) in V_sign((-1)^h N)
    middle k: pairs (x, sign * zeta^{k(h+1)} M N x) at 0 and
              pairs (x, sign * zeta^{k h} N x) at T/2n.
    """
    n = rep.n
    if sign not in (+1, -1):
        raise InvalidComponent("sign must be +1 or -1")
    if not (0 <= h <= n - 1):
        raise InvalidComponent(f"h={h} outside 0..n-1")
    if k < 0 or k > rep.n_bar or (2 * k == n and n % 2 == 1):
        raise InvalidComponent(f"k={k} invalid for n={n}")
    if 2 * k == n and n % 2 == 1:
        raise InvalidComponent("F_{n/2} vanishes for odd n")

    interval = (0.0, rep.T / (2 * n))
    M, N = np.asarray(rep.M, dtype=complex), np.asarray(rep.N, dtype=complex)
    MN = M @ N
    if k == 0:
        f0 = spectral_projectors(MN, tol)[0 if sign > 0 else 1]
        f1 = spectral_projectors(N, tol)[0 if sign > 0 else 1]
        return IsotypicComponent(k, h, sign, interval, f0, f1, doubled=False)
    if n % 2 == 0 and k == rep.n_bar:
        f0 = spectral_projectors(((-1) ** (h + 1)) * MN, tol)[0 if sign > 0 else 1]
        f1 = spectral_projectors(((-1) ** h) * N, tol)[0 if sign > 0 else 1]
        return IsotypicComponent(k, h, sign, interval, f0, f1, doubled=False)

    zeta = rep.zeta
    d = rep.dim
    f0 = np.vstack([np.eye(d), sign * zeta ** (k * (h + 1)) * MN])
    f1 = np.vstack([np.eye(d), sign * zeta ** (k * h) * N])
    zk, zmk = zeta ** (-k), zeta ** k
    hatM = np.block([[zk * M, np.zeros((d, d))], [np.zeros((d, d)), zmk * M]])
    hatN = np.block([[np.zeros((d, d)), zk * N], [zmk * N, np.zeros((d, d))]])
    return IsotypicComponent(k, h, sign, interval, f0, f1, doubled=True,
                             transfer_M=hatM, transfer_N=hatN)


def plus_minus_split(rep: DihedralRep, h: int) -> tuple[dict, dict]:
    """Specifications of the +/- eigenspaces of N M^h (per-component data)."""
    if not (0 <= h <= rep.n - 1):
        raise InvalidComponent(f"h={h} outside 0..n-1")
    out = []
    for sign in (+1, -1):
        comps = [component_boundary_data(rep, k, h, sign) for k in rep.k_range()
                 if not (rep.n % 2 == 1 and 2 * k == rep.n)]
        out.append({"h": h, "sign": sign, "components": comps})
    return out[0], out[1]


# ---------------------------------------------------------------------------
# random generators


def random_quaternionic_rep(rng: np.random.Generator, n: int, m: int,
                            minus_Q: bool = False, T: float = 2 * np.pi) -> DihedralRep:
    """Random real generators satisfying the full quaternionic relation set.

    M is built from a symmetric unitary W on C^m with W^n = +/- I through the
    real structure [[X, -Y], [Y, X]]; N = diag(I, -I) conjugated along.
    """
    exps = rng.integers(0, n, size=m)
    phases = 2 * np.pi * exps / n + (np.pi / n if minus_Q else 0.0)
    W = random_symmetric_unitary(rng, m, phases=phases)
    M = np.block([[W.real, -W.imag], [W.imag, W.real]])
    N = np.diag([1.0] * m + [-1.0] * m)
    # conjugating by a real matrix of the same block form (a unitary commuting
    # with J) preserves every relation and diversifies N
    U = random_symmetric_unitary(rng, m)
    G = np.block([[U.real, -U.imag], [U.imag, U.real]])
    M = G @ M @ G.T
    N = G @ N @ G.T
    Q = np.linalg.matrix_power(M, n)
    return DihedralRep(n=n, M=M, N=N, Q=Q, T=T, quaternionic=True)


def planar_dihedral_rep(n: int, T: float = 2 * np.pi) -> DihedralRep:
    """Rotation/reflection matrices of the regular n-gon acting on R^2."""
    c, s = np.cos(2 * np.pi / n), np.sin(2 * np.pi / n)
    S = np.array([[c, -s], [s, c]])
    N = np.diag([1.0, -1.0])
    return DihedralRep(n=n, M=S, N=N, Q=np.linalg.matrix_power(S, n), T=T)


def equivariant_matrix(rng: np.random.Generator, space: LoopSpace,
                       hermitian: bool = True) -> np.ndarray:
    """Group average of a random matrix on the discrete loop space."""
    A = rng.standard_normal((space.dim, space.dim))
    if hermitian:
        A = (A + A.T) / 2
    acc = np.zeros_like(A, dtype=complex)
    Mj = sp.identity(space.dim, format="csr", dtype=complex)
    for _ in range(space.rep.n):
        for U in (Mj, space.op_N @ Mj):
            Ud = U.toarray()
            acc += Ud @ A @ Ud.conj().T
        Mj = Mj @ space.op_M
    acc /= 2 * space.rep.n
    return (acc + acc.conj().T) / 2 if hermitian else acc


def equivariant_coefficient(rng: np.random.Generator, rep: DihedralRep,
                            kind: str, n_modes: int = 2, amplitude: float = 1.0,
                            reflection_sign: int = +1) -> Callable[[float], np.ndarray]:
    """Random smooth coefficient sampler satisfying the equivariance relations.

    ``kind`` selects the conjugation behaviour: "P" / "R" style coefficients
    transform with a plus sign under the reflection, the mixed "Q"
    coefficient with a minus sign (time reversal flips one derivative), and
    "B" is the phase-space Hessian (plus sign, with the phase-space N).
    Symmetric T-periodic Fourier data is averaged over the group orbit, so
    the relations hold pointwise in exact arithmetic.
    """
    d = rep.dim
    n, T = rep.n, rep.T
    M = np.asarray(rep.M, dtype=float)
    N = np.asarray(rep.N, dtype=float)
    sgn = -1.0 if kind.upper() == "Q" else 1.0
    sym = kind.upper() != "Q"

    coeffs = []
    for _ in range(n_modes + 1):
        A = amplitude * rng.standard_normal((d, d))
        Bm = amplitude * rng.standard_normal((d, d))
        if sym:
            A, Bm = (A + A.T) / 2, (Bm + Bm.T) / 2
        coeffs.append((A, Bm))

    def base(t: float) -> np.ndarray:
        w = 2 * np.pi / T
        out = coeffs[0][0].copy()
        for j, (A, Bm) in enumerate(coeffs[1:], start=1):
            out = out + np.cos(j * w * t) * A + np.sin(j * w * t) * Bm
        return out

    powers = [np.linalg.matrix_power(M, j) for j in range(n)]

    def avg(t: float) -> np.ndarray:
        acc = np.zeros((d, d))
        for j in range(n):
            Mj = powers[j]
            acc = acc + Mj @ base(t + j * T / n) @ Mj.T
            NMj = N @ Mj
            acc = acc + sgn * NMj @ base(j * T / n + T / n - t) @ NMj.T
        return acc / (2 * n)

    return avg
