"""P1 finite-element assembly of Sturm index forms and first-order pencils.

Forms are assembled on the full nodal space of vector-valued piecewise
linear functions on a uniform mesh of [0, T'], then restricted to the
boundary-condition subspace by a congruence with an explicit constraint
basis.  All boundary conditions are expressed through one primitive: the
admissible boundary pairs ``(u(0), u(T'))`` form the column span of a frame
in the product space ``C^d (+) C^d``.

The first-order operator ``-J d/dt - B(t)`` is discretised through its
quadratic form on the same elements.  Plain P1 has spurious near-kernel
modes at the Nyquist scale (the centred-difference checkerboard), so a
consistent O(h^2) stabilisation ``c h^2 int <u', v'>`` is added; it leaves
constants and all converged crossing counts untouched while pushing the
spurious branch to a fixed positive offset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT, Tolerances
from .errors import LegendreViolation
from .spectral_flow import HermitianFamily, form_index_nullity, near_zero_eigs

__all__ = ["ProductBoundary", "dirichlet", "neumann", "linked", "subspace_pair",
           "GalerkinProblem", "assemble_sturm", "restrict",
           "first_order_family", "sturm_index"]

_GAUSS2 = (np.array([-1 / np.sqrt(3), 1 / np.sqrt(3)]), np.array([1.0, 1.0]))


@dataclass(frozen=True)
class ProductBoundary:
    """Boundary pairs (u(0), u(T')) constrained to the span of ``frame`` (2d x r)."""

    frame: np.ndarray
    label: str = ""


def dirichlet(d: int) -> ProductBoundary:
    return ProductBoundary(np.zeros((2 * d, 0)), "dirichlet")


def neumann(d: int) -> ProductBoundary:
    return ProductBoundary(np.eye(2 * d), "neumann")


def linked(G: np.ndarray) -> ProductBoundary:
    """u(0) = G u(T'); G = omega*I gives the quasi-periodic condition."""
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    return ProductBoundary(np.vstack([G, np.eye(G.shape[0])]), "linked")


def subspace_pair(F0: np.ndarray, F1: np.ndarray) -> ProductBoundary:
    """u(0) in span(F0), u(T') in span(F1); empty frames clamp the endpoint."""
    F0 = np.atleast_2d(np.asarray(F0, dtype=complex))
    F1 = np.atleast_2d(np.asarray(F1, dtype=complex))
    d = F0.shape[0]
    top = np.hstack([F0, np.zeros((d, F1.shape[1]))])
    bot = np.hstack([np.zeros((d, F0.shape[1])), F1])
    return ProductBoundary(np.vstack([top, bot]), "subspace")


def constraint_basis(n_nodes: int, d: int, bc: ProductBoundary) -> sp.csr_matrix:
    """Sparse basis of the nodal subspace satisfying the boundary condition."""
    F = np.asarray(bc.frame, dtype=complex)
    r = F.shape[1]
    n_int = (n_nodes - 2) * d
    rows, cols, vals = [], [], []
    # interior nodes are free
    for j in range(n_int):
        rows.append(d + j)
        cols.append(j)
        vals.append(1.0)
    # boundary pair runs over the frame columns
    for c in range(r):
        for i in range(d):
            if F[i, c] != 0:
                rows.append(i)
                cols.append(n_int + c)
                vals.append(F[i, c])
            if F[d + i, c] != 0:
                rows.append((n_nodes - 1) * d + i)
                cols.append(n_int + c)
                vals.append(F[d + i, c])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes * d, n_int + r))


def restrict(K: sp.spmatrix, C: sp.spmatrix) -> np.ndarray:
    A = (C.conj().T @ K @ C).toarray()
    return (A + A.conj().T) / 2


def _coef(f, t: float, d: int) -> np.ndarray:
    if f is None:
        return np.zeros((d, d))
    out = np.asarray(f(t), dtype=complex)
    if out.ndim == 0:
        return out * np.eye(d)
    return out


def assemble_sturm(P, Q, R, T: float, n_el: int, d: int,
                   check_legendre: bool = True) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Stiffness of int <P u' + Q u, v'> + <Q^H u', v> + <R u, v> dt and the P1 mass.

    ``P, Q, R`` are samplers returning d x d matrices (scalars broadcast);
    ``None`` means zero (``P=None`` means the identity).  The assembled
    matrix is Hermitian for Hermitian P, R and arbitrary Q.
    """
    h = T / n_el
    n_nodes = n_el + 1
    xi, wq = _GAUSS2
    K = sp.lil_matrix((n_nodes * d, n_nodes * d), dtype=complex)
    M = sp.lil_matrix((n_nodes * d, n_nodes * d), dtype=complex)
    for e in range(n_el):
        t0 = e * h
        Ke = np.zeros((2 * d, 2 * d), dtype=complex)
        Me = np.zeros((2 * d, 2 * d), dtype=complex)
        for x, w in zip(xi, wq):
            t = t0 + h * (x + 1) / 2
            wgt = w * h / 2
            Pt = np.eye(d) if P is None else _coef(P, t, d)
            if check_legendre:
                ev = np.linalg.eigvalsh((Pt + Pt.conj().T) / 2)
                if np.min(ev) <= 0:
                    raise LegendreViolation(f"P(t) has eigenvalue {ev[0]:.3e} at t={t:.6f}")
            Qt = _coef(Q, t, d)
            Rt = _coef(R, t, d)
            phi = np.array([(1 - x) / 2, (1 + x) / 2])
            dphi = np.array([-1 / h, 1 / h])
            # I(u, v) = sum u_a^H [ phi_a' phi_b' P + phi_a phi_b' Q^H
            #                       + phi_a' phi_b Q + phi_a phi_b R ] v_b
            for a in range(2):
                for b in range(2):
                    blk = (dphi[a] * dphi[b] * Pt
                           + phi[a] * dphi[b] * Qt.conj().T
                           + dphi[a] * phi[b] * Qt
                           + phi[a] * phi[b] * Rt)
                    Ke[a * d:(a + 1) * d, b * d:(b + 1) * d] += wgt * blk
                    Me[a * d:(a + 1) * d, b * d:(b + 1) * d] += wgt * phi[a] * phi[b] * np.eye(d)
        idx = np.arange(e * d, (e + 2) * d)
        K[np.ix_(idx, idx)] += Ke
        M[np.ix_(idx, idx)] += Me
    return K.tocsr(), M.tocsr()


@dataclass
class GalerkinProblem:
    """A Sturm index form with boundary conditions on [0, T']."""

    T: float
    d: int
    bc: ProductBoundary
    P: Callable | None = None
    Q: Callable | None = None
    R: Callable | None = None
    n_el: int = 64
    meta: dict = field(default_factory=dict)

    def assemble(self) -> tuple[np.ndarray, np.ndarray]:
        K, M = assemble_sturm(self.P, self.Q, self.R, self.T, self.n_el, self.d)
        C = constraint_basis(self.n_el + 1, self.d, self.bc)
        return restrict(K, C), restrict(M, C)

    def index_nullity(self, tol_null: float | None = None) -> tuple[int, int]:
        K, M = self.assemble()
        return form_index_nullity(K, M, tol_null)

    def eig_tail(self, k: int = 8) -> np.ndarray:
        K, M = self.assemble()
        return near_zero_eigs(K, M, k)

    def refined(self, factor: int = 2) -> "GalerkinProblem":
        return GalerkinProblem(self.T, self.d, self.bc, self.P, self.Q, self.R,
                               self.n_el * factor, dict(self.meta))


def sturm_index(problem: GalerkinProblem, tol: Tolerances = DEFAULT,
                check_stable: bool = False) -> tuple[int, int]:
    """(index, nullity) of the problem; optionally verified under mesh doubling."""
    idx = problem.index_nullity()
    if check_stable:
        idx2 = problem.refined().index_nullity()
        if idx[0] != idx2[0]:
            raise RuntimeError(f"index not mesh-stable: {idx} vs {idx2}")
    return idx


# ---------------------------------------------------------------------------
# first-order pencils


def _assemble_first_order_blocks(B, T: float, n_el: int, d: int, J: np.ndarray,
                                 stab: float) -> tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
    """K0 (with stabilisation), KB (the <B u, v> weight) and the mass matrix."""
    h = T / n_el
    n_nodes = n_el + 1
    xi, wq = _GAUSS2
    K0 = sp.lil_matrix((n_nodes * d, n_nodes * d), dtype=complex)
    KB = sp.lil_matrix((n_nodes * d, n_nodes * d), dtype=complex)
    M = sp.lil_matrix((n_nodes * d, n_nodes * d), dtype=complex)
    for e in range(n_el):
        t0 = e * h
        K0e = np.zeros((2 * d, 2 * d), dtype=complex)
        KBe = np.zeros((2 * d, 2 * d), dtype=complex)
        Me = np.zeros((2 * d, 2 * d), dtype=complex)
        for x, w in zip(xi, wq):
            t = t0 + h * (x + 1) / 2
            wgt = w * h / 2
            Bt = _coef(B, t, d)
            phi = np.array([(1 - x) / 2, (1 + x) / 2])
            dphi = np.array([-1 / h, 1 / h])
            # <-J u', v> = u'^H J v since J^H = -J
            for a in range(2):
                for b in range(2):
                    blk0 = (dphi[a] * phi[b] * J
                            + stab * h * h * dphi[a] * dphi[b] * np.eye(d))
                    K0e[a * d:(a + 1) * d, b * d:(b + 1) * d] += wgt * blk0
                    KBe[a * d:(a + 1) * d, b * d:(b + 1) * d] += wgt * phi[a] * phi[b] * Bt
                    Me[a * d:(a + 1) * d, b * d:(b + 1) * d] += wgt * phi[a] * phi[b] * np.eye(d)
        idx = np.arange(e * d, (e + 2) * d)
        K0[np.ix_(idx, idx)] += K0e
        KB[np.ix_(idx, idx)] += KBe
        M[np.ix_(idx, idx)] += Me
    return K0.tocsr(), KB.tocsr(), M.tocsr()


def first_order_family(B, T: float, n_el: int, m: int, bc: ProductBoundary,
                       stab: float | None = None, coupling: str = "linear") -> HermitianFamily:
    """Family lambda -> form of (-J d/dt - lambda B) on the bc-constrained P1 space.

    ``B`` samples symmetric 2m x 2m matrices.  The Hermitian form of the
    operator is ``int <-J u', v> - lambda <B u, v>``; after restriction to
    boundary frames whose pairs are isotropic for (-omega (+) omega) the
    skew boundary term cancels and the matrix is Hermitised.
    """
    from .linalg import standard_J
    d = 2 * m
    J = standard_J(m)
    if stab is None:
        bs = max(np.linalg.norm(_coef(B, t, d)) for t in np.linspace(0, T, 17)) if B else 0.0
        stab = 0.5 * (1.0 + bs)
    K0s, KBs, Ms = _assemble_first_order_blocks(B, T, n_el, d, J, stab)
    C = constraint_basis(n_el + 1, d, bc)
    K0_raw = (C.conj().T @ K0s @ C).toarray()
    skew = np.linalg.norm(K0_raw - K0_raw.conj().T)
    if skew > 1e-8 * max(1.0, np.linalg.norm(K0_raw)):
        raise ValueError(
            "boundary condition breaks selfadjointness of -J d/dt "
            f"(skew residual {skew:.2e}); the frame must be Lagrangian for -omega (+) omega")
    K0 = (K0_raw + K0_raw.conj().T) / 2
    KB = restrict(KBs, C)
    M = restrict(Ms, C)
    return HermitianFamily(K=lambda lam: K0 - lam * KB, M=M, dK=lambda lam: -KB,
                           meta={"n_el": n_el, "stab": stab, "bc": bc.label})
