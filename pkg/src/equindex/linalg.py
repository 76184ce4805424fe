"""Symplectic and unitary linear algebra primitives.

Conventions.  The Hermitian product is conjugate-linear in the first
argument, ``<x, y> = x^H y``, and the symplectic form is
``omega(x, y) = <J x, y>`` with ``J = [[0, -I], [I, 0]]`` on the standard
space.  A complex subspace spanned by the columns of a full-rank frame
``Z`` (2M x M) is Lagrangian when ``Z^H J Z = 0``.  Real inputs are
promoted to complex; the computations specialise correctly to real
Lagrangian subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import NotInvolutive, NotSymplectic, RankDeficient

__all__ = [
    "standard_J",
    "doubled_J",
    "direct_sum_J",
    "SymplecticSpace",
    "SymplecticStructure",
    "omega_gram",
    "orthonormal_frame",
    "lagrangian_residual",
    "check_lagrangian",
    "unitary_of_lagrangian",
    "frame_of_unitary",
    "graph_lagrangian",
    "symplectic_residual",
    "principal_angles",
    "intersection_dimension",
    "intersection_basis",
    "InvolutionData",
    "spectral_projectors",
    "DihedralMatrixData",
    "validate_dihedral_data",
    "random_unitary",
    "random_orthogonal",
    "random_symmetric_unitary",
    "random_real_symplectic",
    "random_lagrangian_frame",
]


def standard_J(m: int) -> np.ndarray:
    """The standard complex structure on R^{2m} (or C^{2m})."""
    J = np.zeros((2 * m, 2 * m))
    J[:m, m:] = -np.eye(m)
    J[m:, :m] = np.eye(m)
    return J


def doubled_J(J: np.ndarray) -> np.ndarray:
    """Structure of the product space carrying -omega (+) omega."""
    z = np.zeros_like(J)
    return np.block([[-J, z], [z, J]])


def direct_sum_J(J1: np.ndarray, J2: np.ndarray) -> np.ndarray:
    z12 = np.zeros((J1.shape[0], J2.shape[1]))
    return np.block([[J1, z12], [z12.T, J2]])


@dataclass(frozen=True)
class SymplecticSpace:
    """Standard symplectic space of half-dimension m."""

    m: int
    J: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.J is None:
            object.__setattr__(self, "J", standard_J(self.m))
        res = np.linalg.norm(self.J @ self.J + np.eye(2 * self.m))
        if res > 1e-12:
            raise ValueError("J^2 != -I")

    def form(self, x: np.ndarray, y: np.ndarray) -> complex:
        return complex(np.vdot(self.J @ x, y))


class SymplecticStructure:
    """A complex structure J together with the eigenframes of iJ.

    ``iJ`` is a Hermitian involution; its +1/-1 eigenspaces ``L^+``/``L^-``
    give the unitary parametrisation of the Lagrangian Grassmannian.  The
    eigenbasis is computed once and reused by the Maslov engine.
    """

    def __init__(self, J: np.ndarray):
        J = np.asarray(J, dtype=complex)
        d = J.shape[0]
        if d % 2:
            raise ValueError("J must act on an even-dimensional space")
        if np.linalg.norm(J @ J + np.eye(d)) > 1e-10 * d:
            raise ValueError("J^2 != -I")
        if np.linalg.norm(J + J.conj().T) > 1e-10 * d:
            raise ValueError("J must be anti-Hermitian")
        self.J = J
        self.dim = d
        self.half = d // 2
        self.basis_plus = self._eigenframe(+1)
        self.basis_minus = self._eigenframe(-1)

    def _eigenframe(self, sign: int) -> np.ndarray:
        """Deterministic orthonormal basis of ker(iJ - sign I).

        For the standard structure the +1 frame is [e_j; i e_j]/sqrt(2), so
        the horizontal Lagrangian R^m x {0} is represented by U = I.
        """
        m = self.half
        proj = (np.eye(self.dim) + sign * 1j * self.J) / 2
        if np.allclose(self.J, standard_J(m)):
            cols = proj[:, :m]
        else:
            # pivoted QR picks a well-conditioned, deterministic column set
            from scipy.linalg import qr
            _, _, piv = qr(proj, pivoting=True)
            cols = proj[:, piv[:m]]
        return orthonormal_frame(cols * np.sqrt(2))

    @classmethod
    def standard(cls, m: int) -> "SymplecticStructure":
        return cls(standard_J(m))

    @classmethod
    def doubled(cls, m: int) -> "SymplecticStructure":
        """Structure of (-omega (+) omega) on C^{4m}; graphs of symplectic maps live here."""
        return cls(doubled_J(standard_J(m)))

    @classmethod
    def pair_sum(cls, m: int) -> "SymplecticStructure":
        """Structure of (omega (+) omega) on C^{4m}; doubled isotypic frames live here."""
        Jm = standard_J(m)
        return cls(direct_sum_J(Jm, Jm))


def omega_gram(J: np.ndarray, Z1: np.ndarray, Z2: np.ndarray) -> np.ndarray:
    """Gram matrix omega(z1_i, z2_j) = <J z1_i, z2_j> between two frames."""
    return (J @ Z1).conj().T @ Z2


def orthonormal_frame(Z: np.ndarray) -> np.ndarray:
    """Orthonormalise the columns of a frame (thin QR)."""
    Q, R = np.linalg.qr(np.asarray(Z, dtype=complex))
    if Z.shape[1] and np.min(np.abs(np.diag(R))) < 1e-13 * max(1.0, np.linalg.norm(Z)):
        raise RankDeficient("frame columns are numerically dependent")
    return Q


def lagrangian_residual(Z: np.ndarray, J: np.ndarray) -> float:
    Q = orthonormal_frame(Z)
    return float(np.linalg.norm(omega_gram(J, Q, Q)))


def check_lagrangian(Z: np.ndarray, space: SymplecticSpace | np.ndarray,
                     tol: Tolerances = DEFAULT) -> tuple[bool, float]:
    """Test whether the frame spans a Lagrangian subspace.

    Returns ``(ok, residual)``; raises ``RankDeficient`` for malformed frames.
    """
    J = space.J if isinstance(space, SymplecticSpace) else np.asarray(space)
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if Z.shape[0] != J.shape[0]:
        raise RankDeficient("frame rows do not match the space dimension")
    if Z.shape[1] != J.shape[0] // 2:
        raise RankDeficient(
            f"a Lagrangian frame in dimension {J.shape[0]} needs "
            f"{J.shape[0] // 2} columns, got {Z.shape[1]}")
    res = lagrangian_residual(Z, J)
    return res <= tol.tol_lag, res


def unitary_of_lagrangian(Z: np.ndarray, structure: SymplecticStructure) -> np.ndarray:
    """Unitary representative of span(Z) under L -> graph of U : L+ -> L-."""
    Z = orthonormal_frame(np.asarray(Z, dtype=complex))
    zp = structure.basis_plus.conj().T @ Z
    zm = structure.basis_minus.conj().T @ Z
    return zm @ np.linalg.inv(zp)


def frame_of_unitary(U: np.ndarray, structure: SymplecticStructure) -> np.ndarray:
    """Inverse of :func:`unitary_of_lagrangian` (up to gauge): rebuild a frame."""
    return orthonormal_frame(structure.basis_plus + structure.basis_minus @ U)


def symplectic_residual(gamma: np.ndarray, J: np.ndarray) -> float:
    return float(np.linalg.norm(gamma.conj().T @ J @ gamma - J))


def graph_lagrangian(gamma: np.ndarray, J: np.ndarray | None = None,
                     tol: Tolerances = DEFAULT) -> np.ndarray:
    """Frame [I; gamma] of the graph of a symplectic matrix in (-omega (+) omega)."""
    gamma = np.asarray(gamma, dtype=complex)
    d = gamma.shape[0]
    if J is None:
        J = standard_J(d // 2)
    res = symplectic_residual(gamma, J)
    if res > tol.tol_sympl * max(1.0, np.linalg.norm(gamma)) * 10:
        raise NotSymplectic(f"gamma^H J gamma - J has norm {res:.3e}")
    return np.vstack([np.eye(d), gamma])


def principal_angles(Z1: np.ndarray, Z2: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of two frames.

    Uses the sine/cosine-switching algorithm, so angles near zero are
    resolved to machine precision rather than to sqrt(eps).
    """
    from scipy.linalg import subspace_angles
    return np.sort(subspace_angles(np.asarray(Z1, dtype=complex),
                                   np.asarray(Z2, dtype=complex)))


def intersection_dimension(Z1: np.ndarray, Z2: np.ndarray, angle_tol: float = 1e-8) -> int:
    if Z1.shape[1] == 0 or Z2.shape[1] == 0:
        return 0
    return int(np.sum(principal_angles(Z1, Z2) <= angle_tol))


def intersection_basis(Z1: np.ndarray, Z2: np.ndarray, angle_tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of span(Z1) /\\ span(Z2), taken on the Z2 side."""
    Q1 = orthonormal_frame(Z1)
    Q2 = orthonormal_frame(Z2)
    u, s, vh = np.linalg.svd(Q1.conj().T @ Q2)
    keep = s >= np.cos(angle_tol)
    return Q2 @ vh.conj().T[:, keep]


@dataclass(frozen=True)
class InvolutionData:
    """A unitary involution with a free-form label."""

    U: np.ndarray
    label: str = ""

    def residual(self) -> float:
        U = np.asarray(self.U)
        return float(np.linalg.norm(U @ U - np.eye(U.shape[0])) / max(1.0, np.linalg.norm(U)))


def spectral_projectors(U: InvolutionData | np.ndarray,
                        tol: Tolerances = DEFAULT) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal frames of the +1 and -1 eigenspaces of a unitary involution."""
    mat = np.asarray(U.U if isinstance(U, InvolutionData) else U, dtype=complex)
    res = np.linalg.norm(mat @ mat - np.eye(mat.shape[0])) / max(1.0, np.linalg.norm(mat))
    if res > tol.tol_rel * 100:
        raise NotInvolutive(f"U^2 - I has relative norm {res:.3e}")
    # a unitary involution is Hermitian, so eigh applies
    evals, evecs = np.linalg.eigh((mat + mat.conj().T) / 2)
    plus = evecs[:, evals > 0]
    minus = evecs[:, evals < 0]
    return plus, minus


@dataclass(frozen=True)
class DihedralMatrixData:
    """Generator matrices of a dihedral action on C^d (d = 2m in the phase case)."""

    M: np.ndarray
    N: np.ndarray
    Q: np.ndarray
    n: int
    quaternionic: bool = False   # also check MJ = JM, NJ = -JN, N = N^H

    @property
    def dim(self) -> int:
        return self.M.shape[0]


def validate_dihedral_data(D: DihedralMatrixData, tol: Tolerances = DEFAULT) -> dict:
    """Residual report for the dihedral generator relations."""
    M, N, Q = (np.asarray(a, dtype=complex) for a in (D.M, D.N, D.Q))
    d = M.shape[0]
    eye = np.eye(d)
    scale = max(1.0, np.linalg.norm(M), np.linalg.norm(N))
    rel = {
        "M^n = Q": np.linalg.norm(np.linalg.matrix_power(M, D.n) - Q),
        "N^2 = I": np.linalg.norm(N @ N - eye),
        "N M* = M N": np.linalg.norm(N @ M.conj().T - M @ N),
        "M unitary": np.linalg.norm(M.conj().T @ M - eye),
        "N unitary": np.linalg.norm(N.conj().T @ N - eye),
    }
    if D.quaternionic:
        J = standard_J(d // 2)
        rel["M J = J M"] = np.linalg.norm(M @ J - J @ M)
        rel["N J = -J N"] = np.linalg.norm(N @ J + J @ N)
        rel["N = N^H"] = np.linalg.norm(N - N.conj().T)
    residuals = {k: float(v / scale) for k, v in rel.items()}
    return {
        "relations": residuals,
        "passed": all(v <= tol.tol_rel * 100 for v in residuals.values()),
        "tolerance": tol.tol_rel * 100,
    }


# ---------------------------------------------------------------------------
# random generators used by the property suites

def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    return Q * np.sign(np.diag(R))


def random_symmetric_unitary(rng: np.random.Generator, n: int,
                             phases: np.ndarray | None = None) -> np.ndarray:
    """U = O diag(e^{i theta}) O^T with O real orthogonal; parametrises real Lagrangians."""
    O = random_orthogonal(rng, n)
    if phases is None:
        phases = rng.uniform(0, 2 * np.pi, n)
    return O @ np.diag(np.exp(1j * phases)) @ O.T


def random_real_symplectic(rng: np.random.Generator, m: int, scale: float = 1.0) -> np.ndarray:
    from scipy.linalg import expm
    S = rng.standard_normal((2 * m, 2 * m))
    S = scale * (S + S.T) / 2
    return expm(standard_J(m) @ S)


def random_lagrangian_frame(rng: np.random.Generator, structure: SymplecticStructure,
                            real: bool = False) -> np.ndarray:
    m = structure.half
    U = random_symmetric_unitary(rng, m) if real else random_unitary(rng, m)
    return frame_of_unitary(U, structure)
