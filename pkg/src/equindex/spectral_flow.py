"""Spectral flow, Morse index and relative Morse index of Hermitian families.

Two independent computations of the spectral flow are provided.  The
crossing route locates the parameter values where the family becomes
singular, evaluates the crossing form ``<dA/dlambda u, u>`` on the kernel,
and sums signatures with the endpoint convention

    spfl = -n_minus[Gamma(0)] + sum over interior crossings of sgn Gamma
           + n_plus[Gamma(1)].

The counting route partitions the interval and tracks how many eigenvalues
sit in a window [0, a_i] whose endpoints stay out of the spectrum; it needs
no regularity at all and serves as the oracle.  Degenerate crossings on the
crossing route are regularised by small positive multiples of the identity,
accepted when two shift values agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT, Tolerances
from .errors import UnresolvableDegeneracy

__all__ = ["morse_index", "form_index_nullity", "inertia", "HermitianFamily",
           "spectral_flow", "spectral_flow_counting", "relative_morse_index",
           "near_zero_eigs"]


def morse_index(A: np.ndarray, tol_null: float | None = None) -> tuple[int, int]:
    """(index, nullity) of a Hermitian matrix: counts below -tol and within tol."""
    A = np.asarray(A)
    ev = np.linalg.eigvalsh((A + A.conj().T) / 2)
    if tol_null is None:
        tol_null = DEFAULT.tol_null * max(1.0, float(np.max(np.abs(ev), initial=0.0)))
    index = int(np.sum(ev < -tol_null))
    nullity = int(np.sum(np.abs(ev) <= tol_null))
    return index, nullity


def inertia(A: np.ndarray) -> tuple[int, int, int]:
    """(n_minus, n_zero, n_plus) of a Hermitian matrix via LDL^H factorisation."""
    A = np.asarray(A)
    if A.shape[0] == 0:
        return 0, 0, 0
    _, d, _ = sla.ldl((A + A.conj().T) / 2, hermitian=True)
    n_minus = n_zero = n_plus = 0
    scale = max(1.0, float(np.max(np.abs(d))))
    i, n = 0, d.shape[0]
    while i < n:
        if i + 1 < n and abs(d[i, i + 1]) > 1e-14 * scale:
            ev = np.linalg.eigvalsh(d[i:i + 2, i:i + 2])
            for e in ev:
                if e > 1e-14 * scale:
                    n_plus += 1
                elif e < -1e-14 * scale:
                    n_minus += 1
                else:
                    n_zero += 1
            i += 2
        else:
            e = d[i, i].real
            if e > 1e-14 * scale:
                n_plus += 1
            elif e < -1e-14 * scale:
                n_minus += 1
            else:
                n_zero += 1
            i += 1
    return n_minus, n_zero, n_plus


def _count_below(K: np.ndarray, M: np.ndarray | None, sigma: float) -> int:
    """Number of generalized eigenvalues of (K, M) strictly below sigma."""
    shifted = K - sigma * (M if M is not None else np.eye(K.shape[0]))
    return inertia(shifted)[0] + inertia(shifted)[1] * 0


def form_index_nullity(K: np.ndarray, M: np.ndarray | None = None,
                       tol_null: float | None = None) -> tuple[int, int]:
    """(index, nullity) of the pencil (K, M) by spectrum slicing with LDL inertia."""
    if tol_null is None:
        scale = np.sqrt(np.linalg.norm(K, 1) * np.linalg.norm(K, np.inf))
        mscale = 1.0 if M is None else np.sqrt(np.linalg.norm(M, 1) * np.linalg.norm(M, np.inf))
        tol_null = DEFAULT.tol_null * max(1.0, scale / mscale)
    below = _count_below(K, M, -tol_null)
    above = _count_below(K, M, +tol_null)
    return below, above - below


def near_zero_eigs(K: np.ndarray, M: np.ndarray | None = None, k: int = 8) -> np.ndarray:
    """The k eigenvalues of the pencil closest to zero (for report tails)."""
    n = K.shape[0]
    if n <= 1400:
        ev = sla.eigh(K, M, eigvals_only=True)
    else:
        import scipy.sparse as sp
        import scipy.sparse.linalg as spl
        Ks = sp.csc_matrix(K)
        Ms = sp.csc_matrix(M) if M is not None else None
        ev = spl.eigsh(Ks, k=min(k, n - 2), M=Ms, sigma=0.0,
                       return_eigenvectors=False)
    order = np.argsort(np.abs(ev))
    return np.sort(ev[order[:k]])


@dataclass
class HermitianFamily:
    """One-parameter family of Hermitian matrices on [0, 1] (optionally a pencil)."""

    K: Callable[[float], np.ndarray]
    M: np.ndarray | None = None
    dK: Callable[[float], np.ndarray] | None = None
    meta: dict | None = None

    def matrix(self, lam: float) -> np.ndarray:
        A = np.asarray(self.K(float(lam)))
        return (A + A.conj().T) / 2

    def derivative(self, lam: float, h: float = 1e-5) -> np.ndarray:
        if self.dK is not None:
            return np.asarray(self.dK(float(lam)))
        lo, hi = max(0.0, lam - h), min(1.0, lam + h)
        return (self.matrix(hi) - self.matrix(lo)) / (hi - lo)

    def kernel_basis(self, lam: float, tol_null: float) -> np.ndarray:
        ev, evec = (sla.eigh(self.matrix(lam)) if self.M is None
                    else sla.eigh(self.matrix(lam), self.M))
        return evec[:, np.abs(ev) <= tol_null]


def _null_scale(fam: HermitianFamily, tol: Tolerances) -> float:
    K0, K1 = fam.matrix(0.0), fam.matrix(1.0)
    scale = max(np.linalg.norm(K0, np.inf), np.linalg.norm(K1, np.inf), 1.0)
    if fam.M is not None:
        scale /= max(np.linalg.norm(fam.M, np.inf), 1e-30) ** 0  # pencil scale kept absolute
    return tol.tol_null * scale


def spectral_flow_counting(fam: HermitianFamily, tol: Tolerances = DEFAULT,
                           coarse: int = 17) -> int:
    """Spectral flow by the eigenvalue-counting definition (exact, no regularity needed).

    On each subinterval a window height ``a`` is chosen in a spectral gap of
    both endpoint matrices, with a safety margin larger than the possible
    eigenvalue movement (Weyl bound); the subinterval is split until such a
    window exists.  The flow is the telescoped change of the number of
    eigenvalues inside [0, a].  A pencil is reduced to standard form once
    through the Cholesky factor of the mass matrix.
    """
    M = fam.M
    if M is not None:
        Lc = np.linalg.cholesky((M + M.conj().T) / 2)
        Linv = sla.solve_triangular(Lc, np.eye(M.shape[0]), lower=True)

    mats: dict[float, np.ndarray] = {}
    spectra: dict[float, np.ndarray] = {}

    def mat(lam):
        if lam not in mats:
            A = fam.matrix(lam)
            if M is not None:
                A = Linv @ A @ Linv.conj().T
                A = (A + A.conj().T) / 2
            mats[lam] = A
        return mats[lam]

    def eigs(lam):
        if lam not in spectra:
            spectra[lam] = np.linalg.eigvalsh(mat(lam))
        return spectra[lam]

    def norm2_bound(A):
        return float(np.sqrt(np.linalg.norm(A, 1) * np.linalg.norm(A, np.inf)))

    def count_in_window(ev, a):
        # the window [0, a] includes an exact kernel; allow for roundoff at 0
        fuzz = 1e-10 * max(1.0, float(np.max(np.abs(ev), initial=0.0)))
        return int(np.sum((ev >= -fuzz) & (ev <= a)))

    total = 0

    def flow(l0, l1, depth):
        nonlocal total
        e0, e1 = eigs(l0), eigs(l1)
        # Weyl bound on excursions inside the subinterval, sampled through the
        # midpoint (the family is assumed smooth in lambda)
        Am, A0, A1 = mat((l0 + l1) / 2), mat(l0), mat(l1)
        move = 1.5 * max(norm2_bound(Am - A0), norm2_bound(A1 - Am),
                         0.5 * norm2_bound(A1 - A0))
        mags = np.sort(np.abs(np.concatenate([e0, e1])))
        gaps = np.concatenate([mags, [mags[-1] + 4 * move + 1.0]])
        a = None
        lo = 0.0
        for g in gaps:
            if g - lo > 4 * move + 1e-13:
                a = (g + lo) / 2
                break
            lo = max(lo, g)
        if a is None:
            if depth > 40:
                raise UnresolvableDegeneracy("cannot separate eigenvalue clusters")
            lm = (l0 + l1) / 2
            flow(l0, lm, depth + 1)
            flow(lm, l1, depth + 1)
            return
        total += count_in_window(e1, a) - count_in_window(e0, a)

    grid = np.linspace(0.0, 1.0, coarse)
    for (l0, l1) in zip(grid[:-1], grid[1:]):
        flow(l0, l1, 0)
    return total


def _crossing_contributions(fam: HermitianFamily, tol: Tolerances):
    """Locate sign-change crossings by inertia bisection; return contributions."""
    M = fam.M
    null = _null_scale(fam, tol)

    def n_minus(lam):
        return _count_below(fam.matrix(lam), M, 0.0)

    def nullity(lam):
        lo = _count_below(fam.matrix(lam), M, -null)
        hi = _count_below(fam.matrix(lam), M, +null)
        return hi - lo

    def form_signature(lam):
        V = fam.kernel_basis(lam, null)
        if V.shape[1] == 0:
            return (0, 0, 0), 0
        G = V.conj().T @ fam.derivative(lam) @ V
        G = (G + G.conj().T) / 2
        ev = np.linalg.eigvalsh(G)
        cut = 1e-8 * max(1.0, float(np.max(np.abs(ev), initial=0.0)))
        np_, nm = int(np.sum(ev > cut)), int(np.sum(ev < -cut))
        return (np_, nm, len(ev) - np_ - nm), V.shape[1]

    records = []
    # endpoints
    for lam, tag in ((0.0, "a"), (1.0, "b")):
        if nullity(lam) > 0:
            sig, dim = form_signature(lam)
            records.append({"lam": lam, "endpoint": tag, "signature": sig, "dim": dim})

    # interior: bisect every inertia change
    grid = list(np.linspace(0.0, 1.0, 65))
    vals = {l: n_minus(l) for l in grid}
    stack = [(grid[i], grid[i + 1]) for i in range(len(grid) - 1)
             if vals[grid[i]] != vals[grid[i + 1]]]
    for (lo, hi) in stack:
        a, b = lo, hi
        na, nb = vals.get(a) or n_minus(a), vals.get(b) or n_minus(b)
        while b - a > 1e-9:
            mid = (a + b) / 2
            nm = n_minus(mid)
            if nm != na:
                b, nb = mid, nm
            else:
                a, na = mid, nm
        lam0 = (a + b) / 2
        if lam0 < 1e-8 or lam0 > 1 - 1e-8:
            continue  # endpoint records already account for it
        sig, dim = form_signature(lam0)
        records.append({"lam": lam0, "endpoint": None, "signature": sig, "dim": dim,
                        "jump": nb - na})
    records.sort(key=lambda r: r["lam"])
    return records


def spectral_flow(fam: HermitianFamily, tol: Tolerances = DEFAULT,
                  method: str = "crossing", return_records: bool = False):
    """Spectral flow of the family on [0, 1]."""
    if method == "counting":
        val = spectral_flow_counting(fam, tol)
        return (val, []) if return_records else val

    records = _crossing_contributions(fam, tol)
    degenerate = any(r["signature"][2] > 0
                     or (r["endpoint"] is None and sum(r["signature"][:2]) != r["dim"])
                     or (r["endpoint"] is None
                         and r["signature"][0] - r["signature"][1] != -r.get("jump", 0))
                     for r in records)
    if degenerate:
        # regularise with small positive identity shifts; accept on agreement
        shifts = np.geomspace(tol.shift_min, tol.shift_max, 6)
        scale = max(1.0, np.linalg.norm(fam.matrix(0.0), np.inf),
                    np.linalg.norm(fam.matrix(1.0), np.inf))
        prev = None
        for s in shifts:
            Ms = fam.M if fam.M is not None else np.eye(fam.matrix(0.0).shape[0])
            shifted = HermitianFamily(
                K=lambda lam, s=s: fam.matrix(lam) + s * scale * Ms,
                M=fam.M, dK=fam.dK)
            val = spectral_flow_counting(shifted, tol)
            if prev is not None and val == prev:
                return (val, records) if return_records else val
            prev = val
        raise UnresolvableDegeneracy("identity shifts did not stabilise the flow")

    val = 0
    for r in records:
        n_plus, n_minus, _ = r["signature"]
        if r["endpoint"] == "a":
            val -= n_minus
        elif r["endpoint"] == "b":
            val += n_plus
        else:
            val += n_plus - n_minus
    return (val, records) if return_records else val


def relative_morse_index(A: np.ndarray, B: np.ndarray,
                         tol: Tolerances = DEFAULT,
                         path: Callable[[float], float] | None = None) -> int:
    """Relative Morse index of the pair (A, A+B): minus the flow of A + s(lambda) B."""
    A = np.asarray(A)
    B = np.asarray(B)
    s = path or (lambda lam: lam)
    fam = HermitianFamily(K=lambda lam: A + s(lam) * B,
                          dK=None if path else (lambda lam: B))
    return -spectral_flow(fam, tol)
