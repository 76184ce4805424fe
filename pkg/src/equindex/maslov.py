"""Maslov intersection index of continuous Lagrangian paths.

The index of a path ``l(t)`` against a fixed Lagrangian ``L0`` on ``[a, b]``
is computed from crossing forms with the endpoint convention

    index = n_plus[Gamma(a)] + sum over interior crossings of sgn Gamma(t0)
            - n_minus[Gamma(b)],

where ``Gamma`` is the quadratic form ``Q[v] = d/dt omega(v, w(t))`` on the
intersection, built from a fixed Lagrangian complement.  Crossing instants
are the eigenvalue-one instants of the unitary representative
``W(t) = F(l(t)) F(L0)^{-1}``; a positive crossing form corresponds to the
eigenvalue phase increasing through 1.

Degenerate crossings are handled by the rotation device: multiplying
``W`` by ``e^{-i delta}`` moves the count to the signed passages of the
eigenvalue phases through the angle ``delta > 0``, and the integer is
accepted once two consecutive sweep values of ``delta`` agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT, Tolerances
from .errors import NonIsolatedCrossing, NotSymplectic, UnresolvableDegeneracy
from .linalg import (
    SymplecticStructure,
    intersection_basis,
    omega_gram,
    orthonormal_frame,
    symplectic_residual,
    unitary_of_lagrangian,
)

__all__ = ["LagrangianPath", "CrossingRecord", "find_crossings", "maslov_clm",
           "maslov_pair", "maslov_relative_pair"]


@dataclass
class LagrangianPath:
    """A sampled path of Lagrangian frames; the sampler must be deterministic."""

    sampler: Callable[[float], np.ndarray]
    a: float
    b: float
    structure: SymplecticStructure
    grid: int = 257

    def frame(self, t: float) -> np.ndarray:
        return self.sampler(float(t))

    def times(self, n: int | None = None) -> np.ndarray:
        return np.linspace(self.a, self.b, n or self.grid)

    def restricted(self, a: float, b: float) -> "LagrangianPath":
        return LagrangianPath(self.sampler, a, b, self.structure, self.grid)

    @classmethod
    def from_samples(cls, frames: Sequence[np.ndarray], interval: tuple[float, float],
                     structure: SymplecticStructure, grid: int | None = None) -> "LagrangianPath":
        """Interpolate sampled frames along unitary geodesics."""
        a, b = interval
        ts = np.linspace(a, b, len(frames))
        reps = [unitary_of_lagrangian(f, structure) for f in frames]
        logs = []
        for U0, U1 in zip(reps[:-1], reps[1:]):
            evals, evecs = np.linalg.eig(np.linalg.inv(U0) @ U1)
            logs.append((evecs, np.angle(evals)))

        from .linalg import frame_of_unitary

        def sampler(t: float) -> np.ndarray:
            s = np.clip((t - a) / (b - a) * (len(frames) - 1), 0, len(frames) - 1)
            i = min(int(s), len(frames) - 2)
            frac = s - i
            evecs, ang = logs[i]
            step = evecs @ np.diag(np.exp(1j * frac * ang)) @ np.linalg.inv(evecs)
            return frame_of_unitary(reps[i] @ step, structure)

        return cls(sampler, a, b, structure, grid or max(129, 16 * len(frames)))


@dataclass
class CrossingRecord:
    t: float
    dim: int
    form: np.ndarray
    signature: tuple[int, int, int]      # (n_plus, n_minus, n_zero)
    degenerate: bool = False
    endpoint: str | None = None          # "a", "b" or None
    eigs: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _unitary_rep(path: LagrangianPath, L0: np.ndarray):
    U0inv = np.linalg.inv(unitary_of_lagrangian(L0, path.structure))

    def W(t: float) -> np.ndarray:
        return unitary_of_lagrangian(path.frame(t), path.structure) @ U0inv

    return W


def _gap(W: np.ndarray) -> float:
    """Distance of the spectrum of a unitary matrix to the point 1."""
    return float(np.min(np.abs(np.linalg.eigvals(W) - 1.0)))


def _crossing_form(path: LagrangianPath, t0: float, basis: np.ndarray,
                   h: float, tol: Tolerances) -> tuple[np.ndarray, bool]:
    """Crossing form on the given intersection basis by central differences.

    Returns the (Hermitised) form matrix and a degeneracy flag from the
    Richardson step-halving comparison.
    """
    J = path.structure.J
    Z0 = orthonormal_frame(path.frame(t0))
    comp = orthonormal_frame(J @ Z0)     # J L is always a Lagrangian complement of L

    def w_coords(t: float) -> np.ndarray:
        # component of each basis vector along the complement, following l(t)
        A = np.hstack([orthonormal_frame(path.frame(t)), comp])
        coef = np.linalg.solve(A, basis)
        return -comp @ coef[Z0.shape[1]:, :]

    def form_at(step: float) -> np.ndarray:
        lo = max(path.a, t0 - step)
        hi = min(path.b, t0 + step)
        G = (omega_gram(J, basis, w_coords(hi)) - omega_gram(J, basis, w_coords(lo))) / (hi - lo)
        return (G + G.conj().T) / 2

    G1 = form_at(h)
    G2 = form_at(h / 2)
    G = (4 * G2 - G1) / 3
    scale = max(np.linalg.norm(G), 1e-30)
    e1 = np.sort(np.linalg.eigvalsh(G1))
    e2 = np.sort(np.linalg.eigvalsh(G2))
    shaky = bool(np.max(np.abs(e1 - e2)) > tol.form_disagree * max(1.0, scale) * 100)
    return G, shaky


def _signature(G: np.ndarray, tol: Tolerances) -> tuple[int, int, int]:
    ev = np.linalg.eigvalsh(G)
    cut = tol.form_disagree * max(1.0, float(np.max(np.abs(ev), initial=0.0)))
    n_plus = int(np.sum(ev > cut))
    n_minus = int(np.sum(ev < -cut))
    return n_plus, n_minus, len(ev) - n_plus - n_minus


def find_crossings(path: LagrangianPath, L0: np.ndarray,
                   tol: Tolerances = DEFAULT) -> list[CrossingRecord]:
    """Locate all isolated intersections of the path with L0.

    Raises ``NonIsolatedCrossing`` when the intersection dimension stays
    positive across several grid points (the path is not regular).
    """
    W = _unitary_rep(path, L0)
    ts = path.times()
    gaps = np.array([_gap(W(t)) for t in ts])

    if np.all(gaps <= tol.cross_eig_tol):
        raise NonIsolatedCrossing("intersection dimension constant over the whole interval")
    run = 0
    for g in gaps:
        run = run + 1 if g <= tol.cross_eig_tol else 0
        if run >= 3:
            raise NonIsolatedCrossing("intersection persists over a subinterval")

    candidates: list[float] = []
    if gaps[0] < 0.5:
        candidates.append(ts[0])
    if gaps[-1] < 0.5:
        candidates.append(ts[-1])
    for i in range(1, len(ts) - 1):
        if gaps[i] <= gaps[i - 1] and gaps[i] <= gaps[i + 1] and gaps[i] < 0.5:
            res = minimize_scalar(lambda t: _gap(W(t)), bounds=(ts[i - 1], ts[i + 1]),
                                  method="bounded",
                                  options={"xatol": tol.tol_cross, "maxiter": tol.max_bisect})
            candidates.append(float(res.x))

    span = path.b - path.a
    records: list[CrossingRecord] = []
    seen: list[float] = []
    for t0 in sorted(candidates):
        if any(abs(t0 - s) < 10 * tol.tol_cross + 1e-14 * span for s in seen):
            continue
        g0 = _gap(W(t0))
        if g0 > tol.cross_eig_tol:
            continue
        seen.append(t0)
        endpoint = None
        if abs(t0 - path.a) <= max(10 * tol.tol_cross, 1e-12 * span):
            t0, endpoint = path.a, "a"
        elif abs(t0 - path.b) <= max(10 * tol.tol_cross, 1e-12 * span):
            t0, endpoint = path.b, "b"
        lam = np.linalg.eigvals(W(t0))
        dim_u = int(np.sum(np.abs(lam - 1.0) <= tol.cross_ambiguous_tol))
        basis = intersection_basis(path.frame(t0), L0, angle_tol=tol.cross_ambiguous_tol)
        dim = basis.shape[1]
        G, shaky = _crossing_form(path, t0, basis, tol.form_step * span, tol)
        sig = _signature(G, tol)
        degenerate = shaky or sig[2] > 0 or dim != dim_u
        records.append(CrossingRecord(t=t0, dim=dim, form=G, signature=sig,
                                      degenerate=degenerate, endpoint=endpoint,
                                      eigs=np.sort(np.linalg.eigvalsh(G))))
    return records


# ---------------------------------------------------------------------------
# eigenphase winding: the rotation-perturbation count

def _match_cyclic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Match two sorted phase vectors by the best cyclic shift."""
    m = len(a)
    best, best_cost = 0, np.inf
    for s in range(m):
        d = np.angle(np.exp(1j * (np.roll(b, -s) - a)))
        cost = float(np.sum(np.abs(d)))
        if cost < best_cost:
            best, best_cost = s, cost
    return np.roll(b, -best)


def _signed_passages(alpha: np.ndarray, beta: np.ndarray, delta: float) -> int:
    """Signed count of phase passages through the ray angle delta."""
    total = 0
    move = np.angle(np.exp(1j * (beta - alpha)))
    for a, d in zip(alpha, move):
        if d > 0:
            u = np.mod(delta - a, 2 * np.pi)
            if 0 < u <= d:
                total += 1
        elif d < 0:
            u = np.mod(a - delta, 2 * np.pi)
            if 0 <= u < -d:
                total -= 1
    return total


def _winding_count(Wfun, a: float, b: float, delta: float, grid: int) -> int:
    """Signed passages of the eigenphases of W(t) through e^{i delta} on [a, b]."""
    ts = list(np.linspace(a, b, grid))
    phases = {t: np.sort(np.angle(np.linalg.eigvals(Wfun(t)))) for t in ts}

    def count(t0, t1, p0, p1, depth) -> int:
        p1m = _match_cyclic(p0, p1)
        move = np.angle(np.exp(1j * (p1m - p0)))
        if np.max(np.abs(move)) > 0.5 and depth < 16:
            tm = (t0 + t1) / 2
            pm = np.sort(np.angle(np.linalg.eigvals(Wfun(tm))))
            return count(t0, tm, p0, pm, depth + 1) + count(tm, t1, pm, p1, depth + 1)
        return _signed_passages(p0, p1m, delta)

    total = 0
    for t0, t1 in zip(ts[:-1], ts[1:]):
        total += count(t0, t1, phases[t0], phases[t1], 0)
    return total


def _perturbed_index(path: LagrangianPath, L0: np.ndarray, tol: Tolerances) -> int:
    """Index by the delta sweep; accepted when two consecutive values agree."""
    W = _unitary_rep(path, L0)
    # irrational multiplier keeps the ray off symmetric eigenphase spots
    deltas = tol.delta_min * (np.sqrt(10.0) ** np.arange(0, 15)) * 1.0413
    deltas = deltas[deltas <= tol.delta_max * 10]
    prev = None
    for d in deltas:
        val = _winding_count(W, path.a, path.b, float(d), path.grid)
        if prev is not None and val == prev:
            return val
        prev = val
    raise UnresolvableDegeneracy("rotation sweep did not stabilise the index")


def maslov_clm(L0: np.ndarray, path: LagrangianPath, tol: Tolerances = DEFAULT,
               method: str = "crossing", return_records: bool = False):
    """Maslov index of the path with respect to L0.

    ``method="crossing"`` uses crossing forms and falls back to the rotation
    perturbation when a crossing is degenerate; ``method="perturbation"``
    uses the rotation sweep directly.  A path whose intersection dimension
    is constant and positive on a subinterval raises ``NonIsolatedCrossing``.
    """
    if method == "perturbation":
        idx = _perturbed_index(path, L0, tol)
        return (idx, []) if return_records else idx

    records = find_crossings(path, L0, tol)
    if any(r.degenerate for r in records):
        idx = _perturbed_index(path, L0, tol)
        return (idx, records) if return_records else idx

    idx = 0
    for r in records:
        n_plus, n_minus, _ = r.signature
        if r.endpoint == "a":
            idx += n_plus
        elif r.endpoint == "b":
            idx -= n_minus
        else:
            idx += n_plus - n_minus
    return (idx, records) if return_records else idx


def maslov_pair(path1: LagrangianPath, path2: LagrangianPath,
                tol: Tolerances = DEFAULT, method: str = "crossing") -> int:
    """Index of two moving Lagrangian paths, via the product path against the diagonal."""
    if (path1.a, path1.b) != (path2.a, path2.b):
        raise ValueError("paths must share the parameter interval")
    st = path1.structure
    d = st.dim
    from .linalg import doubled_J
    st2 = SymplecticStructure(doubled_J(st.J))

    def sampler(t: float) -> np.ndarray:
        F1 = path1.frame(t)
        F2 = path2.frame(t)
        top = np.hstack([F1, np.zeros((d, F2.shape[1]))])
        bot = np.hstack([np.zeros((d, F1.shape[1])), F2])
        return np.vstack([top, bot])

    diag = np.vstack([np.eye(d), np.eye(d)])
    prod = LagrangianPath(sampler, path1.a, path1.b, st2,
                          grid=max(path1.grid, path2.grid))
    return maslov_clm(diag, prod, tol, method=method)


def maslov_relative_pair(L0: np.ndarray, path: LagrangianPath,
                         phi: Callable[[float], np.ndarray],
                         tol: Tolerances = DEFAULT) -> tuple[int, int]:
    """Both sides of the symplectic-invariance property, computed independently.

    Returns ``(index of (L0, l), index of (phi L0, phi l))`` where the second
    entry is the two-path index of the transformed pair.  ``phi(t)`` must be
    symplectic for every t.
    """
    st = path.structure
    for t in np.linspace(path.a, path.b, 7):
        if symplectic_residual(np.asarray(phi(t), dtype=complex), st.J) > tol.tol_sympl * 100:
            raise NotSymplectic("phi(t) is not symplectic")

    lhs = maslov_clm(L0, path, tol)
    base = LagrangianPath(lambda t: np.asarray(phi(t), dtype=complex) @ L0,
                          path.a, path.b, st, path.grid)
    moved = LagrangianPath(lambda t: np.asarray(phi(t), dtype=complex) @ path.frame(t),
                           path.a, path.b, st, path.grid)
    rhs = maslov_pair(base, moved, tol)
    return lhs, rhs
