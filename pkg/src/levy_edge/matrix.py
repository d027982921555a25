"""Finite Levy matrices: sampling, resolvents, eigenvector statistics and a
localization diagnostic.

H is N x N real symmetric with independent entries N**(-1/alpha) X on and
above the diagonal, X symmetric alpha-stable of unit scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from .stable import ConvergenceError, StableParams, sample_stable

__all__ = [
    "LevyMatrix",
    "SpectralSample",
    "PhaseRow",
    "PhaseReport",
    "sample_matrix",
    "resolvent",
    "resolvent_diag",
    "spectral_resolvent_diag",
    "householder_tridiagonal",
    "tridiagonal_ql",
    "householder_eigh",
    "spectral_sample",
    "ipr",
    "phase_diagnostic",
]


@dataclass(frozen=True)
class LevyMatrix:
    N: int
    alpha: float
    entries: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SpectralSample:
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.eigenvalues)

    def participation(self, interval: tuple[float, float]) -> np.ndarray:
        """P_I(j) for every site j."""
        lo, hi = interval
        inside = (self.eigenvalues >= lo) & (self.eigenvalues <= hi)
        count = int(inside.sum())
        if count == 0:
            raise ValueError(f"no eigenvalues in [{lo}, {hi}]")
        return self.N / count * np.sum(self.eigenvectors[:, inside] ** 2, axis=1)


def _as_array(H) -> np.ndarray:
    return H.entries if isinstance(H, LevyMatrix) else np.asarray(H)


def sample_matrix(N: int, alpha: float, seed=None) -> LevyMatrix:
    if N < 2:
        raise ValueError("N must be at least 2")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    iu = np.triu_indices(N)
    values = sample_stable(StableParams(alpha, 1.0, 0.0), len(iu[0]), seed) * N ** (-1.0 / alpha)
    H = np.zeros((N, N))
    H[iu] = values
    H = H + np.triu(H, 1).T
    return LevyMatrix(N=N, alpha=alpha, entries=H)


def resolvent(H, z: complex) -> np.ndarray:
    """(H - z)**-1 by a symmetric (LDL) factorization."""
    A = _as_array(H)
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("spectral parameter must have positive imaginary part")
    n = A.shape[0]
    return linalg.solve(A - z * np.eye(n), np.eye(n, dtype=complex), assume_a="sym")


def _check_half_plane(g: np.ndarray, z: complex) -> np.ndarray:
    bound = 1.0 / z.imag
    slack = 1e-8 * bound
    if np.any(g.imag < -slack) or np.any(np.abs(g) > bound * (1 + 1e-8)):
        raise ConvergenceError("resolvent diagonal left the admissible region; system is ill-conditioned")
    return g


def resolvent_diag(H, z: complex) -> np.ndarray:
    z = complex(z)
    return _check_half_plane(np.diagonal(resolvent(H, z)).copy(), z)


def spectral_resolvent_diag(sample: SpectralSample, z) -> np.ndarray:
    """G_jj(z) from an eigendecomposition; ``z`` may be an array, giving one column per value."""
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    weights = sample.eigenvectors**2
    out = weights @ (1.0 / (sample.eigenvalues[:, None] - zs[None, :]))
    return out[:, 0] if np.ndim(z) == 0 else out


# ---------------------------------------------------------------------------
# Householder reduction and implicit QL, for cross-checking LAPACK


def householder_tridiagonal(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Q, diagonal d and off-diagonal e with A = Q T Q^T, T tridiagonal."""
    A = np.array(_as_array(A), dtype=float)
    n = A.shape[0]
    Q = np.eye(n)
    for k in range(n - 2):
        x = A[k + 1:, k]
        norm = np.linalg.norm(x)
        if norm == 0:
            continue
        v = x.copy()
        v[0] += math.copysign(norm, x[0])
        v /= np.linalg.norm(v)
        # A <- P A P with P = I - 2 v v^T acting on rows/columns k+1..
        A[k + 1:, :] -= 2.0 * np.outer(v, v @ A[k + 1:, :])
        A[:, k + 1:] -= 2.0 * np.outer(A[:, k + 1:] @ v, v)
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v)
    return Q, np.diagonal(A).copy(), np.diagonal(A, 1).copy()


def tridiagonal_ql(d, e, Z=None, *, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric tridiagonal matrix by QL with implicit Wilkinson shifts.

    ``e[i]`` couples rows i and i+1.  Rotations are applied to the columns
    of ``Z`` (identity by default), so passing the Householder Q yields
    eigenvectors of the original matrix.
    """
    d = np.array(d, dtype=float)
    n = len(d)
    off = np.zeros(n)
    off[: n - 1] = e
    Z = np.eye(n) if Z is None else np.array(Z, dtype=float)
    eps = np.finfo(float).eps
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                if abs(off[m]) <= eps * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise ConvergenceError("QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * off[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + off[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * off[i]
                b = c * off[i]
                r = math.hypot(f, g)
                off[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    off[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col = Z[:, i + 1].copy()
                Z[:, i + 1] = s * Z[:, i] + c * col
                Z[:, i] = c * Z[:, i] - s * col
            if underflow:
                continue
            d[l] -= p
            off[l] = g
            off[m] = 0.0
    order = np.argsort(d)
    return d[order], Z[:, order]


def householder_eigh(A) -> tuple[np.ndarray, np.ndarray]:
    Q, d, e = householder_tridiagonal(A)
    return tridiagonal_ql(d, e, Q)


def spectral_sample(H, *, solver: str = "lapack") -> SpectralSample:
    """Eigendecomposition of H; ``solver="householder"`` uses the in-house routine."""
    A = _as_array(H)
    if solver == "lapack":
        vals, vecs = np.linalg.eigh(A)
    elif solver == "householder":
        vals, vecs = householder_eigh(A)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return SpectralSample(eigenvalues=vals, eigenvectors=vecs)


def ipr(sample: SpectralSample, interval: tuple[float, float], s: float) -> tuple[float, float]:
    """(Q_I, Q_I(s)) with Q_I(s) = N**-1 sum_j P_I(j)**s and Q_I = Q_I(2)."""
    P = sample.participation(interval)
    return float(np.mean(P**2)), float(np.mean(P**s))


# ---------------------------------------------------------------------------
# localization diagnostic


@dataclass(frozen=True)
class PhaseRow:
    E: float
    etas: tuple[float, ...]
    median_im_g: tuple[float, ...]
    widths: tuple[float, ...]
    q_values: tuple[float, ...]
    drop: float
    q_slope: float
    label: str
    q_label: str = "undetermined"
    predicted: str | None = None
    # per replica and eta: median over sites of Im G_jj, and Q_I(2), Q_I(s/2) on [E - eta, E + eta]
    rep_median_im_g: tuple = field(default=(), repr=False)
    rep_q2: tuple = field(default=(), repr=False)
    rep_q_half_s: tuple = field(default=(), repr=False)

    @property
    def agrees(self) -> bool | None:
        if self.predicted is None or self.label == "undetermined":
            return None
        return self.label == self.predicted

    @property
    def q_agrees(self) -> bool | None:
        if self.predicted is None or self.q_label == "undetermined":
            return None
        return self.q_label == self.predicted


@dataclass(frozen=True)
class PhaseReport:
    alpha: float
    N: int
    reps: int
    rows: tuple[PhaseRow, ...]
    E_mob: float | None = None
    window: float = 0.0

    def scored(self) -> list[PhaseRow]:
        """Rows with a prediction, outside the window around E_mob."""
        out = []
        for row in self.rows:
            if row.predicted is None:
                continue
            if self.E_mob is not None and abs(abs(row.E) - self.E_mob) < self.window * self.E_mob:
                continue
            out.append(row)
        return out

    @property
    def agreement(self) -> float:
        rows = self.scored()
        if not rows:
            return math.nan
        return sum(bool(r.agrees) for r in rows) / len(rows)

    @property
    def q_agreement(self) -> float:
        rows = self.scored()
        if not rows:
            return math.nan
        return sum(bool(r.q_agrees) for r in rows) / len(rows)


def _classify(drop: float, localized_drop: float, stable_drop: float) -> str:
    if drop >= localized_drop:
        return "localized"
    if drop < stable_drop:
        return "delocalized"
    return "undetermined"


def _classify_slope(slope: float, slope_cut: float) -> str:
    if not math.isfinite(slope):
        return "undetermined"
    return "localized" if slope >= slope_cut else "delocalized"


def phase_diagnostic(alpha: float, E_list: Sequence[float], N: int, eta_ladder: Sequence[float],
                     reps: int, seed=None, *, widths: Sequence[float] = (0.5, 0.25, 0.125),
                     s: float = 0.5, lambda_fn=None, E_mob: float | None = None, window: float = 0.25,
                     localized_drop: float = 10.0, stable_drop: float = 2.0,
                     slope_cut: float = 0.5) -> PhaseReport:
    """Classify each energy from the eta dependence of the median Im G_jj.

    ``drop`` is the ratio of median Im G_jj between the two smallest etas of
    the ladder: ``label`` is localized when it reaches ``localized_drop``,
    delocalized below ``stable_drop`` and undetermined in between.  Q_I is
    averaged over replicas on [E - w, E + w] for each half-width w, and
    ``q_slope`` is the fitted exponent of Q_I against 1/|I| (about 0 when
    delocalized, 1 when localized); ``q_label`` cuts it at ``slope_cut``.
    ``lambda_fn(E)``, when given, supplies the prediction
    lambda(E) > 1 -> delocalized.  Per replica the row also keeps the site
    median of Im G_jj and Q_I(2), Q_I(s/2) on [E - eta, E + eta] (nan when
    that interval holds no eigenvalue).
    """
    etas = tuple(sorted(float(e) for e in eta_ladder))[::-1]
    if len(etas) < 2:
        raise ValueError("eta ladder needs at least two values")
    if not E_list:
        raise ValueError("energy list is empty")
    rng = np.random.default_rng(seed)
    samples = [spectral_sample(sample_matrix(N, alpha, rng)) for _ in range(reps)]
    rows = []
    for E in E_list:
        zs = np.array([E + 1j * eta for eta in etas])
        per_rep = [spectral_resolvent_diag(sm, zs).imag for sm in samples]
        med = np.median(np.concatenate(per_rep, axis=0), axis=0)
        rep_med = tuple(tuple(map(float, np.median(im, axis=0))) for im in per_rep)
        rep_q2, rep_qs = [], []
        for sm in samples:
            q2_row, qs_row = [], []
            for eta in etas:
                if np.any(np.abs(sm.eigenvalues - E) <= eta):
                    q2, qh = ipr(sm, (E - eta, E + eta), 0.5 * s)
                else:
                    q2 = qh = math.nan
                q2_row.append(q2)
                qs_row.append(qh)
            rep_q2.append(tuple(q2_row))
            rep_qs.append(tuple(qs_row))
        qs = []
        for w in widths:
            vals = [ipr(sm, (E - w, E + w), 2.0)[0] for sm in samples
                    if np.any(np.abs(sm.eigenvalues - E) <= w)]
            qs.append(float(np.mean(vals)) if vals else math.nan)
        good = np.isfinite(qs)
        if good.sum() >= 2:
            slope = float(np.polyfit(np.log(1.0 / np.asarray(widths)[good]), np.log(np.asarray(qs)[good]), 1)[0])
        else:
            slope = math.nan
        drop = float(med[-2] / med[-1]) if med[-1] > 0 else math.inf
        predicted = None
        if lambda_fn is not None:
            predicted = "delocalized" if lambda_fn(E) > 1.0 else "localized"
        rows.append(PhaseRow(E=float(E), etas=etas, median_im_g=tuple(map(float, med)),
                             widths=tuple(map(float, widths)), q_values=tuple(qs), drop=drop,
                             q_slope=slope, label=_classify(drop, localized_drop, stable_drop),
                             q_label=_classify_slope(slope, slope_cut),
                             predicted=predicted, rep_median_im_g=rep_med,
                             rep_q2=tuple(rep_q2), rep_q_half_s=tuple(rep_qs)))
    return PhaseReport(alpha=alpha, N=N, reps=reps, rows=tuple(rows), E_mob=E_mob, window=window)
