"""The transfer operator T and its Perron eigenvalue, computed on a grid.

T acts on functions of one real variable and has rank two:

    T f = I1(f) F1 + I2(f) F2,
    I1(f) = (alpha/2) int_{y > -E} f(y) |E + y|**(-(s+alpha)/2) dy,   I2 likewise over y < -E,
    F1(x) = int_0^inf u**((s-alpha)/2 - 1) p(x + u) du,              F2 with x - u,

where p is the density of kappa_loc at the boundary pair.  Its Perron
eigenvalue is the largest eigenvalue of the 2x2 pairing matrix [I_i(F_j)].
Everything here is built from the density of kappa_loc alone, so it is an
independent check on the closed-form lambda_s of the edge module.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from .edge import edge_constants, solve_ab
from .rde import BoundaryPair, kappa_loc_params
from .stable import ConvergenceError, StableParams, stable_density

__all__ = [
    "TransferKernel",
    "build_kernel",
    "perron_rank2",
    "perron_grid",
    "ell_pairing_matrix",
    "apply_kernel",
    "write_eigenfunction",
]

# log10 range of the grids; the pairing integrands decay like |y|**(-1-alpha)
_LOG_MIN, _LOG_MAX = -14.0, 42.0


@dataclass(frozen=True)
class TransferKernel:
    E: float
    s: float
    alpha: float
    x: np.ndarray = field(repr=False)
    F1: np.ndarray = field(repr=False)
    F2: np.ndarray = field(repr=False)
    # quadrature weights with the pairing factor folded in: I_i(f) = pair_i @ f(x)
    pair1: np.ndarray = field(repr=False)
    pair2: np.ndarray = field(repr=False)
    I1_of_F1: float = 0.0
    I1_of_F2: float = 0.0
    I2_of_F1: float = 0.0
    I2_of_F2: float = 0.0

    @property
    def pairing(self) -> np.ndarray:
        """Matrix M with T(c1 F1 + c2 F2) = (M c)_1 F1 + (M c)_2 F2."""
        return np.array([[self.I1_of_F1, self.I1_of_F2], [self.I2_of_F1, self.I2_of_F2]])

    def weight(self, x=None) -> np.ndarray:
        """Norm weight 1 + |x|**((alpha-s)/2 + 1)."""
        x = self.x if x is None else np.asarray(x, dtype=float)
        return 1.0 + np.abs(x) ** (0.5 * (self.alpha - self.s) + 1.0)


@lru_cache(maxsize=16)
def _jacobi(order: int, power: float) -> tuple[np.ndarray, np.ndarray]:
    return special.roots_jacobi(order, 0.0, power)


def _singular_rule(breaks: np.ndarray, power: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for int_0^inf g(d) d**power dd over the given breaks.

    ``breaks`` starts at 0; the first panel uses Gauss-Jacobi so the endpoint
    singularity is integrated exactly, later panels use Gauss-Legendre.
    """
    xj, wj = _jacobi(order, float(power))
    first = breaks[1]
    nodes0 = 0.5 * first * (xj + 1.0)
    weights0 = wj * (0.5 * first) ** (1.0 + power)
    xg, wg = np.polynomial.legendre.leggauss(order)
    lo, hi = breaks[1:-1, None], breaks[2:, None]
    half = 0.5 * (hi - lo)
    nodes1 = (lo + half * (xg[None, :] + 1.0)).ravel()
    weights1 = (half * wg[None, :]).ravel() * nodes1**power
    return np.concatenate([nodes0, nodes1]), np.concatenate([weights0, weights1])


def _breaks(per_decade: int, peak: float | None) -> np.ndarray:
    """Geometric breaks on (0, 10**_LOG_MAX], refined around ``peak``."""
    count = int(round((_LOG_MAX - _LOG_MIN) * per_decade))
    pts = [np.zeros(1), np.logspace(_LOG_MIN, _LOG_MAX, count + 1)]
    if peak is not None and peak > 0:
        j = 2.0 ** -np.arange(1, 46)
        pts.append(peak * np.concatenate([1.0 - j, [1.0], 1.0 + j]))
    return np.unique(np.concatenate(pts))


def _breaks_to(top: float, per_decade: int) -> np.ndarray:
    """Geometric breaks on (0, top]."""
    log_top = math.log10(top)
    if log_top <= _LOG_MIN:
        return np.array([0.0, top])
    count = max(int(math.ceil((log_top - _LOG_MIN) * per_decade)), 1)
    return np.concatenate([[0.0], np.logspace(_LOG_MIN, log_top, count + 1)])


class _DensityTable:
    """Density of kappa_loc interpolated in log|kappa| on each half-line."""

    def __init__(self, law: StableParams, per_decade: int):
        self.law = law
        logs = np.linspace(_LOG_MIN, _LOG_MAX + 1.0, int((_LOG_MAX + 1.0 - _LOG_MIN) * per_decade) + 1)
        mags = 10.0**logs
        self.zero = float(stable_density(law, 0.0)[0])
        self.splines = {}
        for sign in (1.0, -1.0):
            dens = stable_density(law, sign * mags)
            if np.any(dens <= 0):
                raise ConvergenceError("density of kappa underflowed on the grid")
            self.splines[sign] = CubicSpline(logs, np.log(dens))
        self.top = 10.0 ** (_LOG_MAX + 1.0)

    def __call__(self, k: np.ndarray, sign: float = 1.0) -> np.ndarray:
        """Density at ``sign * k``."""
        out = np.full(k.shape, self.zero)
        mag = np.abs(k)
        for side in (1.0, -1.0):
            sel = (np.sign(k) * sign == side) & (mag > 10.0**_LOG_MIN)
            if sel.any():
                # past the table the power tail rho * c * |k|**(-1-rho) takes over
                inside = sel & (mag <= self.top)
                out[inside] = np.exp(self.splines[side](np.log10(mag[inside])))
                beyond = sel & (mag > self.top)
                if beyond.any():
                    rho = self.law.index
                    c = self.law.scale**rho * 0.5 * (1.0 + side * self.law.skewness)
                    out[beyond] = rho * c * mag[beyond] ** (-1.0 - rho)
        return out


def _half_line_integral(density: _DensityTable, sign: float, x: float, power: float,
                        per_decade: int, order: int, base) -> float:
    """int_0^inf u**power q(x + u) du for q(k) = density(sign * k).

    When x < 0 the bulk of q sits at u = -x, which for large |x| cannot be
    resolved in the variable u.  The range u > -x/2 is then integrated in
    kappa = x + u instead, where (kappa - x)**power is smooth.
    """
    if x >= 0:
        u, w = base[power]
        return float(w @ density(x + u, sign))
    h = -x
    u, w = _singular_rule(_breaks_to(0.5 * h, per_decade), power, order)
    near = w @ density(x + u, sign)
    t, wt = _singular_rule(_breaks_to(0.5 * h, per_decade), 0.0, order)
    left = wt @ ((h - t) ** power * density(-t, sign))
    k, wk = base[0.0]
    right = wk @ ((h + k) ** power * density(k, sign))
    return float(near + left + right)


def _fractional_integrals(density: _DensityTable, x: np.ndarray, power: float,
                          per_decade: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """F1(x) = int_0^inf u**power p(x + u) du and F2(x) = int_0^inf u**power p(x - u) du."""
    breaks = _breaks(per_decade, None)
    base = {power: _singular_rule(breaks, power, order), 0.0: _singular_rule(breaks, 0.0, order)}
    F1 = np.array([_half_line_integral(density, 1.0, xi, power, per_decade, order, base) for xi in x])
    # p(x - u) = q(-x + u) with q(k) = p(-k)
    F2 = np.array([_half_line_integral(density, -1.0, -xi, power, per_decade, order, base) for xi in x])
    return F1, F2


def build_kernel(E: float, s: float, alpha: float, pair: BoundaryPair | None = None, *,
                 resolution: int = 1) -> TransferKernel:
    """Tabulate F1, F2 and the pairings on a grid clustered at x = -E and x = 0.

    ``resolution`` multiplies the panel density of every grid.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not alpha < s < 1:
        raise ValueError("s must lie in (alpha, 1)")
    if pair is None:
        pair = solve_ab(E, alpha)
    per_decade = 4 * resolution
    order = 8
    law = kappa_loc_params(pair.a, pair.b, alpha)
    density = _DensityTable(law, 16 * resolution)
    lower = 0.5 * (s - alpha)
    upper = 0.5 * (s + alpha)
    # pairing grid in d = |E + y| on each side of the pole
    d_plus, w_plus = _singular_rule(_breaks(per_decade, E if E > 0 else None), -upper, order)
    d_minus, w_minus = _singular_rule(_breaks(per_decade, None), -upper, order)
    x = np.concatenate([-E - d_minus[::-1], -E + d_plus])
    pair1 = np.concatenate([np.zeros_like(d_minus), 0.5 * alpha * w_plus])
    pair2 = np.concatenate([0.5 * alpha * w_minus[::-1], np.zeros_like(d_plus)])
    F1, F2 = _fractional_integrals(density, x, lower - 1.0, per_decade, order)
    if np.any(F1 <= 0) or np.any(F2 <= 0):
        raise ConvergenceError("fractional integrals lost positivity on the grid")
    return TransferKernel(E=float(E), s=float(s), alpha=float(alpha), x=x, F1=F1, F2=F2,
                          pair1=pair1, pair2=pair2,
                          I1_of_F1=float(pair1 @ F1), I1_of_F2=float(pair1 @ F2),
                          I2_of_F1=float(pair2 @ F1), I2_of_F2=float(pair2 @ F2))


def perron_rank2(k: TransferKernel) -> tuple[float, tuple[float, float]]:
    """Largest eigenvalue of the pairing matrix and its positive eigenvector."""
    vals, vecs = np.linalg.eig(k.pairing)
    i = int(np.argmax(vals.real))
    vec = vecs[:, i].real
    vec = vec / vec.sum()
    return float(vals[i].real), (float(vec[0]), float(vec[1]))


def apply_kernel(k: TransferKernel, f: np.ndarray) -> np.ndarray:
    """T f on the grid."""
    return (k.pair1 @ f) * k.F1 + (k.pair2 @ f) * k.F2


def perron_grid(k: TransferKernel, iters: int = 50, *, tol: float = 1e-6) -> tuple[float, np.ndarray]:
    """Power iteration on the grid from the weight-normalized positive constant.

    Returns the eigenvalue and the eigenfunction on ``k.x``, scaled to unit
    weighted sup norm.
    """
    weight = k.weight()
    f = 1.0 / weight
    ratios = []
    for _ in range(iters):
        g = apply_kernel(k, f)
        norm_f = np.max(weight * np.abs(f))
        norm_g = np.max(weight * np.abs(g))
        ratios.append(norm_g / norm_f)
        f = g / norm_g
        lam = ratios[-1]
        resid = np.max(weight * np.abs(apply_kernel(k, f) - lam * f))
        if len(ratios) > 2 and resid < tol:
            return float(lam), f
    if len(ratios) > 3 and np.ptp(ratios[-3:]) > 1e-3 * ratios[-1]:
        raise ConvergenceError("power iteration ratios oscillate; refine the grid")
    raise ConvergenceError(f"power iteration residual {resid:.3g} after {iters} steps")


def ell_pairing_matrix(ell_value: complex, alpha: float, s: float) -> np.ndarray:
    """K_{alpha,s} [[t_a ell, t_s ell], [t_s conj(ell), t_a conj(ell)]].

    Its eigenvalues are the roots of the lambda quadratic, so its spectral
    radius equals lambda_s.
    """
    c = edge_constants(alpha, s)
    conj = np.conj(ell_value)
    return c.K_alpha_s * np.array([[c.t_alpha * ell_value, c.t_s * ell_value],
                                   [c.t_s * conj, c.t_alpha * conj]])


def write_eigenfunction(path, k: TransferKernel, f: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["x", "f_E"])
        for xi, fi in zip(k.x, f):
            out.writerow([f"{xi:.17g}", f"{fi:.17g}"])
