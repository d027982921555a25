"""The boundary fixed point (a, b), the function ell, and the eigenvalue lambda.

Notation: S, T are independent nonnegative stable laws of index alpha/2 and
scale 1, kappa = x**(2/alpha) S - y**(2/alpha) T, and

    F_g(E, x, y) = E[(E + kappa)_-**(-g)],   G_g(E, x, y) = E[(E + kappa)_+**(-g)].

The pair (a, b) solves a = F_{alpha/2}(E, a, b), b = G_{alpha/2}(E, a, b).

F and G are evaluated in logarithmic coordinates W = (alpha/2) log S, whose
density is O(1) wide for every alpha.  This keeps the computation well scaled
as alpha -> 0, where E, S and T spread over hundreds of decades.  Conditioning
on S reduces each expectation to a convolution of the density of W with a
fixed kernel; those convolutions are tabulated once per (alpha, g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import CubicSpline

from .rde import BoundaryPair, kappa_loc_params
from .stable import (ConvergenceError, char_constant, log_density_interpolant, neg_fractional_moment,
                     stable_density)

__all__ = [
    "EdgeConstants",
    "EdgeSolution",
    "MobilityEdge",
    "C_STAR",
    "edge_constants",
    "AsymptoticReport",
    "fg_gamma",
    "fixed_points",
    "solve_ab",
    "ab_residual",
    "ell",
    "lambda_from_ell",
    "lambda_quadratic",
    "lambda_s",
    "lambda_",
    "edge_solution",
    "lambda_zero_closed",
    "mobility_edge",
    "fg_tilde",
    "edge_asymptotics",
]

C_STAR = 4.0 * math.log(2.0) + math.pi

_H_LO, _H_HI = -8.0, 64.0
_T_LO, _T_HI, _T_STEP = -30.0, 64.0, 0.01


@dataclass(frozen=True)
class EdgeConstants:
    alpha: float
    s: float
    K_alpha: float
    K_alpha_s: float
    t_alpha: float
    t_s: float
    t_1: float = 1.0
    # t_s**2 - t_alpha**2 without cancellation
    gap: float = 0.0


@dataclass(frozen=True)
class EdgeSolution:
    E: float
    a: float
    b: float
    residual: float
    ell: complex
    lambda_s: float
    lambda_: float
    method: str = "quad"


@dataclass(frozen=True)
class MobilityEdge:
    alpha: float
    E_mob: float
    bracket: tuple[float, float]
    all_roots: tuple[float, ...]
    scanned: tuple[float, float] = (0.0, 0.0)
    samples: tuple = field(default=(), repr=False)


def edge_constants(alpha: float, s: float = 1.0) -> EdgeConstants:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not alpha < s <= 1:
        raise ValueError("s must lie in (alpha, 1]")
    k_alpha = 0.5 * alpha * math.gamma(0.5 * (1 - alpha)) ** 2
    k_alpha_s = 0.5 * alpha * math.gamma(0.5 * (s - alpha)) * math.gamma(1 - 0.5 * (alpha + s))
    t_alpha = math.sin(0.5 * math.pi * alpha)
    t_s = math.sin(0.5 * math.pi * s)
    gap = math.sin(0.5 * math.pi * (s - alpha)) * math.sin(0.5 * math.pi * (s + alpha))
    return EdgeConstants(alpha, s, k_alpha, k_alpha_s, t_alpha, t_s, 1.0, gap)


# ---------------------------------------------------------------------------
# kernel tables


def _gl_panels(breaks: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _radial_rule(alpha: float, gamma: float, r_max: float = 100.0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes in r > 0 and weights carrying the factor (2r/alpha)**(-gamma).

    The singular factor is integrated exactly on [0, alpha/2] by Gauss-Jacobi;
    callers multiply by the smooth remainder of their kernel.
    """
    half = 0.5 * alpha
    xj, wj = special.roots_jacobi(24, 0.0, -gamma)
    q0 = 0.5 * (xj + 1.0)
    w0 = wj * 2.0 ** (gamma - 1.0)
    # geometric panels in q = 2r/alpha up to r = 1, then uniform panels in r
    q_breaks = [1.0]
    while q_breaks[-1] * 2 < 1.0 / half:
        q_breaks.append(q_breaks[-1] * 2)
    q_breaks.append(1.0 / half)
    q1, w1 = _gl_panels(np.array(q_breaks), 16)
    r_breaks = np.arange(1.0, r_max + 0.25, 0.5)
    r2, w2 = _gl_panels(r_breaks, 10)
    q2 = r2 / half
    q = np.concatenate([q0, q1, q2])
    # weights for dr: dr = half * dq; strip the singular factor outside panel 0
    w = np.concatenate([w0 * half, w1 * half * q1 ** (-gamma), w2 * q2 ** (-gamma)])
    return q * half, w


@dataclass(frozen=True)
class _Tables:
    alpha: float
    gamma: float
    # e^{-2 g t / alpha} * int_0^inf h(t + r) (e^{2r/alpha} - 1)^{-g} dr
    upper: CubicSpline
    # int_0^inf h(t - r) (1 - e^{-2r/alpha})^{-g} dr
    lower: CubicSpline
    upper_left: float


def _h_eval(spline: CubicSpline, w: np.ndarray) -> np.ndarray:
    out = spline(w)
    out[(w < _H_LO) | (w > _H_HI)] = 0.0
    return out


@lru_cache(maxsize=64)
def _tables(alpha: float, gamma: float) -> _Tables:
    h = log_density_interpolant(alpha, _H_LO, _H_HI)
    r, w = _radial_rule(alpha, gamma)
    q = 2.0 * r / alpha
    k = 2.0 * gamma / alpha
    # (1 - e^{-q})^{-g} = q^{-g} * rem, and e^{-kt} (e^q - 1)^{-g} = e^{-k(t+r)} (1 - e^{-q})^{-g}
    weights = w * (q / -np.expm1(-q)) ** gamma
    t = np.arange(_T_LO, _T_HI + 0.5 * _T_STEP, _T_STEP)
    upper = np.empty_like(t)
    lower = np.empty_like(t)
    chunk = max(1, 2_000_000 // len(r))
    for i in range(0, len(t), chunk):
        tt = t[i:i + chunk, None]
        arg = (tt + r[None, :]).ravel()
        hu = (_h_eval(h, arg) * np.exp(-k * arg)).reshape(len(tt), len(r))
        upper[i:i + chunk] = hu @ weights
        arg = (tt - r[None, :]).ravel()
        lower[i:i + chunk] = _h_eval(h, arg).reshape(len(tt), len(r)) @ weights
    left = neg_fractional_moment(alpha, k)
    return _Tables(alpha, gamma, CubicSpline(t, upper), CubicSpline(t, lower), left)


def _upper(tab: _Tables, t: np.ndarray) -> np.ndarray:
    out = tab.upper(t)
    out[t < _T_LO] = tab.upper_left
    out[t > _T_HI] = 0.0
    return out


def _lower(tab: _Tables, t: np.ndarray) -> np.ndarray:
    out = tab.lower(t)
    out[t < _T_LO] = 0.0
    out[t > _T_HI] = 1.0
    return out


# ---------------------------------------------------------------------------
# F and G


def _outer_rule(kink: float | None, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    breaks = np.arange(_H_LO, _H_HI + 0.25, 0.5)
    if kink is not None and _H_LO < kink < _H_HI:
        offs = 0.5 * alpha * 2.0 ** np.arange(-4, 9)
        extra = np.concatenate([kink - offs, [kink], kink + offs])
        breaks = np.union1d(breaks, extra[(extra > _H_LO) & (extra < _H_HI)])
    return _gl_panels(breaks, 8)


def _fg_nonneg(E: float, x: float, y: float, gamma: float, alpha: float) -> tuple[float, float]:
    """F and G for E >= 0 and x > 0 or y > 0."""
    k = 2.0 * gamma / alpha
    h = log_density_interpolant(alpha, _H_LO, _H_HI)
    tab = _tables(alpha, gamma)
    log_u = 0.5 * alpha * math.log(E) if E > 0 else -math.inf
    if x == 0:
        if E == 0:
            return y ** (-k) * neg_fractional_moment(alpha, k), 0.0
        t = np.array([log_u - math.log(y)])
        return (float(y ** (-k) * _upper(tab, t)[0]),
                float(math.exp(-k * log_u) * _lower(tab, t)[0]))
    kink = log_u - math.log(x) if E > 0 else None
    w1, wts = _outer_rule(kink, alpha)
    hv = _h_eval(h, w1) * wts
    # alpha/2 * log(E + x^{2/alpha} e^{2 w1/alpha})
    log_c = 0.5 * alpha * np.logaddexp(2.0 / alpha * log_u, 2.0 / alpha * (math.log(x) + w1))
    if y == 0:
        return 0.0, float(hv @ np.exp(-k * log_c))
    t = log_c - math.log(y)
    F = y ** (-k) * (hv @ _upper(tab, t))
    G = hv @ (np.exp(-k * log_c) * _lower(tab, t))
    return float(F), float(G)


def _fg_density(E: float, x: float, y: float, gamma: float, alpha: float) -> tuple[float, float]:
    """F and G by direct quadrature of |E + w|**(-gamma) against the density of kappa.

    Within distance 1 of the pole, |E + w| = v**(1/(1-gamma)) removes the
    singularity; beyond it, |E + w| = e**tau with the power tail added in
    closed form past the last panel.  The density of kappa is sharply peaked
    at w = 0, so panels are refined geometrically around that point.
    """
    p = kappa_loc_params(x, y, alpha)
    rho = 0.5 * alpha
    expo = 1.0 / (1.0 - gamma)
    t_end = 120.0
    out = []
    for sign in (-1.0, 1.0):
        peak = sign * E
        v_breaks = np.linspace(0.0, 1.0, 17)
        t_breaks = np.arange(0.0, t_end + 0.25, 0.5)
        if peak > 0:
            near_peak = peak * (1.0 + np.concatenate([-(2.0 ** -np.arange(1, 40)), [0.0], 2.0 ** -np.arange(0, 40)]))
            v_breaks = np.union1d(v_breaks, near_peak[near_peak < 1.0] ** (1.0 - gamma))
            far = near_peak[(near_peak > 1.0) & (near_peak < math.exp(t_end))]
            t_breaks = np.union1d(t_breaks, np.log(far))
        parts = []
        for order in (16, 8):
            v, wv = _gl_panels(v_breaks, order)
            near = expo * (wv @ stable_density(p, -E + sign * v ** expo))
            tau, wt = _gl_panels(t_breaks, order)
            body = wt @ (np.exp((1.0 - gamma) * tau) * stable_density(p, -E + sign * np.exp(tau)))
            parts.append(near + body)
        if abs(parts[0] - parts[1]) > 1e-8 * max(abs(parts[0]), 1e-300):
            raise ConvergenceError("quadrature against the density of kappa did not converge")
        # density ~ rho * c * |w|**(-1-rho) with tail weight c = scale**rho (1 +- skew) / 2
        c_tail = (x + y) * 0.5 * (1.0 + sign * p.skewness)
        tail = rho * c_tail * math.exp(-(gamma + rho) * t_end) / (gamma + rho)
        out.append(parts[0] + tail)
    return float(out[0]), float(out[1])


def fg_gamma(E: float, x: float, y: float, gamma: float, alpha: float, *, method: str = "log") -> tuple[float, float]:
    """(F_gamma(E, x, y), G_gamma(E, x, y)).

    ``method="log"`` (default) integrates in logarithmic coordinates and stays
    accurate for every alpha in (0, 1).  ``method="density"`` integrates
    against the density of kappa directly; it is an independent check for
    moderate alpha, where the law of kappa is not too spread out.
    """
    if x < 0 or y < 0 or (x == 0 and y == 0):
        raise ValueError("x, y must be nonnegative and not both zero")
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    gamma = float(gamma)
    alpha = float(alpha)
    if method == "density":
        return _fg_density(float(E), float(x), float(y), gamma, alpha)
    if method != "log":
        raise ValueError(f"unknown method {method!r}")
    if E < 0:
        G, F = _fg_nonneg(-E, y, x, gamma, alpha)
        return F, G
    return _fg_nonneg(float(E), float(x), float(y), gamma, alpha)


# ---------------------------------------------------------------------------
# the boundary fixed point


def _ab_step(E: float, ab: np.ndarray, alpha: float) -> np.ndarray:
    a, b = np.maximum(ab, 0.0)
    if a == 0 and b == 0:
        raise ConvergenceError("iterate collapsed to (0, 0)")
    return np.array(fg_gamma(E, a, b, 0.5 * alpha, alpha))


def _iterate_ab(E: float, alpha: float, start, tol: float, max_iter: int,
                damping: float = 0.5, memory: int = 5) -> tuple[np.ndarray, float, list[float]]:
    """Damped iteration, switching to Anderson mixing after 20 steps."""
    x = np.asarray(start, dtype=float)
    xs: list[np.ndarray] = []
    fs: list[np.ndarray] = []
    history: list[float] = []
    for it in range(max_iter):
        f = _ab_step(E, x, alpha) - x
        res = float(np.max(np.abs(f)))
        history.append(res)
        if res < tol:
            return np.maximum(x, 0.0), res, history
        xs.append(x)
        fs.append(f)
        xs, fs = xs[-memory - 1:], fs[-memory - 1:]
        step = x + damping * f
        if it >= 20 and len(xs) > 1:
            dx = np.diff(np.array(xs), axis=0).T
            df = np.diff(np.array(fs), axis=0).T
            coef = np.linalg.lstsq(df, f, rcond=None)[0]
            mixed = x + damping * f - (dx + damping * df) @ coef
            if np.all(mixed >= 0) and np.all(np.isfinite(mixed)):
                step = mixed
        x = np.maximum(step, 0.0)
    raise ConvergenceError(f"(a, b) iteration stalled at residual {history[-1]:.3g} after {max_iter} steps")


def fixed_points(E: float, alpha: float, *, starts=None, tol: float = 1e-8,
                 max_iter: int = 400) -> tuple[BoundaryPair, ...]:
    """All distinct fixed points reached from the given starting pairs.

    Default starts are (1/2, 1/2) and, for E > 0, the large-E profile
    (0.1 E**(-alpha/2), E**(-alpha/2)).  A pair from population dynamics can
    be passed in ``starts``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    flip = E < 0
    e = abs(float(E))
    if starts is None:
        starts = [(0.5, 0.5)]
        if e > 0:
            u = e ** (-0.5 * alpha)
            starts.append((0.1 * u, u))
    elif flip:
        starts = [(b, a) for a, b in starts]
    found: list[np.ndarray] = []
    last_error = None
    for st in starts:
        try:
            ab, _, _ = _iterate_ab(e, alpha, st, tol, max_iter)
        except ConvergenceError as err:
            last_error = err
            continue
        if not any(np.max(np.abs(ab - g)) < 1e-6 * max(1.0, np.max(g)) for g in found):
            found.append(ab)
    if not found:
        raise last_error or ConvergenceError("no start converged")
    pairs = []
    for a, b in found:
        if flip:
            a, b = b, a
        pairs.append(BoundaryPair(E=float(E), a=float(a), b=float(b)))
    return tuple(pairs)


def solve_ab(E: float, alpha: float, *, start=None, tol: float = 1e-8, max_iter: int = 400) -> BoundaryPair:
    """The boundary pair (a, b) at energy E.

    With ``start`` given only that start is used (warm start along a scan);
    otherwise the first of :func:`fixed_points` is returned.
    """
    starts = None if start is None else [tuple(start)]
    return fixed_points(E, alpha, starts=starts, tol=tol, max_iter=max_iter)[0]


def ab_residual(pair: BoundaryPair, alpha: float) -> float:
    F, G = fg_gamma(pair.E, pair.a, pair.b, 0.5 * alpha, alpha)
    return max(abs(F - pair.a), abs(G - pair.b))


# ---------------------------------------------------------------------------
# ell and lambda


def _ell_moment(E: float, alpha: float, pair: BoundaryPair) -> complex:
    F, G = fg_gamma(E, pair.a, pair.b, alpha, alpha)
    pref = math.gamma(alpha) / math.pi
    half = 0.5 * math.pi * alpha
    return complex(pref * math.cos(half) * (F + G), pref * math.sin(half) * (G - F))


def _ell_fourier(E: float, alpha: float, pair: BoundaryPair) -> complex:
    # the xi-integral rotated onto the ray where e^{i E xi} decays, then
    # substituted sigma = |xi|**(alpha/2)
    sgn = -1.0 if E < 0 else 1.0
    rho = 0.5 * alpha
    skew = (pair.a - pair.b) / (pair.a + pair.b)
    c = char_constant(rho) * (pair.a + pair.b)
    omega = c * np.exp(0.5j * sgn * math.pi * rho) * (1.0 - 1j * skew * math.tan(0.5 * math.pi * rho))
    pref = 2.0 * (sgn * 1j) ** alpha / (alpha * math.pi)
    e = abs(E)
    if e == 0:
        return complex(pref / omega**2)

    def integrand(sig: float) -> complex:
        return sig * np.exp(-e * sig ** (1.0 / rho) - omega * sig)

    marks = sorted({e ** (-rho), 1.0 / omega.real})
    pieces = [0.0, *marks, np.inf]
    total = 0j
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        for part, unit in ((np.real, 1.0), (np.imag, 1j)):
            val, err = integrate.quad(lambda t: part(integrand(t)), lo, hi, limit=400,
                                      epsabs=0.0, epsrel=1e-12)
            total += unit * val
    return complex(pref * total)


def ell(E: float, alpha: float, pair: BoundaryPair | None = None, route: str = "moment") -> complex:
    """ell(E) from the boundary pair, by the moment or the Fourier route."""
    if pair is None:
        pair = solve_ab(E, alpha)
    if route == "moment":
        return _ell_moment(E, alpha, pair)
    if route == "fourier":
        return _ell_fourier(E, alpha, pair)
    raise ValueError(f"unknown route {route!r}")


def lambda_from_ell(ell_value: complex, alpha: float, s: float = 1.0) -> float:
    """Positive root of the lambda quadratic, in the cancellation-free closed form."""
    k = edge_constants(alpha, s)
    re, im = ell_value.real, ell_value.imag
    return k.K_alpha_s * (k.t_alpha * re + math.sqrt(k.t_s**2 * re**2 + k.gap * im**2))


def lambda_quadratic(ell_value: complex, alpha: float, s: float = 1.0) -> float:
    """Positive root of lambda**2 - 2 t_a K Re(ell) lambda + K**2 (t_a**2 - t_s**2) |ell|**2."""
    k = edge_constants(alpha, s)
    K = k.K_alpha_s
    roots = np.roots([1.0, -2.0 * k.t_alpha * K * ell_value.real,
                      K**2 * (k.t_alpha**2 - k.t_s**2) * abs(ell_value) ** 2])
    return float(np.max(roots.real))


def lambda_s(E: float, s: float, alpha: float, *, pair: BoundaryPair | None = None,
             route: str = "moment") -> float:
    return lambda_from_ell(ell(E, alpha, pair, route), alpha, s)


def lambda_(E: float, alpha: float, *, pair: BoundaryPair | None = None, route: str = "moment") -> float:
    """lambda(E, alpha), the s = 1 member of the family."""
    return lambda_s(E, 1.0, alpha, pair=pair, route=route)


def edge_solution(E: float, alpha: float, *, pair: BoundaryPair | None = None) -> EdgeSolution:
    if pair is None:
        pair = solve_ab(E, alpha)
    value = ell(E, alpha, pair)
    lam = lambda_from_ell(value, alpha)
    return EdgeSolution(E=float(E), a=pair.a, b=pair.b, residual=ab_residual(pair, alpha),
                        ell=value, lambda_s=lam, lambda_=lam)


def lambda_zero_closed(alpha: float) -> float:
    """lambda(0, alpha) in closed form."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    t = math.sin(0.5 * math.pi * alpha)
    log_g = 2.0 * special.gammaln(0.5 * (1.0 - alpha)) - 2.0 * special.gammaln(1.0 - 0.5 * alpha)
    return alpha / (2.0 * t) * math.exp(log_g) * (t + 1.0)


# ---------------------------------------------------------------------------
# the mobility edge


class _LambdaTrack:
    """lambda(E) - 1 with the last boundary pair reused as the next start."""

    def __init__(self, alpha: float):
        self.alpha = alpha
        self.start: tuple[float, float] | None = None

    def __call__(self, log_e: float) -> float:
        E = math.exp(log_e)
        try:
            pair = solve_ab(E, self.alpha, start=self.start)
        except ConvergenceError:
            pair = solve_ab(E, self.alpha)
        self.start = (pair.a, pair.b)
        return lambda_(E, self.alpha, pair=pair) - 1.0


@lru_cache(maxsize=32)
def _mobility_edge_cached(alpha: float, lo: float, hi: float, points: int, tol: float) -> MobilityEdge:
    track = _LambdaTrack(alpha)
    log_lo, log_hi = math.log(lo), math.log(hi)
    # lambda > 1 near 0 and < 1 far out, so the range can always be widened
    while track(log_lo) < 0:
        if log_lo < -650:
            raise ConvergenceError("lambda stays below 1 down to E = 1e-282")
        log_lo *= 2.0
    track.start = None
    while track(log_hi) > 0:
        if log_hi > 650:
            raise ConvergenceError("lambda stays above 1 up to E = 1e282")
        log_hi *= 2.0
    track.start = None
    grid = np.linspace(log_lo, log_hi, points)
    values = np.array([track(g) for g in grid])
    roots = []
    brackets = []
    for i in np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]:
        track.start = None
        track(grid[i])
        root = optimize.brentq(track, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-14)
        if abs(track(root)) > tol:
            raise ConvergenceError(f"root refinement left |lambda - 1| = {abs(track(root)):.3g}")
        roots.append(math.exp(root))
        brackets.append((math.exp(grid[i]), math.exp(grid[i + 1])))
    if not roots:
        raise ConvergenceError("no sign change of lambda - 1 on the scanned range")
    samples = tuple(zip(np.exp(grid).tolist(), (values + 1.0).tolist()))
    return MobilityEdge(alpha=alpha, E_mob=roots[-1], bracket=brackets[-1], all_roots=tuple(roots),
                        scanned=(math.exp(log_lo), math.exp(log_hi)), samples=samples)


def mobility_edge(alpha: float, *, E_range: tuple[float, float] = (1e-6, 1e3), points: int = 400,
                  tol: float = 1e-6) -> MobilityEdge:
    """Largest E > 0 with lambda(E, alpha) = 1, plus every sign change found.

    lambda - 1 is sampled on a log-spaced grid, the range is widened until it
    changes sign, and each sign change is refined by Brent's method.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    lo, hi = E_range
    if not 0 < lo < 1 < hi:
        raise ValueError("E_range must satisfy 0 < lo < 1 < hi")
    return _mobility_edge_cached(float(alpha), float(lo), float(hi), int(points), float(tol))


# ---------------------------------------------------------------------------
# small- and large-alpha checks


def fg_tilde(u: float, x: float, y: float, which: str) -> float:
    """Closed-form small-alpha limits of F_{alpha/2}, G_{alpha/2} and F_alpha + G_alpha.

    ``which`` is one of "F_half", "G_half", "sum_alpha"; u stands for E**(alpha/2).
    """
    if u <= 0 or x <= 0 or y <= 0:
        raise ValueError("u, x, y must be positive")
    d = x + y
    decay = math.exp(-d / u)
    if which == "F_half":
        return y / d**2 - decay * (y / d**2 + y / (d * u))
    if which == "G_half":
        return x / d**2 + decay * (y / (u * d) - x / d**2)
    if which == "sum_alpha":
        return 2.0 / d**2 - 2.0 * (1.0 / (u * d) + 1.0 / d**2) * decay
    raise ValueError(f"unknown quantity {which!r}")


@dataclass(frozen=True)
class AsymptoticReport:
    alpha: float
    regime: str
    E_mob: float
    statistic: float
    predicted: float
    band: float
    in_band: bool
    moment_sum: float = math.nan
    moment_target: float = math.nan
    reduced_residual: float = math.nan
    k_ratio: float = math.nan


def edge_asymptotics(alpha: float, *, band_constant: float = 5.0, edge: MobilityEdge | None = None) -> AsymptoticReport:
    """Compare the computed edge with its small- or large-alpha prediction.

    Small alpha (<= 0.2): statistic E_mob**(alpha/2) against 1/|log alpha| with
    band band_constant * log|log alpha| / |log alpha|**2, plus
    E|R_loc|**alpha against 2 - C_STAR * alpha and the residual of the reduced
    equation e**(-d/u)/u = C_STAR alpha d with d = a + b.
    Large alpha (>= 0.8): statistic (1 - alpha) E_mob, with K_alpha compared to
    2 alpha / (1 - alpha)**2; the band is checked across several alphas by the
    caller, so ``in_band`` only asserts a single root.
    """
    if edge is None:
        edge = mobility_edge(alpha)
    E = edge.E_mob
    if alpha <= 0.2:
        L = abs(math.log(alpha))
        u = E ** (0.5 * alpha)
        predicted = 1.0 / L
        band = band_constant * math.log(L) / L**2
        pair = solve_ab(E, alpha)
        F, G = fg_gamma(E, pair.a, pair.b, alpha, alpha)
        d = pair.a + pair.b
        reduced = math.exp(-d / u) / u - C_STAR * alpha * d
        return AsymptoticReport(alpha, "small", E, u, predicted, band, abs(u - predicted) <= band,
                                moment_sum=F + G, moment_target=2.0 - C_STAR * alpha,
                                reduced_residual=reduced)
    if alpha >= 0.8:
        k = edge_constants(alpha)
        ratio = k.K_alpha / (2.0 * alpha / (1.0 - alpha) ** 2)
        return AsymptoticReport(alpha, "large", E, (1.0 - alpha) * E, math.nan, math.nan,
                                len(edge.all_roots) == 1, k_ratio=ratio)
    raise ValueError("alpha must be <= 0.2 or >= 0.8 for an asymptotic comparison")
