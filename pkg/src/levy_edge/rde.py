"""Population dynamics for the resolvent of the weighted tree.

The root diagonal resolvent entry R satisfies the distributional equation

    R  =d  -1 / (z + sum_j xi_j R_j),

with (xi_j) a Poisson process of intensity (alpha/2) x**(-alpha/2 - 1) dx on
(0, inf) and R_j independent copies of R.  A pool of complex samples is pushed
through this map until its law stops changing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import integrate

from .stable import ConvergenceError, StableParams, sample_stable

__all__ = [
    "ResolventPopulation",
    "SelfEnergyParams",
    "BoundaryPair",
    "YEstimate",
    "default_cutoff",
    "pool_cutoff",
    "initial_population",
    "rde_update",
    "run_population",
    "self_energy_params",
    "phi_map",
    "estimate_y",
    "ab_from_y",
    "boundary_ab",
    "kappa_loc_params",
    "sample_r_loc",
]


@dataclass(frozen=True)
class ResolventPopulation:
    z: complex
    alpha: float
    pool: np.ndarray = field(repr=False)
    cutoff: float
    generation: int = 0

    def __post_init__(self) -> None:
        if not self.z.imag > 0:
            raise ValueError("spectral parameter must have positive imaginary part")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")
        if len(self.pool) == 0:
            raise ValueError("pool must be nonempty")

    @property
    def size(self) -> int:
        return len(self.pool)


@dataclass(frozen=True)
class SelfEnergyParams:
    sigma_kappa: float
    beta_kappa: float
    sigma_theta: float


@dataclass(frozen=True)
class BoundaryPair:
    E: float
    a: float
    b: float
    source: str = "fixed_point"

    def __post_init__(self) -> None:
        if self.a < 0 or self.b < 0:
            raise ValueError("boundary pair entries must be nonnegative")
        if self.source not in ("population", "fixed_point"):
            raise ValueError(f"unknown source tag {self.source!r}")


@dataclass(frozen=True)
class YEstimate:
    y: complex
    std_err: float
    residual: float


def default_cutoff(alpha: float, rel_loss: float = 1e-3) -> float:
    """Weight cutoff whose discarded mean contribution is ``rel_loss`` of a unit entry.

    Points below the cutoff carry total mean weight
    (alpha/2) / (1 - alpha/2) * cutoff**(1 - alpha/2).
    """
    rho = 0.5 * alpha
    return (rel_loss * (1.0 - rho) / rho) ** (1.0 / (1.0 - rho))


def pool_cutoff(pool: np.ndarray, alpha: float, rel_loss: float = 1e-3) -> float:
    """Weight cutoff whose discarded mean contribution is ``rel_loss`` of the self-energy scale.

    Dropped points add (alpha/2) / (1 - alpha/2) * cutoff**(1 - alpha/2) * E|R|
    on average, against a self-energy of scale E[|R|**(alpha/2)]**(2/alpha).
    For entries of unit modulus this is ``default_cutoff``.
    """
    rho = 0.5 * alpha
    mags = np.abs(pool)
    ratio = np.mean(mags**rho) ** (1.0 / rho) / np.mean(mags)
    return (rel_loss * ratio * (1.0 - rho) / rho) ** (1.0 / (1.0 - rho))


def initial_population(z: complex, alpha: float, size: int, cutoff: float | None = None) -> ResolventPopulation:
    pool = np.full(size, 1j, dtype=complex)
    return ResolventPopulation(z=complex(z), alpha=alpha, pool=pool,
                               cutoff=default_cutoff(alpha) if cutoff is None else cutoff)


def _weighted_sums(pool: np.ndarray, alpha: float, cutoff: float, n: int,
                   rng: np.random.Generator, max_points: int) -> np.ndarray:
    rho = 0.5 * alpha
    counts = rng.poisson(cutoff ** (-rho), size=n)
    total = int(counts.sum())
    if total > max_points:
        raise ConvergenceError(f"update needs {total} Poisson points, budget is {max_points}")
    # inverse CDF of the intensity restricted to [cutoff, inf)
    weights = cutoff * rng.random(total) ** (-1.0 / rho)
    picks = pool[rng.integers(0, len(pool), size=total)]
    owner = np.repeat(np.arange(n), counts)
    terms = weights * picks
    re = np.bincount(owner, weights=terms.real, minlength=n)
    im = np.bincount(owner, weights=terms.imag, minlength=n)
    return re + 1j * im


def rde_update(pop: ResolventPopulation, seed=None, *, max_points: int = 50_000_000) -> ResolventPopulation:
    """One generation of the population map; the old pool is never modified."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sums = _weighted_sums(pop.pool, pop.alpha, pop.cutoff, pop.size, rng, max_points)
    new = -1.0 / (pop.z + sums)
    # rounding can push an entry a hair below the real axis
    new = new.real + 1j * np.maximum(new.imag, 0.0)
    return replace(pop, pool=new, generation=pop.generation + 1)


def run_population(z: complex, alpha: float, size: int = 100_000, *, burn_in: int = 50,
                   cutoff: float | None = None, seed=None,
                   start: ResolventPopulation | None = None) -> ResolventPopulation:
    """Iterate the population map ``burn_in`` times.

    Without an explicit ``cutoff`` it is reset from the pool before every
    generation by ``pool_cutoff``.
    """
    rng = np.random.default_rng(seed)
    pop = start if start is not None else initial_population(z, alpha, size, cutoff)
    if start is not None and complex(z) != pop.z:
        pop = replace(pop, z=complex(z))
    for _ in range(burn_in):
        if cutoff is None:
            pop = replace(pop, cutoff=pool_cutoff(pop.pool, alpha))
        elif pop.cutoff != cutoff:
            pop = replace(pop, cutoff=cutoff)
        pop = rde_update(pop, rng)
    return pop


def self_energy_params(pop: ResolventPopulation) -> SelfEnergyParams:
    """Stable parameters of the real and imaginary parts of the self-energy."""
    q = 0.5 * pop.alpha
    re = pop.pool.real
    im = pop.pool.imag
    pos = np.mean(np.maximum(re, 0.0) ** q)
    neg = np.mean(np.maximum(-re, 0.0) ** q)
    total = pos + neg
    sigma_kappa = total ** (1.0 / q)
    beta = (pos - neg) / total if total > 0 else 0.0
    sigma_theta = np.mean(im ** q) ** (1.0 / q)
    return SelfEnergyParams(float(sigma_kappa), float(beta), float(sigma_theta))


def phi_map(x: complex, alpha: float, z: complex) -> complex:
    """The scalar map whose fixed point is y(z).

    (1/Gamma(alpha/2)) int_0^inf t**(alpha/2-1) e^{itz} exp(-Gamma(1-alpha/2) t**(alpha/2) x) dt,
    evaluated along the ray t = tau * e^{i(pi/2 - arg z)} on which e^{itz} decays fastest.
    """
    rho = 0.5 * alpha
    rot = np.exp(1j * (0.5 * math.pi - np.angle(z)))
    rot_rho = rot**rho
    az = abs(z)
    coef = math.gamma(1.0 - rho) * rot_rho * x

    # sigma = tau**rho absorbs the t**(rho-1) singularity
    def integrand(sig: float) -> complex:
        return np.exp(-az * sig ** (1.0 / rho) - coef * sig)

    cut = az ** (-rho)
    damp = 1.0 / max(coef.real, 1e-300)
    marks = sorted({cut / 4, cut / 2, cut, 2 * cut, min(damp, 1e6 * cut)})
    pieces = [0.0] + marks + [np.inf]
    total = 0j
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        re = integrate.quad(lambda s: integrand(s).real, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
        im = integrate.quad(lambda s: integrand(s).imag, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
        total += re + 1j * im
    return complex(rot_rho / (rho * math.gamma(rho)) * total)


def estimate_y(pop: ResolventPopulation, *, tol: float | None = None) -> YEstimate:
    """Pool average of (-iR)**(alpha/2) with the fixed-point residual."""
    if pop.size < 1000:
        raise ValueError("pool size must be at least 1000")
    vals = (-1j * pop.pool) ** (0.5 * pop.alpha)
    y = complex(vals.mean())
    se = float(np.sqrt(vals.real.var() + vals.imag.var()) / math.sqrt(pop.size))
    resid = abs(y - phi_map(y, pop.alpha, pop.z))
    if tol is not None and resid > tol:
        raise ConvergenceError(f"y residual {resid:.3g} exceeds {tol:.3g}")
    return YEstimate(y=y, std_err=se, residual=resid)


def ab_from_y(y: complex, alpha: float) -> tuple[float, float]:
    """Coordinates of y in the basis ((-i)**(alpha/2), i**(alpha/2))."""
    c = 2.0 * math.cos(0.25 * math.pi * alpha)
    s = 2.0 * math.sin(0.25 * math.pi * alpha)
    return y.real / c - y.imag / s, y.real / c + y.imag / s


def boundary_ab(pops: Sequence[ResolventPopulation], E: float, *, slack: float = 0.0,
                measure: int = 2, seed=None, exponent: float | None = None) -> BoundaryPair:
    """Extrapolate y(E + i eta) to eta = 0 and decompose it.

    The fit is linear in eta**exponent; the default exponent alpha follows
    the approach of y to its limit, which is far from linear in eta when
    alpha is small.  ``exponent=1`` gives the plain linear fit.

    ``pops`` are converged populations along a decreasing eta ladder.  Each
    is advanced ``measure`` further generations, rounded up to an even
    count, and y is averaged over them.  Near the real axis the map acts on
    y roughly as y -> C / y, so single generations alternate about the fixed
    point; pairs of generations cancel the alternation.  ``measure=0`` uses
    the given pools as they are.
    """
    if len(pops) < 2:
        raise ValueError("need at least two ladder points")
    etas = np.array([p.z.imag for p in pops])
    if np.any(np.diff(etas) >= 0):
        raise ValueError("eta ladder must be decreasing")
    rng = np.random.default_rng(seed)
    ys = []
    for pop in pops:
        if abs(pop.z.real - E) > 1e-12:
            raise ValueError("population energy does not match E")
        samples = []
        cur = pop
        for _ in range(max(measure, 0) + max(measure, 0) % 2):
            cur = rde_update(cur, rng)
            samples.append(np.mean((-1j * cur.pool) ** (0.5 * cur.alpha)))
        if not samples:
            samples.append(np.mean((-1j * pop.pool) ** (0.5 * pop.alpha)))
        ys.append(np.mean(samples))
    ys = np.array(ys)
    h = etas ** (pops[0].alpha if exponent is None else exponent)
    fit_re = np.polyfit(h, ys.real, 1)
    fit_im = np.polyfit(h, ys.imag, 1)
    y0 = complex(fit_re[1], fit_im[1])
    a, b = ab_from_y(y0, pops[0].alpha)
    if a < -slack or b < -slack:
        raise ConvergenceError("extrapolated y lies outside the admissible cone")
    return BoundaryPair(E=E, a=max(a, 0.0), b=max(b, 0.0), source="population")


def kappa_loc_params(a: float, b: float, alpha: float) -> StableParams:
    """Law of a**(2/alpha) S1 - b**(2/alpha) S2 with S1, S2 nonnegative, index alpha/2."""
    if a < 0 or b < 0:
        raise ValueError("a and b must be nonnegative")
    if a == 0 and b == 0:
        raise ValueError("a and b cannot both vanish")
    return StableParams(index=0.5 * alpha, scale=(a + b) ** (2.0 / alpha), skewness=(a - b) / (a + b))


def sample_r_loc(E: float, pair: BoundaryPair, alpha: float, n: int, seed=None) -> np.ndarray:
    """Samples of R_loc = -1 / (E + kappa_loc)."""
    kappa = sample_stable(kappa_loc_params(pair.a, pair.b, alpha), n, seed)
    return -1.0 / (E + kappa)
