"""Monte Carlo on truncated Poisson weighted infinite trees.

Every vertex has children joined by edges of signed weight T, where |T| runs
over a Poisson process of intensity alpha x**(-alpha-1) dx on [omega, inf).
The diagonal resolvent of the subtree hanging below a vertex obeys

    R_v = -1 / (z + sum_{w child of v} T_vw**2 R_w),

and the root-to-v entry factorizes along the path as
R_0v = +- R_0 prod T_{u- u} R_u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import special

from .rde import ResolventPopulation
from .stable import ConvergenceError

__all__ = [
    "BudgetError",
    "WeightedTree",
    "MomentEstimate",
    "sample_tree",
    "tree_resolvent",
    "tree_matrix",
    "phi_L",
    "spine_phi",
    "ward_residual",
]


class BudgetError(RuntimeError):
    """Requested work exceeds the configured budget."""


@dataclass(frozen=True)
class WeightedTree:
    """Tree stored level by level.

    ``parents[k]`` indexes level k into level k - 1 and ``weights[k]`` holds
    the signed edge weights to those parents (entry 0 of both lists is empty,
    for the root).  ``resolvent[k]``, once computed, holds R_v for each
    vertex on level k, the root entry being the full R_00.
    """

    alpha: float
    depth: int
    omega: float
    parents: tuple = field(repr=False)
    weights: tuple = field(repr=False)
    resolvent: tuple | None = field(default=None, repr=False)
    z: complex | None = None

    @property
    def level_sizes(self) -> list[int]:
        return [1] + [len(p) for p in self.parents[1:]]

    @property
    def vertex_count(self) -> int:
        return sum(self.level_sizes)

    @property
    def offspring(self) -> np.ndarray:
        """Number of children of each non-leaf vertex."""
        counts = [np.bincount(self.parents[k], minlength=self.level_sizes[k - 1])
                  for k in range(1, self.depth + 1)]
        return np.concatenate(counts) if counts else np.zeros(0, dtype=int)


@dataclass(frozen=True)
class MomentEstimate:
    s: float
    z: complex
    L: int
    phi_L: float
    phi_rate: float
    std_err: float


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_tree(alpha: float, L: int, omega: float, seed=None, *, budget: int = 5_000_000) -> WeightedTree:
    """Truncated tree of depth L with Poisson(omega**-alpha) offspring."""
    if L < 0:
        raise ValueError("depth must be nonnegative")
    if omega <= 0:
        raise ValueError("omega must be positive")
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    mean = omega ** (-alpha)
    expected = sum(mean**k for k in range(L + 1))
    if expected > budget:
        raise BudgetError(f"expected {expected:.3g} vertices exceeds budget {budget}")
    rng = _rng(seed)
    parents = [np.zeros(0, dtype=np.int64)]
    weights = [np.zeros(0)]
    width = 1
    for _ in range(L):
        counts = rng.poisson(mean, size=width)
        owner = np.repeat(np.arange(width), counts)
        mags = omega * rng.random(owner.size) ** (-1.0 / alpha)
        # children of each parent listed in decreasing order of |T|
        order = np.lexsort((-mags, owner))
        owner, mags = owner[order], mags[order]
        signs = np.where(rng.random(owner.size) < 0.5, -1.0, 1.0)
        parents.append(owner)
        weights.append(signs * mags)
        width = owner.size
    return WeightedTree(alpha=alpha, depth=L, omega=omega, parents=tuple(parents), weights=tuple(weights))


def tree_resolvent(tree: WeightedTree, z: complex, boundary: str = "dirichlet", *,
                   pool: ResolventPopulation | np.ndarray | None = None, seed=None) -> WeightedTree:
    """Fill in R_v on every level, leaves to root.

    Leaves get -1/z (``dirichlet``) or values drawn from an rde pool at the
    same z (``stable``).
    """
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("spectral parameter must have positive imaginary part")
    sizes = tree.level_sizes
    if boundary == "dirichlet":
        leaf = np.full(sizes[-1], -1.0 / z, dtype=complex)
    elif boundary == "stable":
        if pool is None:
            raise ValueError("stable boundary needs an rde pool")
        values = pool.pool if isinstance(pool, ResolventPopulation) else np.asarray(pool)
        if isinstance(pool, ResolventPopulation) and abs(pool.z - z) > 1e-12:
            raise ValueError("pool was built at a different spectral parameter")
        leaf = values[_rng(seed).integers(0, len(values), size=sizes[-1])].astype(complex)
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    levels = [None] * (tree.depth + 1)
    levels[tree.depth] = leaf
    for k in range(tree.depth, 0, -1):
        terms = tree.weights[k] ** 2 * levels[k]
        n = sizes[k - 1]
        sums = np.bincount(tree.parents[k], weights=terms.real, minlength=n) \
            + 1j * np.bincount(tree.parents[k], weights=terms.imag, minlength=n)
        levels[k - 1] = -1.0 / (z + sums)
    return replace(tree, resolvent=tuple(levels), z=z)


def tree_matrix(tree: WeightedTree) -> np.ndarray:
    """Adjacency matrix of the truncated tree, vertices numbered level by level."""
    n = tree.vertex_count
    offsets = np.cumsum([0] + tree.level_sizes)
    H = np.zeros((n, n))
    for k in range(1, tree.depth + 1):
        child = offsets[k] + np.arange(tree.level_sizes[k])
        parent = offsets[k - 1] + tree.parents[k]
        H[child, parent] = tree.weights[k]
        H[parent, child] = tree.weights[k]
    return H


def ward_residual(tree: WeightedTree, z: complex, *, max_vertices: int = 4000) -> float:
    """max_v |eta sum_w |G_vw|**2 - Im G_vv| for the finite tree operator."""
    n = tree.vertex_count
    if n > max_vertices:
        raise BudgetError(f"{n} vertices exceeds the dense-inverse budget {max_vertices}")
    G = np.linalg.inv(tree_matrix(tree) - complex(z) * np.eye(n))
    lhs = complex(z).imag * np.sum(np.abs(G) ** 2, axis=1)
    return float(np.max(np.abs(lhs - G.diagonal().imag)))


def _level_log_sums(tree: WeightedTree, s: float, L: int) -> float:
    """log sum_{v on level L} |R_0v|**s for one tree."""
    if tree.resolvent is None:
        raise ValueError("tree resolvent not computed")
    logs = np.log(np.abs(tree.resolvent[0]))
    for k in range(1, L + 1):
        logs = logs[tree.parents[k]] + np.log(np.abs(tree.weights[k])) + np.log(np.abs(tree.resolvent[k]))
    if logs.size == 0:
        return -math.inf
    return float(special.logsumexp(s * logs))


def phi_L(trees: Sequence[WeightedTree], s: float, z: complex, L: int | None = None) -> MomentEstimate:
    """Batch estimate of Phi_L = E sum_{|v| = L} |R_0v|**s.

    Sums are accumulated in the log domain; trees deeper than L supply
    better boundary values for level L.
    """
    if len(trees) < 100:
        raise ValueError("need a batch of at least 100 trees")
    L = min(t.depth for t in trees) if L is None else L
    if L < 1 or any(t.depth < L for t in trees):
        raise ValueError("every tree must have depth >= L >= 1")
    alpha = trees[0].alpha
    if not alpha < s < 1:
        raise ValueError("s must lie in (alpha, 1)")
    for t in trees:
        if t.z is None or abs(t.z - complex(z)) > 1e-12:
            raise ValueError("tree resolvents were not computed at z")
    logs = np.array([_level_log_sums(t, s, L) for t in trees])
    top = np.max(logs)
    scaled = np.exp(logs - top)
    mean = scaled.mean()
    if mean == 0:
        raise ConvergenceError("no tree reached level L")
    value = math.exp(top) * mean
    err = math.exp(top) * scaled.std(ddof=1) / math.sqrt(len(trees))
    return MomentEstimate(s=s, z=complex(z), L=L, phi_L=value, phi_rate=math.log(value) / L, std_err=err)


def spine_phi(pop: ResolventPopulation, s: float, L: int, n: int = 100_000, seed=None, *,
              omega: float | None = None, proposal_scale: float = 3.0) -> MomentEstimate:
    """Phi_L by sampling a single marked path.

    By the many-to-one formula, E sum_{|v|=L} F(path to v) integrates F over
    the edge weights along one path against the Poisson intensity, the rest
    of each vertex's children forming an independent copy of the process.
    Their contribution, the self-energy S, is read off the rde pool as
    S = -1/R - z.  Squared path weights are drawn from a Cauchy law in
    log(T**2) and reweighted by the intensity.  With ``omega`` the path
    weights are restricted to |T| >= omega, matching a truncated tree;
    otherwise no weight cutoff enters.
    """
    if not pop.alpha < s < 1:
        raise ValueError("s must lie in (alpha, 1)")
    if L < 1:
        raise ValueError("L must be at least 1")
    rng = _rng(seed)
    rho = 0.5 * pop.alpha
    z = pop.z
    pool = pop.pool

    def self_energy(size: int) -> np.ndarray:
        return -1.0 / pool[rng.integers(0, len(pool), size=size)] - z

    # the integrand behaves like xi**((s - alpha)/2) as xi -> 0 and decays
    # at least like xi**(-alpha) as xi -> inf; cut where both are negligible
    lo = 2.0 * math.log(omega) if omega is not None else -max(200.0, 80.0 / (s - pop.alpha))
    hi = 200.0
    a_lo, a_hi = math.atan(lo / proposal_scale), math.atan(hi / proposal_scale)
    log_xi = proposal_scale * np.tan(a_lo + (a_hi - a_lo) * rng.random((L, n)))
    log_density = -np.log((a_hi - a_lo) * proposal_scale * (1.0 + (log_xi / proposal_scale) ** 2))
    # intensity of xi = T**2 in log coordinates: rho * xi**(-rho)
    log_w = (math.log(rho) - rho * log_xi - log_density).sum(axis=0)
    xi = np.exp(log_xi)
    # bottom of the spine is a full subtree, then climb to the root
    r = pool[rng.integers(0, len(pool), size=n)]
    log_abs = np.log(np.abs(r))
    for k in range(L - 1, -1, -1):
        r = -1.0 / (z + xi[k] * r + self_energy(n))
        log_abs = log_abs + 0.5 * log_xi[k] + np.log(np.abs(r))
    terms = log_w + s * log_abs
    top = np.max(terms)
    scaled = np.exp(terms - top)
    value = math.exp(top) * scaled.mean()
    err = math.exp(top) * scaled.std(ddof=1) / math.sqrt(n)
    return MomentEstimate(s=s, z=complex(z), L=L, phi_L=value, phi_rate=math.log(value) / L, std_err=err)
