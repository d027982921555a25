import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from levy_edge import pwit, rde


@pytest.fixture(scope="module")
def pop_spine():
    """Pool at alpha = 0.3, z = 1.05 + 0.001i, a localized energy."""
    return rde.run_population(1.05 + 1e-3j, 0.3, 100_000, burn_in=50, seed=41)


def test_offspring_and_weights():
    alpha, omega = 0.5, 4.0 ** (-2.0)
    trees = [pwit.sample_tree(alpha, 3, omega, seed=k) for k in range(600)]
    offspring = np.concatenate([t.offspring for t in trees])
    assert offspring.size >= 10_000
    se = offspring.std(ddof=1) / math.sqrt(offspring.size)
    assert abs(offspring.mean() - omega ** (-alpha)) < 3 * se
    weights = np.concatenate([np.concatenate(t.weights[1:]) for t in trees])
    mags = np.abs(weights)
    assert mags.min() >= omega
    # P(|T| > t) = (t / omega)**(-alpha) on [omega, inf)
    assert stats.kstest(mags, lambda t: 1 - (t / omega) ** (-alpha)).statistic < 0.01
    assert abs(np.mean(np.sign(weights))) < 4 / math.sqrt(weights.size)


def test_children_sorted_by_weight():
    tree = pwit.sample_tree(0.5, 3, 1 / 16, seed=2)
    for k in range(1, tree.depth + 1):
        parents, mags = tree.parents[k], np.abs(tree.weights[k])
        same = parents[1:] == parents[:-1]
        assert np.all(np.diff(parents) >= 0)
        assert np.all(mags[1:][same] <= mags[:-1][same])


def test_budget_enforced():
    with pytest.raises(pwit.BudgetError):
        pwit.sample_tree(0.5, 12, 1e-4, seed=1, budget=1000)


def test_single_vertex_tree():
    z = 0.3 + 0.2j
    tree = pwit.tree_resolvent(pwit.sample_tree(0.5, 0, 1.0, seed=1), z)
    assert tree.resolvent[0][0] == pytest.approx(-1 / z, rel=1e-15)


@settings(max_examples=30, deadline=None)
@given(E=st.floats(-3.0, 3.0), log_eta=st.floats(-3.0, 0.0), seed=st.integers(0, 2**32 - 1))
def test_resolvent_bounded(E, log_eta, seed):
    z = E + 1j * 10.0**log_eta
    tree = pwit.tree_resolvent(pwit.sample_tree(0.5, 3, 1 / 9, seed=seed), z)
    for level in tree.resolvent:
        assert np.all(np.abs(level) <= 1 / z.imag * (1 + 1e-12))
        assert np.all(level.imag >= 0)


def test_product_formula_matches_inverse():
    z = 0.7 + 0.05j
    tree = pwit.tree_resolvent(pwit.sample_tree(0.5, 3, 1 / 9, seed=3), z)
    G = np.linalg.inv(pwit.tree_matrix(tree) - z * np.eye(tree.vertex_count))
    assert G[0, 0] == pytest.approx(tree.resolvent[0][0], rel=1e-10)
    logs = np.log(np.abs(tree.resolvent[0]))
    for k in range(1, tree.depth + 1):
        logs = logs[tree.parents[k]] + np.log(np.abs(tree.weights[k])) + np.log(np.abs(tree.resolvent[k]))
        start = sum(tree.level_sizes[:k])
        row = np.abs(G[0, start:start + tree.level_sizes[k]])
        assert np.allclose(np.log(row), logs, atol=1e-8)


def test_imaginary_part_lower_bound():
    z = 0.5 + 0.01j
    for seed in range(20):
        tree = pwit.tree_resolvent(pwit.sample_tree(0.5, 4, 1 / 9, seed=seed), z)
        mod = np.abs(tree.resolvent[0])
        for k in range(1, tree.depth):
            mod = mod[tree.parents[k]] * np.abs(tree.weights[k]) * np.abs(tree.resolvent[k])
            inner = np.bincount(tree.parents[k + 1], weights=tree.weights[k + 1] ** 2 * tree.resolvent[k + 1].imag,
                                minlength=tree.level_sizes[k])
            assert tree.resolvent[0][0].imag >= np.sum(mod**2 * inner) * (1 - 1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_ward_on_small_trees(seed):
    tree = pwit.sample_tree(0.5, 2, 1 / 9, seed=seed)
    for E in (-1.0, 0.0, 2.0):
        assert pwit.ward_residual(tree, E + 0.1j) < 1e-10


def test_ward_on_star():
    tree = pwit.WeightedTree(alpha=0.5, depth=1, omega=1.0, parents=(np.zeros(0, int), np.zeros(3, int)),
                             weights=(np.zeros(0), np.array([2.0, -1.5, 1.1])))
    assert pwit.ward_residual(tree, 0.4 + 0.1j) < 1e-12


def test_ward_budget():
    tree = pwit.sample_tree(0.5, 3, 1 / 400, seed=1)
    with pytest.raises(pwit.BudgetError):
        pwit.ward_residual(tree, 1j, max_vertices=10)


def test_depth_eight_matches_pool():
    alpha, z = 0.5, 1 + 0.01j
    omega = 2.0 ** (-1 / alpha)
    pool = rde.run_population(z, alpha, 100_000, burn_in=50, cutoff=omega**2, seed=42)
    rng = np.random.default_rng(43)
    roots = np.array([pwit.tree_resolvent(pwit.sample_tree(alpha, 8, omega, rng), z, "stable",
                                          pool=pool, seed=rng).resolvent[0][0] for _ in range(5000)])
    for part in (np.real, np.imag):
        assert stats.ks_2samp(part(roots), part(pool.pool)).statistic < 0.02


def test_phi_needs_batch_and_exponent():
    trees = [pwit.tree_resolvent(pwit.sample_tree(0.5, 1, 0.25, seed=k), 1 + 0.1j) for k in range(10)]
    with pytest.raises(ValueError):
        pwit.phi_L(trees, 0.75, 1 + 0.1j)
    with pytest.raises(ValueError):
        pwit.phi_L(trees * 10, 0.4, 1 + 0.1j)


def test_tree_and_spine_estimators_agree():
    alpha, s, z = 0.5, 0.75, 1 + 0.05j
    omega = 5.0 ** (-1 / alpha)
    pool = rde.run_population(z, alpha, 100_000, burn_in=50, cutoff=omega**2, seed=44)
    rng = np.random.default_rng(45)
    trees = [pwit.tree_resolvent(pwit.sample_tree(alpha, 3, omega, rng), z, "stable", pool=pool, seed=rng)
             for _ in range(3000)]
    for L in (1, 2):
        tree = pwit.phi_L(trees, s, z, L)
        spine = pwit.spine_phi(pool, s, L, n=400_000, seed=46, omega=omega)
        assert tree.phi_rate == pytest.approx(math.log(tree.phi_L) / L)
        assert abs(tree.phi_L - spine.phi_L) < 3 * math.hypot(tree.std_err, spine.std_err)


def test_spine_stabilizes(pop_spine):
    rates = {L: pwit.spine_phi(pop_spine, 0.45, L, n=1_000_000, seed=L).phi_rate for L in (2, 4, 8)}
    assert 2 * abs(rates[2] - rates[4]) < 1.0
    assert 4 * abs(rates[4] - rates[8]) < 1.0


def test_spine_multiplicative(pop_spine):
    logs = {L: math.log(pwit.spine_phi(pop_spine, 0.45, L, n=400_000, seed=100 + L).phi_L) for L in range(1, 11)}
    defects = [abs(logs[l + m] - logs[l - 1] - logs[m - 1]) for l in range(2, 6) for m in range(2, 6)]
    assert max(defects) < 3.0
    assert max(defects) - min(defects) < 1.0


def test_spine_diverges_at_alpha(pop_spine):
    values = [pwit.spine_phi(pop_spine, 0.3 + gap, 1, n=400_000, seed=7).phi_L for gap in (0.2, 0.05, 0.0125)]
    assert np.all(np.diff(values) > 0)
    # Phi_1 grows like 1 / (s - alpha)
    assert values[-1] * 0.0125 > 0.5 * values[0] * 0.2


def test_spine_decays_in_energy():
    rates = []
    for E in (2.0, 8.0, 32.0):
        pop = rde.run_population(E + 1e-3j, 0.3, 50_000, burn_in=40, seed=47)
        rates.append(pwit.spine_phi(pop, 0.45, 4, n=400_000, seed=48).phi_rate)
    assert np.all(np.diff(rates) < 0)
