"""Acceptance criteria 1-11, one test each.

Every test prints ``criterion N: PASS|FAIL  <measured values>`` before
asserting, so ``pytest -v -s`` shows the full scorecard.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from levy_edge import edge, matrix, pwit, rde, stable, transfer
from levy_edge.stable import StableParams

# mpmath oracles, 30 digits
LAPLACE = {
    0.3: (0.3484193295792968, 0.27306229236961378, 0.20228178649806907),
    0.5: (0.28555685229871409, 0.16991552946752621, 0.081542715894749615),
    0.8: (0.071593763553959228, 0.010144295897577707, 0.00033777750145208135),
}
LAPLACE_T = (0.5, 1.0, 2.0)
NEGMOM = {0.3: 0.96339776200411587, 0.5: 0.90031631615710607, 0.8: 0.75682672864065695}
LAM0 = {0.3: 2.516434675704678, 0.5: 5.283360599514318, 0.7: 14.98745954505587}
C_STAR = 4 * math.log(2) + math.pi


@pytest.fixture
def report(capsys):
    start = time.perf_counter()

    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}, "
                  f"{time.perf_counter() - start:.0f} s")
        return ok

    return emit


def test_criterion_01_stable_oracles(report):
    rng = np.random.default_rng(1001)
    worst_z, worst_rel = 0.0, 0.0
    for alpha, exact in LAPLACE.items():
        x = stable.sample_stable(StableParams(alpha, 1.0, 1.0), 1_000_000, rng)
        for t, value in zip(LAPLACE_T, exact):
            vals = np.exp(-t * x)
            se = vals.std(ddof=1) / math.sqrt(len(vals))
            worst_z = max(worst_z, abs(vals.mean() - value) / se)
        half = stable.sample_stable(StableParams(0.5 * alpha, 1.0, 1.0), 1_000_000, rng)
        moment = np.mean(half ** (-0.5 * alpha))
        worst_rel = max(worst_rel, abs(moment / stable.neg_fractional_moment(alpha, 1.0) - 1))
        assert stable.neg_fractional_moment(alpha, 1.0) == pytest.approx(NEGMOM[alpha], rel=1e-12)
    ok = worst_z < 3 and worst_rel < 0.01
    assert report(1, ok, f"max |z| Laplace {worst_z:.2f} (tol 3), max rel dev moment {worst_rel:.4f} (tol 0.01)")


def test_criterion_02_ward(report):
    rng = np.random.default_rng(1002)
    worst_matrix = worst_tree = 0.0
    for _ in range(100):
        H = matrix.sample_matrix(int(rng.integers(10, 201)), float(rng.uniform(0.1, 0.95)), rng)
        z = complex(rng.uniform(-5, 5), 10 ** rng.uniform(-3, 0))
        G = matrix.resolvent(H, z)
        worst_matrix = max(worst_matrix, float(np.max(np.abs(z.imag * np.sum(np.abs(G) ** 2, axis=1)
                                                              - G.diagonal().imag))))
    trees = 0
    while trees < 100:
        alpha = float(rng.uniform(0.2, 0.9))
        tree = pwit.sample_tree(alpha, int(rng.integers(1, 4)), 3.0 ** (-1 / alpha), rng)
        if tree.vertex_count > 4000:
            continue
        z = complex(rng.uniform(-5, 5), 10 ** rng.uniform(-3, 0))
        worst_tree = max(worst_tree, pwit.ward_residual(tree, z))
        trees += 1
    ok = worst_matrix < 1e-10 and worst_tree < 1e-10
    assert report(2, ok, f"max residual matrices {worst_matrix:.1e}, trees {worst_tree:.1e} (tol 1e-10)")


def test_criterion_03_lambda_zero(report):
    devs = {}
    for alpha, exact in LAM0.items():
        pair = edge.solve_ab(0.0, alpha)
        value = edge.lambda_quadratic(edge.ell(0.0, alpha, pair), alpha)
        assert edge.lambda_zero_closed(alpha) == pytest.approx(exact, rel=1e-12)
        devs[alpha] = abs(value / exact - 1)
    ok = max(devs.values()) < 1e-3
    detail = ", ".join(f"alpha {a}: {d:.1e}" for a, d in devs.items())
    assert report(3, ok, f"rel dev {detail} (tol 1e-3)")


def test_criterion_04_ell_routes(report):
    worst = 0.0
    for alpha in (0.3, 0.5, 0.8):
        for E in (0.5, 1.0, 2.0, 5.0):
            pair = edge.solve_ab(E, alpha)
            moment = edge.ell(E, alpha, pair, route="moment")
            fourier = edge.ell(E, alpha, pair, route="fourier")
            worst = max(worst, abs(moment - fourier) / abs(moment))
    assert report(4, worst < 1e-4, f"max rel dev {worst:.1e} over 12 points (tol 1e-4)")


def test_criterion_05_transfer(report):
    worst = 0.0
    for alpha in (0.3, 0.5, 0.7):
        for frac in (0.25, 0.5, 0.75):
            s = alpha + (1 - alpha) * frac
            for E in (0.5, 1.0, 3.0):
                pair = edge.solve_ab(E, alpha)
                exact = edge.lambda_s(E, s, alpha, pair=pair)
                k = transfer.build_kernel(E, s, alpha, pair)
                for value in (transfer.perron_rank2(k)[0], transfer.perron_grid(k)[0]):
                    worst = max(worst, abs(value / exact - 1))
    assert report(5, worst < 1e-3, f"max rel dev {worst:.1e} over 27 points (tol 1e-3)")


def test_criterion_06_large_alpha(report):
    edges = {a: edge.mobility_edge(a) for a in (0.95, 0.97, 0.99)}
    roots = {a: len(m.all_roots) for a, m in edges.items()}
    scaled = [(1 - a) * m.E_mob for a, m in edges.items()]
    ratio = max(scaled) / min(scaled)
    ok = all(n == 1 for n in roots.values()) and ratio < 3
    assert report(6, ok, f"sign changes {list(roots.values())}, (1-alpha) E_mob "
                         f"{', '.join(f'{v:.3f}' for v in scaled)}, ratio {ratio:.2f} (tol 3)")


def test_criterion_07_small_alpha(report):
    details, ok = [], True
    for alpha in (0.02, 0.05):
        me = edge.mobility_edge(alpha)
        u = abs(math.log(alpha))
        dev = abs(me.E_mob ** (0.5 * alpha) - 1 / u)
        bound = 5 * math.log(u) / u**2
        r = rde.sample_r_loc(me.E_mob, edge.solve_ab(me.E_mob, alpha), alpha, 1_000_000, seed=1007)
        moment = float(np.mean(np.abs(r) ** alpha))
        off = abs(moment - (2 - C_STAR * alpha))
        ok &= dev <= bound and off <= 0.05
        details.append(f"alpha {alpha}: dev {dev:.4f} (bound {bound:.4f}), moment off {off:.4f} (tol 0.05)")
    assert report(7, ok, "; ".join(details))


def test_criterion_08_matrix_vs_rde(report):
    alpha, z = 0.5, 1 + 0.05j
    pool = rde.run_population(z, alpha, 200_000, burn_in=60, seed=1008).pool
    rng = np.random.default_rng(1009)
    ks = {}
    for N in (500, 1000, 2000):
        g = np.concatenate([matrix.spectral_resolvent_diag(matrix.spectral_sample(matrix.sample_matrix(N, alpha, rng)), z)
                            for _ in range(50)])
        ks[N] = tuple(stats.ks_2samp(part(g), part(pool)).statistic for part in (np.real, np.imag))
    small = max(ks[2000]) < 0.05
    decreasing = all(ks[500][i] > ks[1000][i] > ks[2000][i] for i in range(2))
    detail = ", ".join(f"N={N}: Re {r:.4f} Im {i:.4f}" for N, (r, i) in ks.items())
    assert report(8, small and decreasing, f"KS {detail}; below 0.05 at N=2000: {small}, decreasing in N: {decreasing}")


def test_criterion_09_phase_diagnostic(report):
    alpha = 0.5
    E_mob = edge.mobility_edge(alpha).E_mob
    grid = [f * E_mob for f in (0.05, 0.15, 0.3, 0.45, 0.6, 1.5, 2.0, 2.5, 3.0, 4.0)]
    res = matrix.phase_diagnostic(alpha, grid, 2000, (0.2, 0.05, 0.004), reps=10, seed=1010,
                                  widths=(0.4, 0.2, 0.1), lambda_fn=lambda E: edge.lambda_(E, alpha),
                                  E_mob=E_mob, window=0.25)
    rows = res.scored()
    bounded = all(r.q_label == "delocalized" for r in rows if r.predicted == "delocalized")
    growing = all(r.q_label == "localized" for r in rows if abs(r.E) > E_mob)
    ok = res.agreement >= 0.8 and bounded and growing
    table = " ".join(f"{r.E / E_mob:.2f}:{r.label[0]}/{r.q_label[0]}/{r.predicted[0]}" for r in rows)
    assert report(9, ok, f"agreement {res.agreement:.2f} (tol 0.8), Q_I bounded where lambda>1: {bounded}, "
                         f"Q_I growing past E_mob: {growing}; E/E_mob:label/q_label/predicted {table}")


def test_criterion_10_fractional_moments(report):
    alpha, s = 0.3, 0.45
    E_mob = edge.mobility_edge(alpha).E_mob
    E = 3 * E_mob
    pop = rde.run_population(E + 1e-3j, alpha, 200_000, burn_in=60, seed=1011)
    # stabilization: L |phi_L - phi_2L| stays below C = 1
    rates = {L: pwit.spine_phi(pop, s, L, n=1_000_000, seed=1012 + L).phi_rate for L in (2, 4, 8)}
    stab = [2 * abs(rates[2] - rates[4]), 4 * abs(rates[4] - rates[8])]
    stabilizes = max(stab) < 1.0
    # divergence as s -> alpha: Phi_1 grows at least like 1 / (s - alpha)
    gaps = (0.2, 0.05, 0.0125)
    phi1 = [pwit.spine_phi(pop, alpha + g, 1, n=1_000_000, seed=1020).phi_L for g in gaps]
    diverges = bool(np.all(np.diff(phi1) > 0)) and phi1[-1] * gaps[-1] > 0.5 * phi1[0] * gaps[0]
    # decay in |E|
    decay = []
    for far in (2 * E, 8 * E, 32 * E):
        p = rde.run_population(far + 1e-3j, alpha, 100_000, burn_in=40, seed=1030)
        decay.append(pwit.spine_phi(p, s, 4, n=1_000_000, seed=1031).phi_rate)
    decays = bool(np.all(np.diff(decay) < 0))
    # phi = lim (log Phi_8 - log Phi_4) / 4; error from independent replicates
    reps = []
    for k in range(8):
        lo, hi = (pwit.spine_phi(pop, s, L, n=2_000_000, seed=2000 + 10 * k + L) for L in (4, 8))
        reps.append((math.log(hi.phi_L) - math.log(lo.phi_L)) / 4)
    phi = float(np.mean(reps))
    err = float(np.std(reps, ddof=1) / math.sqrt(len(reps)))
    target = math.log(edge.lambda_s(E, s, alpha))
    bootstrap = abs(phi - target) < 3 * err
    ok = stabilizes and diverges and decays and bootstrap
    assert report(10, ok, f"L|phi_L - phi_2L| {stab[0]:.3f}, {stab[1]:.3f} (tol 1); Phi_1 at s-alpha "
                          f"{gaps}: {', '.join(f'{v:.3g}' for v in phi1)}; phi_4 at E x 2,8,32: "
                          f"{', '.join(f'{v:.3f}' for v in decay)}; phi {phi:.4f} +- {err:.4f} "
                          f"vs log lambda {target:.4f} (tol 3 err)")


def test_criterion_11_duality(report):
    rng = np.random.default_rng(1011)
    worst, checked = math.inf, 0
    for _ in range(40):
        sample = matrix.spectral_sample(matrix.sample_matrix(int(rng.integers(50, 301)),
                                                             float(rng.uniform(0.1, 0.95)), rng))
        for _ in range(5):
            center, width = rng.uniform(-3, 3), 10 ** rng.uniform(-2, 0.5)
            if not np.any(np.abs(sample.eigenvalues - center) <= width):
                continue
            for s in (0.3, 0.5, 0.7):
                q2, q_half = matrix.ipr(sample, (center - width, center + width), 0.5 * s)
                worst = min(worst, q_half * q2 ** (1 - 0.5 * s))
                checked += 1
    ok = worst >= 1 - 1e-12
    assert report(11, ok, f"min Q_I(s/2) Q_I(2)^(1-s/2) = {worst:.6f} over {checked} instances (tol >= 1)")
