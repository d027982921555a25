import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from levy_edge import edge, stable, transfer
from levy_edge.rde import kappa_loc_params


@pytest.fixture(scope="module")
def kernel():
    return transfer.build_kernel(1.0, 0.75, 0.5)


def test_kernel_positive_and_weighted_bounded(kernel):
    assert np.all(kernel.F1 > 0) and np.all(kernel.F2 > 0)
    w = kernel.weight()
    for F in (kernel.F1, kernel.F2):
        scaled = w * F
        assert np.all(np.isfinite(scaled))
        # bounded: the far tails are no larger than the bulk
        far = np.abs(kernel.x) > 1e6
        assert scaled[far].max() <= scaled.max()
        assert scaled[far].max() < 10.0
    assert np.all(np.isfinite(kernel.pairing))


def test_pairing_matches_monte_carlo():
    E, s, alpha = 1.0, 0.5, 0.3
    k = transfer.build_kernel(E, s, alpha)
    pair = edge.solve_ab(E, alpha)
    d = E + stable.sample_stable(kappa_loc_params(pair.a, pair.b, alpha), 1_000_000, seed=15)
    lo, hi = 0.5 * (s - alpha), 0.5 * (s + alpha)
    pos = np.where(d > 0, np.abs(d), np.inf) ** (-alpha)
    neg = np.where(d < 0, np.abs(d), np.inf) ** (-alpha)
    # inner u-integrals reduce to Beta functions of |E + kappa|
    samples = {
        (0, 0): special.beta(lo, 1 - hi) * pos,
        (0, 1): special.beta(lo, alpha) * pos + special.beta(1 - hi, alpha) * neg,
        (1, 0): special.beta(1 - hi, alpha) * pos + special.beta(lo, alpha) * neg,
        (1, 1): special.beta(lo, 1 - hi) * neg,
    }
    for (i, j), vals in samples.items():
        vals = 0.5 * alpha * vals
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - k.pairing[i, j]) < 3 * se


def test_perron_rank2_matches_lambda_s(kernel):
    lam, vec = transfer.perron_rank2(kernel)
    assert lam > 0
    assert min(vec) > 0
    assert lam == pytest.approx(edge.lambda_s(1.0, 0.75, 0.5), rel=1e-3)


def test_perron_grid_converges(kernel):
    lam, f = transfer.perron_grid(kernel, iters=50)
    assert np.all(f >= 0)
    assert lam == pytest.approx(transfer.perron_rank2(kernel)[0], rel=1e-6)


def test_refinement_stable(kernel):
    fine = transfer.build_kernel(1.0, 0.75, 0.5, resolution=2)
    assert transfer.perron_rank2(fine)[0] == pytest.approx(transfer.perron_rank2(kernel)[0], rel=1e-4)


def test_square_is_rank_two(kernel):
    rng = np.random.default_rng(16)
    f = rng.uniform(0.5, 1.5, size=kernel.x.size) / kernel.weight()
    direct = transfer.apply_kernel(kernel, transfer.apply_kernel(kernel, f))
    c = np.array([kernel.pair1 @ f, kernel.pair2 @ f])
    m = kernel.pairing @ c
    rebuilt = m[0] * kernel.F1 + m[1] * kernel.F2
    assert np.allclose(direct, rebuilt, rtol=1e-12)


def test_square_lower_bound(kernel):
    rng = np.random.default_rng(17)
    f = rng.uniform(0.1, 1.0, size=kernel.x.size) / kernel.weight()
    g = transfer.apply_kernel(kernel, transfer.apply_kernel(kernel, f))
    scaled = g * (1 + np.abs(kernel.x) ** (1 + 0.5 * (kernel.alpha - kernel.s)))
    assert scaled.min() > 1e-3 * scaled.max()


@settings(max_examples=200, deadline=None)
@given(re=st.floats(0.01, 10.0), im=st.floats(-10.0, 10.0), alpha=st.floats(0.05, 0.95),
       frac=st.floats(0.01, 1.0))
def test_ell_matrix_radius_is_lambda(re, im, alpha, frac):
    s = alpha + (1 - alpha) * frac
    value = complex(re, im)
    radius = np.max(np.abs(np.linalg.eigvals(transfer.ell_pairing_matrix(value, alpha, s))))
    assert radius == pytest.approx(edge.lambda_from_ell(value, alpha, s), rel=1e-8)


def test_ell_matrix_at_kernel_point():
    value = edge.ell(1.0, 0.5)
    radius = np.max(np.abs(np.linalg.eigvals(transfer.ell_pairing_matrix(value, 0.5, 0.75))))
    assert radius == pytest.approx(edge.lambda_s(1.0, 0.75, 0.5), rel=1e-8)


def test_write_eigenfunction(tmp_path, kernel):
    _, f = transfer.perron_grid(kernel)
    path = tmp_path / "f.csv"
    transfer.write_eigenfunction(path, kernel, f)
    rows = path.read_text().splitlines()
    assert rows[0] == "x,f_E"
    assert len(rows) == kernel.x.size + 1


@pytest.mark.parametrize("s, alpha", [(0.3, 0.5), (1.0, 0.5), (0.5, 1.0)])
def test_invalid_exponents(s, alpha):
    with pytest.raises(ValueError):
        transfer.build_kernel(1.0, s, alpha)
