import itertools

import numpy as np
import pytest

from distspace import CovarianceForm, GaussianMeasure, Grid, bump, inner
from distspace.correlation import (
    correlation_deriv,
    correlation_mc,
    correlation_mc_many,
    correlation_wick,
    mean_pairing,
    perfect_matchings,
    polarization,
)
from distspace.errors import StepError
from distspace.gaussian import riesz_embed


@pytest.fixture(scope="module")
def grid():
    return Grid(1, 2.0, 0.02)


@pytest.fixture(scope="module")
def mu(grid):
    return GaussianMeasure(CovarianceForm.inverse_laplacian(grid), seed=5)


def unit_b(mu, q):
    return q * (1 / np.sqrt(mu.covariance(q)))


def test_perfect_matchings_count():
    assert list(perfect_matchings([])) == [[]]
    for n, count in [(2, 1), (4, 3), (6, 15), (8, 105)]:
        ms = list(perfect_matchings(range(n)))
        assert len(ms) == count
        assert len({tuple(sorted(m)) for m in ms}) == count


def test_wick_small_orders(mu, grid):
    B = mu.covariance
    q1, q2, q3 = bump(grid, 0.1, 0.6), bump(grid, -0.2, 0.9, -1.3), bump(grid, 0.4, 0.5)
    assert correlation_wick(B, [q1, q2]) == pytest.approx(B.bilinear(q1, q2), rel=1e-12)
    assert polarization(B, q1, q2) == pytest.approx(B.bilinear(q1, q2), rel=1e-12)
    assert correlation_wick(B, [q1, q2, q3]) == 0
    assert correlation_wick(B, []) == 1
    q = unit_b(mu, q1)
    assert correlation_wick(B, [q] * 4) == pytest.approx(3.0, rel=1e-12)


def test_wick_is_order_independent(mu, grid):
    qs = [bump(grid, c, 0.6, a) for c, a in [(0.1, 1), (-0.3, 2), (0.5, -1), (0.0, 0.5)]]
    ref = correlation_wick(mu.covariance, qs)
    for perm in itertools.permutations(qs):
        assert correlation_wick(mu.covariance, perm) == ref
    assert correlation_deriv(mu, qs[::-1]) == correlation_deriv(mu, qs)


def test_deriv_matches_wick(mu, grid):
    q1, q2 = bump(grid, 0.1, 0.6), bump(grid, -0.2, 0.9, -1.3)
    w = correlation_wick(mu.covariance, [q1, q2])
    assert abs(correlation_deriv(mu, [q1, q2]) - w) <= 1e-8 * abs(w)
    assert abs(correlation_deriv(mu, [q1])) <= 1e-10
    q = unit_b(mu, q1)
    assert abs(correlation_deriv(mu, [q] * 4) - 3) <= 1e-5
    assert correlation_deriv(mu, []) == 1


def test_deriv_step_errors(mu, grid):
    q = bump(grid)
    with pytest.raises(StepError):
        correlation_deriv(mu, [q] * 5)
    with pytest.raises(StepError):
        correlation_deriv(mu, [q] * 4, step=1e-12)
    with pytest.raises(StepError):
        correlation_deriv(mu, [q], step=0.0)


def test_mc_correlations(mu, grid):
    assert correlation_mc(mu, [], 1000) == (1.0, 0.0)
    q1, q2 = bump(grid, 0.1, 0.6), bump(grid, -0.2, 0.9, -1.3)
    m, e = correlation_mc(mu, [q1, q2], 100_000)
    assert abs(m - correlation_wick(mu.covariance, [q1, q2])) <= 5 * e
    q = unit_b(mu, q1) * 0.7
    m, e = correlation_mc(mu, [q] * 4, 100_000)
    assert abs(m - 3 * mu.covariance(q) ** 2) <= 5 * e
    with pytest.raises(ValueError):
        correlation_mc(mu, [q1], 10)


def test_mc_many_matches_single(mu, grid):
    q1, q2, q3 = bump(grid, 0.1, 0.6), bump(grid, -0.2, 0.9, -1.3), bump(grid, 0.3, 0.4)
    est, err = correlation_mc_many(mu, [[q1, q2], [q3, q1]], 2000)
    single = correlation_mc(mu, [q1, q2], 2000)
    assert est[0] == single[0] and err[0] == single[1]


def test_mean_pairing(mu, grid):
    phi = bump(grid, 0.1, 0.8, 2.0)
    assert abs(mean_pairing(mu, phi)) <= 1e-10
    psi = bump(grid, -0.3, 1.2, 1.5)
    shifted = mu.shifted(riesz_embed(psi))
    assert abs(mean_pairing(shifted, phi) - inner(phi, psi)) <= 1e-8
    m, e = correlation_mc(shifted, [phi], 50_000)
    assert abs(m - inner(phi, psi)) <= 5 * e
    assert abs(mean_pairing(shifted, phi, samples=2000) - inner(phi, psi)) <= 1e-8
