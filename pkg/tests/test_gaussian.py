import numpy as np
import pytest
from scipy import stats

from distspace import CovarianceForm, Distribution, GaussianMeasure, Grid, TestFunction, bump, inner, pair
from distspace.errors import CholeskyError, HermitianError
from distspace.gaussian import (
    bochner_check,
    hellinger_affinity,
    hellinger_affinity_mc,
    log_rn_density,
    mc_charfun,
    riesz_embed,
    trace_diagnostic,
    trace_sweep,
    translate_quasi_invariance,
)


@pytest.fixture(scope="module")
def small():
    return Grid(1, 2.0, 0.02)


@pytest.fixture(scope="module")
def mu_small(small):
    return GaussianMeasure(CovarianceForm.inverse_laplacian(small), seed=3)


def unit_bump(grid, c=0.0, r=1.0):
    b = bump(grid, c, r)
    return b * (1 / np.sqrt(inner(b, b).real))


def test_charfun_basics(small):
    mu = GaussianMeasure(CovarianceForm.scaled_identity(small, 1.0))
    assert mu.charfun(TestFunction.zero(small)) == 1
    q = unit_bump(small)
    assert mu(q) == pytest.approx(np.exp(-1), rel=1e-14)


def test_charfun_degenerate_limit(small):
    psi = bump(small, 0.3, 0.8, 2.0)
    q = bump(small, -0.1, 1.0)
    mu = GaussianMeasure(CovarianceForm.inverse_laplacian(small, scale=1e-14), mean=riesz_embed(psi))
    assert mu(q) == pytest.approx(np.exp(1j * inner(q, psi)), abs=1e-12)


def test_covariance_form_properties(small, mu_small):
    B = mu_small.covariance
    q1, q2 = bump(small, 0.2, 0.5), bump(small, -0.3, 0.9, 1.5)
    assert B.bilinear(q1, q2) == pytest.approx(B.bilinear(q2, q1), rel=1e-13)
    assert B(q1) > 0
    L = B.cholesky
    assert np.allclose(L @ L.T, B.C, atol=1e-14)
    assert np.allclose(B.node_covariance(), B.C / small.spacing)
    K = B.K
    Kinv = np.linalg.inv(K)
    assert np.allclose(Kinv.T @ Kinv, B.C, atol=1e-10)


def test_from_operator_and_cholesky_failure(small):
    d = small.dof
    B = CovarianceForm.from_operator(small, 2.0 * np.eye(d))
    q = unit_bump(small)
    assert B(q) == pytest.approx(0.25, rel=1e-12)
    bad = CovarianceForm.from_covariance(small, -np.eye(d))
    with pytest.raises(CholeskyError):
        bad.cholesky
    with pytest.raises(ValueError):
        CovarianceForm.from_covariance(small, np.triu(np.ones((d, d))))


def test_sample_moments(mu_small, small):
    q = bump(small, 0.1, 0.7)
    N = 100_000
    p = mu_small.sample_pairings([q], N)[:, 0].real
    b = mu_small.covariance(q)
    assert abs(p.mean()) <= 4 * np.sqrt(b / N)
    assert abs(p.var() / b - 1) <= 5 / np.sqrt(N)


def test_sample_matches_projection(mu_small, small):
    qs = [bump(small, 0.1, 0.7), bump(small, -0.5, 1.0, 2.0)]
    ws = mu_small.sample(300)
    direct = np.array([[pair(q, w) for q in qs] for w in ws])
    assert np.allclose(direct, mu_small.sample_pairings(qs, 300), rtol=1e-12, atol=1e-13)


def test_sample_determinism(mu_small, small, monkeypatch):
    q = bump(small, 0.1, 0.7)
    a = mu_small.sample_pairings([q], 5000)
    b = mu_small.sample_pairings([q], 5000)
    assert np.array_equal(a, b)
    monkeypatch.setenv("DISTSPACE_THREADS", "1")
    c = mu_small.sample_pairings([q], 5000)
    monkeypatch.setenv("DISTSPACE_THREADS", "4")
    d = mu_small.sample_pairings([q], 5000)
    assert np.array_equal(a, c) and np.array_equal(a, d)
    assert not np.array_equal(a, mu_small.with_seed(4).sample_pairings([q], 5000))


def test_mc_charfun(mu_small, small):
    assert mc_charfun(mu_small, TestFunction.zero(small), 1000) == (1.0, 0.0)
    q = bump(small, 0.0, 1.0, 3.0)
    est, err = mc_charfun(mu_small, q, 20_000)
    assert abs(est - mu_small(q)) <= 5 * err
    neg, _ = mc_charfun(mu_small, -q, 20_000)
    assert neg == np.conj(est)
    with pytest.raises(ValueError):
        mc_charfun(mu_small, q, 10)


def test_bochner(mu_small, small, rng):
    assert bochner_check(mu_small, [bump(small)]) == pytest.approx(1.0)
    qs = [bump(small, rng.uniform(-0.8, 0.8), rng.uniform(0.3, 1.0), rng.uniform(-3, 3)) for _ in range(32)]
    assert bochner_check(mu_small, qs) >= -1e-10

    def corrupted(q):
        return np.exp(0.5 * mu_small.covariance.bilinear(q, q))

    assert bochner_check(corrupted, qs) < 0
    with pytest.raises(HermitianError):
        bochner_check(lambda q: 1 + q.values.real.sum(), qs)


def test_riesz_embed(small):
    q = bump(small, 0.2, 0.8, 1 - 2j)
    qq = bump(small, -0.1, 1.0, 0.5j)
    assert pair(qq, riesz_embed(q)) == pytest.approx(inner(qq, q), rel=1e-14)


def test_rn_density_against_scipy(rng):
    g = Grid(1, 1.2, 0.05)
    assert g.dof <= 50
    mu = GaussianMeasure(CovarianceForm.inverse_laplacian(g), seed=1)
    q = bump(g, 0.1, 0.7, 2.0)
    Sigma = mu.covariance.node_covariance()
    v = riesz_embed(q).density.real.ravel()
    for w in mu.sample(5):
        u = w.density.real.ravel()
        ref = stats.multivariate_normal(v, Sigma).logpdf(u) - stats.multivariate_normal(np.zeros(g.dof), Sigma).logpdf(u)
        assert log_rn_density(mu, q, w) == pytest.approx(ref, abs=1e-8)


def test_rn_mean_is_one(mu_small, small):
    assert translate_quasi_invariance(mu_small, TestFunction.zero(small), 1000) == (1.0, 0.0)
    mean, err = translate_quasi_invariance(mu_small, bump(small, 0.2, 0.6, 0.3), 50_000)
    assert abs(mean - 1) <= 5 * err


def test_trace_diagnostic():
    d = 64
    assert trace_diagnostic(np.eye(d)) == d / 2
    assert trace_diagnostic(CovarianceForm.scaled_identity(Grid(1, 1.0, 1 / 31.5), 0.5)) == 0
    assert abs(trace_diagnostic(np.sqrt(2) * np.eye(d))) < 1e-13
    sweep = trace_sweep(np.eye, [4, 16])
    assert sweep == [(4, 2.0, 0.5), (16, 8.0, 0.5)]
    with pytest.raises(ValueError):
        trace_diagnostic(np.ones((2, 3)))


def test_hellinger_closed_form():
    assert hellinger_affinity(1.3, 1.3, 500) == 1.0
    assert hellinger_affinity(1, 2, 1) == pytest.approx(0.8944271909999161, abs=1e-12)
    assert hellinger_affinity(1, 2, 20) == pytest.approx(0.8**10, abs=1e-12)
    vals = [hellinger_affinity(1, 2, d) for d in range(1, 2049)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        hellinger_affinity(0, 1, 3)


def test_hellinger_mc_small():
    est, err = hellinger_affinity_mc(1, 2, 5, 100_000, seed=2)
    exact = [hellinger_affinity(1, 2, d) for d in range(1, 6)]
    assert np.all(np.abs(est - exact) <= 5 * err)
