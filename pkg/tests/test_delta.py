import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distspace import Distribution, Grid, Measure, Point, ProbeFamily, bump, interpolate, pair
from distspace import delta
from distspace.delta import (
    delta_add,
    delta_scale,
    dirac_measure_embed,
    embed_delta,
    translation_invariance_check,
    weakstar_semidist,
)
from distspace.errors import NonAtomicError, OutOfBoxError, ProbeError, SupportError
from distspace.measure import integrate_against_measure


@pytest.fixture(scope="module")
def coarse():
    return Grid(1, 2.0, 0.05)


def test_embed_delta_pairs_to_values(g1):
    b = bump(g1)
    assert pair(b, embed_delta(g1, 0.0)) == np.exp(-1)
    assert pair(b, embed_delta(g1, 0.3)) == interpolate(b, 0.3)
    with pytest.raises(OutOfBoxError):
        embed_delta(g1, 6.0)


def test_delta_vector_laws(g1):
    assert delta_add(embed_delta(g1, 1.0), embed_delta(g1, 2.0)).same_as(embed_delta(g1, 3.0))
    assert delta_scale(2.0, embed_delta(g1, 1.5)).same_as(embed_delta(g1, 3.0))
    for x in (-4.0, 0.3, 2.7):
        assert delta_scale(0.0, embed_delta(g1, x)).same_as(embed_delta(g1, 0.0))


def test_delta_ops_need_unit_deltas(g1):
    w = embed_delta(g1, 1.0) * 2.0
    with pytest.raises(NonAtomicError):
        delta_add(w, embed_delta(g1, 0.0))
    with pytest.raises(NonAtomicError):
        delta_scale(1.0, embed_delta(g1, 0.0) + embed_delta(g1, 1.0))
    with pytest.raises(OutOfBoxError):
        delta_add(embed_delta(g1, 3.0), embed_delta(g1, 3.0))


@settings(max_examples=200, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_delta_laws_property(x, y, lam):
    g = Grid(1, 5.0, 0.01)
    dx, dy = embed_delta(g, x), embed_delta(g, y)
    assert delta_add(dx, dy).same_as(embed_delta(g, x + y))
    assert delta_add(dx, dy).same_as(delta_add(dy, dx))
    assert delta_scale(lam, dx).same_as(embed_delta(g, lam * x))


def test_probe_family_default(coarse):
    P = ProbeFamily.default(coarse)
    assert len(P) > 10
    assert P.radius == pytest.approx(0.2)
    with pytest.raises(ProbeError):
        ProbeFamily(coarse, ())
    b = bump(coarse)
    with pytest.raises(ProbeError, match="duplicate"):
        ProbeFamily(coarse, (b, b))


def test_semidist_basic(coarse):
    P = ProbeFamily.default(coarse)
    w = embed_delta(coarse, 0.37)
    assert weakstar_semidist(w, w, P) == 0
    assert weakstar_semidist(embed_delta(coarse, 0.0), embed_delta(coarse, 0.05), P) > 0
    with pytest.raises(ProbeError):
        weakstar_semidist(w, w, [bump(coarse)])


def test_semidist_lipschitz_bound(coarse):
    P = ProbeFamily.default(coarse)
    C = delta.lipschitz_constant(P)
    assert C > 0
    d0 = embed_delta(coarse, 0.0)
    prev = np.inf
    for k in range(1, 60):
        x = 1.0 / k
        sd = weakstar_semidist(embed_delta(coarse, x), d0, P)
        assert sd <= C * x * (1 + 1e-12)
        prev = min(prev, sd)
    assert prev < 0.05


def test_separation_over_node_pairs(coarse):
    P = ProbeFamily.default(coarse)
    scan = delta.separation_scan(P)
    assert scan["min_semidist"] > 0
    assert scan["separation_lower"] > 0
    n = len(delta.covered_nodes(P))
    assert scan["pairs"] == n * (n - 1) // 2
    # chunking does not change the answer
    again = delta.separation_scan(P, chunk=7)
    assert again["min_semidist"] == scan["min_semidist"]


def test_homeo_sweep_monotone(coarse):
    sweep = delta.homeo_sweep(ProbeFamily.default(coarse))
    sd = [s for _, s in sweep]
    assert all(b <= a for a, b in zip(sd, sd[1:]))
    assert sd[-1] < 1e-6


def test_dirac_measure_embed(g1):
    eps = dirac_measure_embed(g1, 0.42)
    b = bump(g1, 0.2, 1.0)
    assert integrate_against_measure(b, eps) == interpolate(b, 0.42)


def test_translation_invariance(coarse):
    probes = tuple(bump(coarse, c, 0.3) for c in (-0.4, 0.0, 0.5))
    P = ProbeFamily(coarse, probes)
    assert translation_invariance_check(P, [0.0]) == 0
    # shifts by whole nodes are exact up to rounding
    dev = translation_invariance_check(P, [0.05, -0.2, 0.5])
    assert dev < 1e-12
    # off-node shifts change the lattice sum by a quadrature-size amount
    def g(v):
        return np.sum(v**2, axis=0)

    f0 = coarse.cell_volume * np.sum(g(P.node_values()))
    assert translation_invariance_check(P, [0.013, -0.031], g) < 0.05 * f0


def test_translation_check_rejects_escape(coarse):
    P = ProbeFamily(coarse, (bump(coarse, 1.0, 0.8),))
    with pytest.raises(SupportError):
        translation_invariance_check(P, [0.5])
    with pytest.raises(ValueError):
        translation_invariance_check(P, [0.0], lambda v: np.ones(v.shape[1]))


def test_weakstar_accepts_measure(coarse):
    P = ProbeFamily.default(coarse)
    eps = Measure(coarse, atoms=[(Point((0.3,)), 1.0)])
    assert weakstar_semidist(eps, embed_delta(coarse, 0.3), P) == 0
    assert weakstar_semidist(Distribution.zero(coarse), embed_delta(coarse, 0.3), P) > 0
