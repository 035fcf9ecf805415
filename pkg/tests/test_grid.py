import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import INT_BUMP, INT_BUMP2, analytic_bump
from distspace import Distribution, Grid, Point, TestFunction, bump, inner, interpolate, pair, plateau, tensor
from distspace.errors import GridError, GridMismatchError, OutOfBoxError, SupportError
from distspace import grid as gridmod
from distspace.grid import distribution_from_json, distribution_to_json, interpolate_many, quadrature


def test_grid_layout():
    g = Grid(1, 5.0, 0.01)
    assert g.nodes_per_axis == 1001
    assert g.shape == (1001,)
    assert g.axis[500] == 0.0
    assert g.extent == pytest.approx(5.0)
    g2 = Grid(2, 2.0, 0.1)
    assert g2.dof == 41**2
    assert g2.cell_volume == pytest.approx(0.01)
    assert g2.power(2).dim == 4
    assert Grid.from_dict(g2.to_dict()) == g2


def test_grid_rejects_bad_input():
    with pytest.raises(GridError):
        Grid(0, 1.0, 0.1)
    with pytest.raises(GridError):
        Grid(1, 1.0, -0.1)
    with pytest.raises(GridError):
        Grid(1, 0.1, 1.0)
    with pytest.raises(GridError, match="dof budget"):
        Grid(3, 5.0, 0.01)


def test_check_point():
    g = Grid(2, 1.0, 0.1)
    assert np.array_equal(g.check_point(Point((0.5, -1.0))), [0.5, -1.0])
    with pytest.raises(OutOfBoxError):
        g.check_point((1.2, 0.0))
    with pytest.raises(OutOfBoxError):
        g.check_point(0.3)


def test_bump_values(g1):
    b = bump(g1, 0.0, 1.0, 1.0)
    assert b(0.0) == pytest.approx(np.exp(-1))
    assert b(1.0) == 0 and b(-1.5) == 0
    assert abs(b(0.005) - analytic_bump(0.005)) < 1e-4


def test_bump_integral(g1):
    b = bump(g1)
    assert abs(quadrature(g1, b.values) - INT_BUMP) < 1e-4
    assert abs(pair(b, Distribution(g1, density=np.ones(g1.shape))) - INT_BUMP) < 1e-3


def test_inner_of_bump(g1):
    # the quadrature oracle gives 0.13308612 for int bump^2
    b = bump(g1)
    assert abs(inner(b, b) - INT_BUMP2) < 1e-3
    assert inner(b, TestFunction.zero(g1)) == 0


def test_inner_sesquilinear(g1):
    phi, psi = bump(g1, 0.2, 1.0, 1.0), bump(g1, -0.3, 0.8, 2.0 - 1j)
    assert inner(phi * 1j, psi) == pytest.approx(1j * inner(phi, psi), rel=1e-14)
    assert inner(phi, psi * 1j) == pytest.approx(-1j * inner(phi, psi), rel=1e-14)
    assert inner(psi, phi) == pytest.approx(np.conj(inner(phi, psi)), rel=1e-14)


def test_bump_must_fit_in_open_box(g1):
    with pytest.raises(OutOfBoxError):
        bump(g1, 4.5, 1.0)
    with pytest.raises(SupportError):
        bump(g1, 0.0, 0.0)


def test_testfunction_validation(g1):
    v = np.zeros(g1.shape)
    v[0] = 1.0
    with pytest.raises(SupportError, match="outer node layer"):
        TestFunction(g1, v)
    v = np.zeros(g1.shape)
    v[500] = np.nan
    with pytest.raises(SupportError):
        TestFunction(g1, v)
    with pytest.raises(GridMismatchError):
        TestFunction(g1, np.zeros(10))
    v = np.zeros(g1.shape)
    v[700] = 1.0
    with pytest.raises(SupportError):
        TestFunction(g1, v, support_center=0.0, support_radius=1.0)


def test_testfunction_is_immutable(g1):
    b = bump(g1)
    with pytest.raises(ValueError):
        b.values[500] = 3.0


def test_interpolation_at_nodes_and_midpoints():
    g = Grid(1, 1.0, 0.5)
    v = np.array([0.0, 1.0, 3.0, 0.0, 0.0])
    phi = TestFunction(g, v)
    assert interpolate(phi, 0.0) == 3.0
    assert interpolate(phi, -0.25) == 2.0
    assert np.allclose(interpolate_many(phi, [[-0.5], [0.25]]), [1.0, 1.5])


def test_interpolation_2d_bilinear():
    g = Grid(2, 1.0, 0.5)
    X, Y = np.meshgrid(g.axis, g.axis, indexing="ij")
    f = 2 + X - 3 * Y + X * Y
    f[[0, -1], :] = 0
    f[:, [0, -1]] = 0
    phi = TestFunction(g, f)
    x = (0.2, -0.3)
    assert interpolate(phi, x) == pytest.approx(2 + 0.2 + 0.9 - 0.06, abs=1e-14)


def test_tensor_product(g1):
    g = Grid(1, 2.0, 0.05)
    a, b = bump(g, 0.3, 0.5), bump(g, -0.2, 0.7, 2.0)
    t = tensor(a, b)
    assert t.grid == g.power(2)
    assert t((0.3, -0.2)) == pytest.approx(a(0.3) * b(-0.2), rel=1e-14)
    assert inner(t, t) == pytest.approx(inner(a, a) * inner(b, b), rel=1e-12)
    with pytest.raises(GridMismatchError):
        tensor(a, bump(g1))


def test_plateau_is_flat_inside(g2):
    w = plateau(g2, 0.0, 0.8, 1.6)
    inside = (g2.coords[0] ** 2 + g2.coords[1] ** 2) <= 0.8**2
    assert np.all(w.values[np.broadcast_to(inside, g2.shape)] == 1.0)
    assert w((1.7, 0.0)) == 0


def test_pair_is_bilinear(g1, rng):
    phi, psi = bump(g1, 0.1, 1.0), bump(g1, 0.5, 2.0, -1.5)
    w = Distribution(g1, [(Point((0.123,)), 2.0)], density=rng.normal(size=g1.shape))
    v = Distribution(g1, [(Point((-0.7,)), 1j)])
    a, b = 0.3 - 2j, 1.7
    assert pair(phi * a + psi * b, w) == pytest.approx(a * pair(phi, w) + b * pair(psi, w), rel=1e-13)
    assert pair(phi, w * a + v * b) == pytest.approx(a * pair(phi, w) + b * pair(phi, v), rel=1e-13)
    assert pair(TestFunction.zero(g1), w) == 0


def test_pair_with_delta_is_interpolation(g1):
    b = bump(g1, 0.0, 1.0)
    assert pair(b, Distribution(g1, [(Point((0.0,)), 1.0)])) == np.exp(-1)
    assert pair(b, Distribution(g1, [(Point((0.3,)), 1.0)])) == interpolate(b, 0.3)


def test_distribution_json_roundtrip(g2, rng):
    w = Distribution(g2, [(Point((0.1, -0.2)), 1.5 - 0.5j)], density=rng.normal(size=g2.shape))
    for enc in ("base64", "array"):
        d = json.loads(json.dumps(distribution_to_json(w, encoding=enc)))
        back = distribution_from_json(d)
        assert back.same_as(w)
    phi = bump(g2, (0.2, 0.1), 0.9, 1 + 1j)
    back = gridmod.testfunction_from_json(json.loads(json.dumps(gridmod.testfunction_to_json(phi))))
    assert np.array_equal(back.values, phi.values)
    assert back.grid == g2


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-0.5, 0.5),
    st.floats(0.3, 1.0),
    st.floats(-0.9, 0.9),
)
def test_interpolation_error_bound(c, r, t):
    g = Grid(1, 2.0, 0.01)
    x = c + t * r
    err = abs(interpolate(bump(g, c, r), x) - analytic_bump(x, c, r))
    # error of linear interpolation is at most h^2/8 max|f''|, and |f''| scales as 1/r^2
    assert err <= g.spacing**2 / 8 * 7.75 / r**2 + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1.9, 1.9), min_size=1, max_size=4), st.floats(-3, 3))
def test_pair_linear_in_atoms(xs, a):
    g = Grid(1, 2.0, 0.05)
    phi = bump(g, 0.0, 1.5)
    w = Distribution(g, [(Point((x,)), 1.0) for x in xs])
    total = sum(interpolate(phi, x) for x in xs)
    assert pair(phi, w * a) == pytest.approx(a * total, abs=1e-13)
