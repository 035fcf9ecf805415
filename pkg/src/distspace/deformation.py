"""Quantum deformations ``phi^(z) = phi(z) + s_z(phi)`` of test functions.

An :class:`InjectionField` assigns a distribution ``s_z`` to every point of
the (product) grid box.  The deformed function is evaluated only through
the pairing ``s_z(phi) = <phi, s_z>``; ``phi`` is never evaluated on a
distribution argument.
"""

from __future__ import annotations

import itertools

import numpy as np

from .delta import ProbeFamily, embed_delta
from .errors import GridMismatchError, SymmetryError, WindowError
from .grid import Distribution, Grid, Point, TestFunction, _check_same_grid, as_point, interpolate, pair


class InjectionField:
    """Rule ``z -> s_z`` evaluated lazily; ``rule`` must be side-effect free."""

    def __init__(self, grid: Grid, rule, name: str = "custom", params=None):
        self.grid = grid
        self._rule = rule
        self.name = name
        self.params = dict(params or {})

    def __repr__(self):
        return f"InjectionField({self.name}, grid={self.grid})"

    def at(self, z) -> Distribution:
        z = self.grid.check_point(z)
        s = self._rule(z)
        _check_same_grid(self.grid, s.grid)
        return s

    @classmethod
    def zero(cls, grid: Grid) -> "InjectionField":
        return cls(grid, lambda z: Distribution.zero(grid), "zero")

    @classmethod
    def delta_self(cls, grid: Grid) -> "InjectionField":
        """``s_z = delta_z``, so that ``s_phi = phi``."""
        return cls(grid, lambda z: embed_delta(grid, z), "delta_self")

    @classmethod
    def swap(cls, grid: Grid) -> "InjectionField":
        """``s_{(x, y)} = delta_{(y, x)}`` on ``E ⊕ E``."""
        if grid.dim % 2:
            raise GridMismatchError("swap injection needs an even-dimensional product grid")
        n = grid.dim // 2
        return cls(grid, lambda z: embed_delta(grid, np.concatenate([z[n:], z[:n]])), "swap")

    @classmethod
    def weighted_delta(cls, grid: Grid, weight=None) -> "InjectionField":
        """``s_z = weight(z) delta_z``; default weight on ``E ⊕ E`` is ``x^1 - y^1``."""
        if weight is None:
            if grid.dim % 2:
                raise GridMismatchError("default weight needs an even-dimensional product grid")
            n = grid.dim // 2

            def weight(z):
                return z[0] - z[n]

        return cls(grid, lambda z: Distribution(grid, [(Point(tuple(z)), weight(z))]), "weighted_delta")

    @classmethod
    def constant(cls, w: Distribution) -> "InjectionField":
        """``s_z = w`` for every ``z``."""
        return cls(w.grid, lambda z: w, "constant", {"w": w})

    @classmethod
    def atomic_table(cls, grid: Grid, table: dict) -> "InjectionField":
        """``s_z`` looked up by node index tuple; zero off the table (not continuous in general)."""
        table = dict(table)
        M, h = grid.half_per_axis, grid.spacing

        def rule(z):
            key = tuple(int(i) for i in np.rint(z / h).astype(int) + M)
            return table.get(key, Distribution.zero(grid))

        return cls(grid, rule, "atomic_table")


class DeformedFunction:
    """``phi^ = phi + s_phi``; either a full injection field or a constant shift."""

    def __init__(self, base: TestFunction, injection: InjectionField | None = None, shift: complex | None = None):
        if (injection is None) == (shift is None):
            raise ValueError("give exactly one of injection or shift")
        if injection is not None:
            _check_same_grid(base.grid, injection.grid)
        self.base = base
        self.injection = injection
        self.shift = shift

    def value(self, z) -> complex:
        local = interpolate(self.base, z)
        if self.injection is not None:
            return local + pair(self.base, self.injection.at(z))
        return local + self.shift

    __call__ = value


def deform(phi: TestFunction, s: InjectionField) -> DeformedFunction:
    """``phi^(z) = phi(z) + <phi, s_z>``."""
    _check_same_grid(phi.grid, s.grid)
    return DeformedFunction(phi, injection=s)


def deform_state(phi: TestFunction, f, k: int | None = None) -> DeformedFunction:
    """State-induced deformation ``phi^ = phi + f_k(phi)``.

    ``f`` is either the distribution ``W_k`` itself or a
    :class:`~distspace.borchers.State` from which component ``k`` (inferred
    from ``phi``'s grid when omitted) is taken.
    """
    from .borchers import State

    if isinstance(f, State):
        base_dim = f.base.dim
        if k is None:
            if phi.grid.dim % base_dim:
                raise GridMismatchError("test function grid is not a power of the state's base grid")
            k = phi.grid.dim // base_dim
        if phi.grid != f.base.power(k):
            raise GridMismatchError(f"degree {k} does not match the test function's grid")
        w = f.component(k)
    else:
        w = f
    _check_same_grid(phi.grid, w.grid)
    return DeformedFunction(phi, shift=pair(phi, w))


def _swap_blocks(values, n):
    axes = list(range(n, 2 * n)) + list(range(n))
    return np.transpose(values, axes)


def check_symmetric(phi: TestFunction, tol: float = 1e-12):
    if phi.grid.dim % 2:
        raise SymmetryError("need a function on E ⊕ E")
    n = phi.grid.dim // 2
    gap = float(np.abs(phi.values - _swap_blocks(phi.values, n)).max())
    if gap > tol:
        raise SymmetryError(f"phi(u, v) differs from phi(v, u) by {gap:.3e}")


def commutator(phi: TestFunction, s: InjectionField, x, y) -> complex:
    """``phi^(x, y) - phi^(y, x)`` for symmetric ``phi`` on ``E ⊕ E``."""
    check_symmetric(phi)
    xy = np.concatenate([np.asarray(as_point(x)), np.asarray(as_point(y))])
    yx = np.concatenate([np.asarray(as_point(y)), np.asarray(as_point(x))])
    dphi = deform(phi, s)
    return dphi(xy) - dphi(yx)


def commutator_pairing(phi: TestFunction, s: InjectionField, x, y) -> complex:
    """``<phi, s_{x,y}> - <phi, s_{y,x}>``, the value the commutator must equal."""
    xy = np.concatenate([np.asarray(as_point(x)), np.asarray(as_point(y))])
    yx = np.concatenate([np.asarray(as_point(y)), np.asarray(as_point(x))])
    return pair(phi, s.at(xy)) - pair(phi, s.at(yx))


def _cell_nodes(grid: Grid, pt) -> list:
    """Node index tuples that carry nonzero interpolation weight at ``pt``."""
    t = np.asarray(pt) / grid.spacing + grid.half_per_axis
    near = np.rint(t)
    t = np.where(np.abs(t - near) < 1e-9, near, t)
    i0 = np.clip(np.floor(t).astype(int), 0, grid.nodes_per_axis - 2)
    frac = t - i0
    out = []
    for corner in itertools.product((0, 1), repeat=grid.dim):
        c = np.asarray(corner)
        if np.all(np.where(c == 1, frac, 1 - frac) != 0):
            out.append(tuple(i0 + c))
    return out


def coordinate_commutation(s: InjectionField, x, window: TestFunction) -> tuple:
    """Deformed values of ``x^1 x^2`` and ``x^2 x^1`` at ``x``.

    Both coordinate products are multiplied by ``window`` to enter D(E);
    ``window`` must equal 1 on every node that ``s_x`` (and the evaluation
    at ``x``) touches.
    """
    grid = s.grid
    _check_same_grid(grid, window.grid)
    if grid.dim < 2:
        raise GridMismatchError("coordinate example needs dim >= 2")
    x = grid.check_point(x)
    sx = s.at(x)
    touched = list(_cell_nodes(grid, x))
    for pt, _ in sx.atoms:
        touched.extend(_cell_nodes(grid, np.asarray(pt)))
    if sx.density is not None:
        touched.extend(map(tuple, np.argwhere(sx.density != 0)))
    flat = window.values
    if any(flat[idx] != 1 for idx in touched):
        raise WindowError("s_x reaches nodes outside the window's flat region")
    X = np.broadcast_to(grid.coords[0], grid.shape)
    Y = np.broadcast_to(grid.coords[1], grid.shape)
    f12 = window.times(X * Y)
    f21 = window.times(Y * X)
    c12 = interpolate(f12, x) + pair(f12, sx)
    c21 = interpolate(f21, x) + pair(f21, sx)
    return c12, c21


def quantum_point(x, s: InjectionField) -> Distribution:
    """``delta_x + s_x``, the image of ``x`` in the quantum space."""
    return embed_delta(s.grid, x) + s.at(x)


def _pairing_vectors(s: InjectionField, probes: ProbeFamily, pts):
    return np.array([[pair(p, quantum_point(z, s)) for p in probes.probes] for z in pts])


def injectivity_scan(s: InjectionField, probes: ProbeFamily, pts) -> dict:
    """Smallest ``semidist(delta_z + s_z, delta_z' + s_z')`` over distinct sample points.

    Returns the minimum and a minimizing pair so failures can be reported.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    V = _pairing_vectors(s, probes, pts)
    best, where = np.inf, None
    for i in range(len(pts)):
        sd = np.abs(V[i + 1:] - V[i]).max(axis=1) if i + 1 < len(pts) else np.array([])
        if sd.size and sd.min() < best:
            j = int(sd.argmin()) + i + 1
            best, where = float(sd.min()), (tuple(pts[i]), tuple(pts[j]))
    return {"min_semidist": best, "pair": where}


def lipschitz_estimate(s: InjectionField, probes: ProbeFamily, pairs) -> float:
    """Largest ``semidist(s_z, s_z') / |z - z'|`` over the sampled pairs."""
    worst = 0.0
    for z1, z2 in pairs:
        z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
        d = float(np.linalg.norm(z1 - z2))
        if d == 0:
            continue
        diff = s.at(z1) - s.at(z2)
        worst = max(worst, max(abs(pair(p, diff)) for p in probes.probes) / d)
    return worst
