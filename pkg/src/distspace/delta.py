"""Point embedding x -> delta_x and its numerical weak* checks.

The weak* topology on D'(E) is replaced by the finite family of seminorms
``|<phi_i, w>|`` for probes ``phi_i`` in a :class:`ProbeFamily`; the
homeomorphism and injectivity statements are then checked on lattice
points inside a bounded box.  Nothing in here is claimed beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonAtomicError, OutOfBoxError, ProbeError, SupportError
from .grid import (
    Distribution,
    Grid,
    TestFunction,
    _check_same_grid,
    _interp,
    as_point,
    bump,
    pair,
)
from .measure import Measure, density_to_distribution


@dataclass(frozen=True)
class ProbeFamily:
    grid: Grid
    probes: tuple

    def __post_init__(self):
        probes = tuple(self.probes)
        if not probes:
            raise ProbeError("probe family is empty")
        seen = set()
        for p in probes:
            _check_same_grid(self.grid, p.grid)
            key = p.values.tobytes()
            if key in seen:
                raise ProbeError("probe family contains duplicate probes")
            seen.add(key)
        object.__setattr__(self, "probes", probes)

    def __len__(self):
        return len(self.probes)

    @classmethod
    def default(cls, grid: Grid, stride: int = 4, radius_nodes: int = 4, windowed: bool = True) -> "ProbeFamily":
        """Bumps of radius ``radius_nodes * h`` on every ``stride``-th node, plus
        one coordinate probe ``x_i * w`` per axis, where the window ``w`` is
        the product of 1-D bumps of radius ``L - h`` (so it is nonzero on the
        whole open cube, corners included)."""
        h = grid.spacing
        radius = radius_nodes * h
        M = grid.half_per_axis
        ks = np.arange(-(M // stride) * stride, M + 1, stride)
        ks = ks[np.abs(ks) * h + radius < grid.extent * (1 - 1e-12)]
        probes = []
        for idx in np.array(np.meshgrid(*([ks] * grid.dim), indexing="ij")).reshape(grid.dim, -1).T:
            probes.append(bump(grid, idx * h, radius))
        if windowed:
            R = grid.extent - h
            t = np.clip(grid.axis / R, -1, 1) ** 2
            w1 = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
            wvals = np.ones(grid.shape)
            for c in np.meshgrid(*([w1] * grid.dim), indexing="ij", sparse=True):
                wvals = wvals * c
            window = TestFunction(grid, wvals)
            for i in range(grid.dim):
                probes.append(window.times(np.broadcast_to(grid.coords[i], grid.shape)))
        return cls(grid, tuple(probes))

    @property
    def radius(self) -> float:
        """Smallest probe support radius (the family's resolution scale)."""
        return min(p.support_radius for p in self.probes)

    def values_at(self, pts) -> np.ndarray:
        """Probe values at ``pts``: array of shape ``(len(self), len(pts))``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if not self.grid.contains(pts):
            raise OutOfBoxError("evaluation points outside the box")
        return np.stack([_interp(self.grid, p.values, pts) for p in self.probes])

    def node_values(self) -> np.ndarray:
        """Probe values at every node, shape ``(len(self), dof)``."""
        return np.stack([p.values.ravel() for p in self.probes])


def embed_delta(grid: Grid, x) -> Distribution:
    """``delta_x``: a single atom of weight 1 at ``x``."""
    grid.check_point(x)
    return Distribution(grid, [(as_point(x), 1.0)])


def _unit_atom(w: Distribution) -> np.ndarray:
    if not w.is_unit_delta:
        raise NonAtomicError("expected a unit delta (one atom of weight 1, no density)")
    return np.asarray(w.atoms[0][0])


def delta_add(dx: Distribution, dy: Distribution) -> Distribution:
    """``delta_x ⊕ delta_y = delta_{x+y}``."""
    _check_same_grid(dx.grid, dy.grid)
    return embed_delta(dx.grid, _unit_atom(dx) + _unit_atom(dy))


def delta_scale(lam: float, dx: Distribution) -> Distribution:
    """``lam ⊙ delta_x = delta_{lam x}``."""
    return embed_delta(dx.grid, lam * _unit_atom(dx))


def _as_distribution(w):
    return density_to_distribution(w) if isinstance(w, Measure) else w


def weakstar_semidist(w1, w2, probes: ProbeFamily) -> float:
    """``max_i |<phi_i, w1 - w2>|`` over the probe family."""
    if not isinstance(probes, ProbeFamily) or len(probes) == 0:
        raise ProbeError("weakstar_semidist needs a non-empty ProbeFamily")
    diff = _as_distribution(w1) - _as_distribution(w2)
    return float(max(abs(pair(p, diff)) for p in probes.probes))


def lipschitz_constant(probes: ProbeFamily) -> float:
    """Upper bound C with ``semidist(delta_x, delta_y) <= C |x - y|``.

    Each multilinear interpolant has partial derivatives bounded by its
    largest edge slope, so ``sqrt(n) * max |Δphi| / h`` bounds the gradient.
    """
    g = probes.grid
    slope = 0.0
    for p in probes.probes:
        for ax in range(g.dim):
            slope = max(slope, float(np.abs(np.diff(p.values, axis=ax)).max()))
    return float(np.sqrt(g.dim) * slope / g.spacing)


def covered_nodes(probes: ProbeFamily) -> np.ndarray:
    """Flat indices of nodes where at least one probe is nonzero."""
    return np.flatnonzero(np.any(probes.node_values() != 0, axis=0))


def separation_scan(probes: ProbeFamily, nodes=None, near: float | None = None, chunk: int | None = None) -> dict:
    """Scan all pairs of distinct ``nodes`` (flat indices; default: covered nodes).

    Returns the minimum semidistance over all pairs and the minimum ratio
    ``semidist / |x - y|`` over pairs with ``|x - y| <= near``
    (default ``near = probes.radius / 2``).
    """
    g = probes.grid
    if nodes is None:
        nodes = covered_nodes(probes)
    nodes = np.asarray(nodes)
    if near is None:
        near = probes.radius / 2
    vals = probes.node_values()[:, nodes]
    if not np.any(vals.imag):
        vals = vals.real
    pts = g.node_points()[nodes]
    if chunk is None:
        chunk = max(1, int(2e7 // max(1, vals.size)))
    min_sep, min_ratio = np.inf, np.inf
    for start in range(0, len(nodes), chunk):
        a = slice(start, start + chunk)
        # pairs (i, j) with j > i only
        sd = np.abs(vals[:, a, None] - vals[:, None, :]).max(axis=0)
        dist = np.linalg.norm(pts[a, None, :] - pts[None, :, :], axis=2)
        upper = np.arange(start, start + sd.shape[0])[:, None] < np.arange(len(nodes))[None, :]
        if upper.any():
            min_sep = min(min_sep, float(sd[upper].min()))
            close = upper & (dist <= near * (1 + 1e-9))
            if close.any():
                min_ratio = min(min_ratio, float((sd[close] / dist[close]).min()))
    return {"min_semidist": min_sep, "separation_lower": min_ratio, "pairs": len(nodes) * (len(nodes) - 1) // 2}


def dirac_measure_embed(grid: Grid, x) -> Measure:
    """The Dirac measure ``eps_x``; its image in D'(E) is checked to be ``delta_x``."""
    eps = Measure(grid, atoms=[(as_point(x), 1.0)])
    if not density_to_distribution(eps).same_as(embed_delta(grid, x)):
        raise AssertionError("Dirac-measure image differs from delta_x")
    return eps


def _default_g(pairings):
    return np.sum(pairings, axis=0)


def translation_invariance_check(probes: ProbeFamily, shifts, g=None) -> float:
    """Largest ``|F(shift_a) - F(0)|`` over ``shifts``.

    ``F(a) = h^n sum_nodes g(<phi_1, delta_{y+a}>, ..., <phi_k, delta_{y+a}>)``
    is the lattice Lebesgue integral over T_delta(E) of a functional that
    only reads finitely many probe pairings.  ``g`` maps the ``(k, nodes)``
    array of pairings to one value per node and must vanish at 0.
    """
    g = _default_g if g is None else g
    grid = probes.grid
    k = len(probes)
    if np.any(np.asarray(g(np.zeros((k, 1), dtype=complex))) != 0):
        raise ValueError("g must vanish on the zero functional")
    nodes = grid.node_points()
    nz = np.any(probes.node_values() != 0, axis=0)
    base = g(probes.node_values())
    f0 = grid.cell_volume * np.sum(base)
    worst = 0.0
    for a in shifts:
        a = np.broadcast_to(np.asarray(a, dtype=float), (grid.dim,))
        reach = grid.extent - np.abs(a)
        if np.any(reach <= 0) or np.any(np.abs(nodes[nz]) > reach * (1 + 1e-12)):
            raise SupportError(f"probe supports are not inside the box shrunk by |a| = {tuple(np.abs(a))}")
        moved = nodes + a
        keep = np.all(np.abs(moved) <= grid.extent * (1 + 1e-12), axis=1)
        vals = probes.values_at(moved[keep])
        fa = grid.cell_volume * np.sum(g(vals))
        worst = max(worst, abs(complex(fa - f0)))
    return worst


def homeo_sweep(probes: ProbeFamily, x0=None, direction=None, ks=range(1, 41)) -> list:
    """``(|x_k - x0|, semidist(delta_{x_k}, delta_{x0}))`` for ``x_k = x0 + 2^-k e``."""
    grid = probes.grid
    x0 = np.zeros(grid.dim) if x0 is None else np.asarray(x0, dtype=float)
    e = np.eye(grid.dim)[0] if direction is None else np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    v0 = probes.values_at(x0[None, :])[:, 0]
    out = []
    for k in ks:
        xk = x0 + 2.0**-k * e
        vk = probes.values_at(xk[None, :])[:, 0]
        out.append((float(np.linalg.norm(xk - x0)), float(np.abs(vk - v0).max())))
    return out

