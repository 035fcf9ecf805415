"""Lattice discretization of E = R^n and the test-function / distribution pairing.

A :class:`Grid` is the uniform lattice ``h * Z^n`` restricted to the box
``[-L, L]^n``.  Test functions are complex node arrays that vanish on the
outermost node layer; distributions are a finite set of weighted point atoms
plus an optional node density that acts through the rectangle rule with
weight ``h**n``.  Everything here is immutable once built.
"""

from __future__ import annotations

import base64
import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    GridError,
    GridMismatchError,
    OutOfBoxError,
    SupportError,
)

MAX_DOF = 10**7

# relative slack for "is this point inside the box" tests
_BOX_RTOL = 1e-12
# snapping tolerance (in units of h) when locating a point on the lattice
_SNAP = 1e-9


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform lattice on ``[-L, L]^dim`` with spacing ``h``.

    The number of nodes per axis is ``m = 2 * round(L / h) + 1`` so the
    origin is always a node.  Node coordinates are ``(i - M) * h`` with
    ``M = round(L / h)``.
    """

    dim: int
    half_width: float
    spacing: float

    def __post_init__(self):
        if self.dim < 1:
            raise GridError(f"dim must be >= 1, got {self.dim}")
        if not (self.half_width > 0 and self.spacing > 0):
            raise GridError("half_width and spacing must be positive")
        if self.half_per_axis < 1:
            raise GridError("spacing larger than half_width leaves no interior nodes")
        if self.nodes_per_axis ** self.dim > MAX_DOF:
            raise GridError(
                f"{self.nodes_per_axis}^{self.dim} nodes exceeds the {MAX_DOF} dof budget"
            )

    @property
    def half_per_axis(self) -> int:
        return int(round(self.half_width / self.spacing))

    @property
    def nodes_per_axis(self) -> int:
        return 2 * self.half_per_axis + 1

    @property
    def extent(self) -> float:
        """Coordinate of the outermost node layer (``M * h``)."""
        return self.half_per_axis * self.spacing

    @property
    def shape(self) -> tuple:
        return (self.nodes_per_axis,) * self.dim

    @property
    def dof(self) -> int:
        return self.nodes_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        return _frozen((np.arange(self.nodes_per_axis) - self.half_per_axis) * self.spacing)

    @cached_property
    def coords(self) -> tuple:
        """Open meshgrid (broadcastable) coordinate arrays, one per axis."""
        return tuple(_frozen(c) for c in np.meshgrid(*([self.axis] * self.dim), indexing="ij", sparse=True))

    def node_points(self) -> np.ndarray:
        """All node coordinates as a ``(dof, dim)`` array in C order."""
        mesh = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack([c.ravel() for c in mesh], axis=1)

    def node(self, index) -> "Point":
        index = np.atleast_1d(index)
        return Point(tuple(float(self.axis[i]) for i in index))

    def power(self, k: int) -> "Grid":
        """Grid on the k-fold direct sum of this grid's space (dim * k)."""
        return Grid(self.dim * k, self.half_width, self.spacing)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        lim = self.extent * (1 + _BOX_RTOL)
        return x.shape[-1] == self.dim and bool(np.all(np.abs(x) <= lim))

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(_coords(x), dtype=float)
        if x.shape != (self.dim,):
            raise OutOfBoxError(f"point of dimension {x.shape} on a {self.dim}-D grid")
        if not self.contains(x):
            raise OutOfBoxError(f"point {tuple(x)} outside box [-{self.extent}, {self.extent}]^{self.dim}")
        return x

    def to_dict(self) -> dict:
        return {"dim": self.dim, "half_width": self.half_width, "spacing": self.spacing}

    @classmethod
    def from_dict(cls, d) -> "Grid":
        return cls(int(d["dim"]), float(d["half_width"]), float(d["spacing"]))


@dataclass(frozen=True)
class Point:
    """A point of E given by its coordinates."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in np.atleast_1d(self.coords)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def _coords(x):
    if isinstance(x, Point):
        return x.coords
    return tuple(np.atleast_1d(np.asarray(x, dtype=float)).tolist())


def as_point(x) -> Point:
    return x if isinstance(x, Point) else Point(_coords(x))


def _check_same_grid(a: Grid, b: Grid):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def quadrature(grid: Grid, values) -> complex:
    """Rectangle rule ``h^n * sum(values)`` with numpy's pairwise summation."""
    return grid.cell_volume * np.sum(np.ravel(values))


class TestFunction:
    """Compactly supported function sampled on the nodes of a grid.

    ``values`` must be finite, vanish on the outermost node layer and vanish
    outside the closed ball ``(support_center, support_radius)``.  When no
    ball is given the smallest one about ``support_center`` (default origin)
    that contains every nonzero node is used.
    """

    __test__ = False  # keep pytest from collecting this class

    def __init__(self, grid: Grid, values, support_center=None, support_radius=None):
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise GridMismatchError(f"values shape {values.shape} does not match grid {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise SupportError("test function has non-finite values")
        for ax in range(grid.dim):
            edge = np.take(values, [0, -1], axis=ax)
            if np.any(edge != 0):
                raise SupportError("test function does not vanish on the outer node layer")
        center = np.zeros(grid.dim) if support_center is None else grid.check_point(support_center)
        r2 = _dist2(grid, center)
        if support_radius is None:
            nz = values != 0
            support_radius = float(np.sqrt(r2[nz].max())) if nz.any() else 0.0
        elif np.any(values[r2 > (support_radius * (1 + 1e-12)) ** 2] != 0):
            raise SupportError(f"nonzero values outside the support ball of radius {support_radius}")
        self.grid = grid
        self.values = _frozen(values)
        self.support_center = Point(tuple(center))
        self.support_radius = float(support_radius)

    @classmethod
    def _raw(cls, grid, values, center, radius):
        # trusted constructor for results of algebra on already-valid functions
        obj = cls.__new__(cls)
        obj.grid = grid
        obj.values = _frozen(values)
        obj.support_center = center
        obj.support_radius = float(radius)
        return obj

    @classmethod
    def zero(cls, grid: Grid) -> "TestFunction":
        return cls._raw(grid, np.zeros(grid.shape, dtype=complex), Point((0.0,) * grid.dim), 0.0)

    def __repr__(self):
        return f"TestFunction(grid={self.grid}, support=({self.support_center.coords}, r={self.support_radius:g}))"

    def _merged_support(self, other):
        if self.support_center == other.support_center:
            return self.support_center, max(self.support_radius, other.support_radius)
        ca, cb = np.asarray(self.support_center), np.asarray(other.support_center)
        r = max(np.linalg.norm(ca) + self.support_radius, np.linalg.norm(cb) + other.support_radius)
        return Point((0.0,) * self.grid.dim), r

    def __add__(self, other):
        if not isinstance(other, TestFunction):
            return NotImplemented
        _check_same_grid(self.grid, other.grid)
        c, r = self._merged_support(other)
        return TestFunction._raw(self.grid, self.values + other.values, c, r)

    def __sub__(self, other):
        if not isinstance(other, TestFunction):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return TestFunction._raw(self.grid, -self.values, self.support_center, self.support_radius)

    def __mul__(self, a):
        if not np.isscalar(a):
            return NotImplemented
        return TestFunction._raw(self.grid, a * self.values, self.support_center, self.support_radius)

    __rmul__ = __mul__

    def conj(self) -> "TestFunction":
        return TestFunction._raw(self.grid, self.values.conj(), self.support_center, self.support_radius)

    @property
    def real(self) -> "TestFunction":
        return TestFunction._raw(self.grid, self.values.real.astype(complex), self.support_center, self.support_radius)

    @property
    def imag(self) -> "TestFunction":
        return TestFunction._raw(self.grid, self.values.imag.astype(complex), self.support_center, self.support_radius)

    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def times(self, values) -> "TestFunction":
        """Pointwise product with a node array; the support can only shrink."""
        return TestFunction._raw(self.grid, self.values * values, self.support_center, self.support_radius)

    def __call__(self, x) -> complex:
        return interpolate(self, x)


def _dist2(grid, center):
    return sum((c - x0) ** 2 for c, x0 in zip(grid.coords, center))


def tensor(phi: TestFunction, psi: TestFunction) -> TestFunction:
    """``(phi ⊗ psi)(x, y) = phi(x) psi(y)`` on the concatenated grid."""
    if (phi.grid.half_width, phi.grid.spacing) != (psi.grid.half_width, psi.grid.spacing):
        raise GridMismatchError("tensor factors must share box and spacing")
    grid = Grid(phi.grid.dim + psi.grid.dim, phi.grid.half_width, phi.grid.spacing)
    values = np.multiply.outer(phi.values, psi.values)
    center = Point(phi.support_center.coords + psi.support_center.coords)
    radius = float(np.hypot(phi.support_radius, psi.support_radius))
    return TestFunction._raw(grid, values, center, radius)


def _check_ball(grid, center, radius):
    if radius <= 0:
        raise SupportError("support radius must be positive")
    center = grid.check_point(center)
    if np.any(np.abs(center) + radius >= grid.extent):
        raise OutOfBoxError(f"ball({tuple(center)}, {radius}) is not inside the open box")
    return center


def bump(grid: Grid, center=0.0, radius: float = 1.0, amplitude: complex = 1.0) -> TestFunction:
    """Standard smooth bump ``A * exp(-1 / (1 - r^2))`` with ``r = |x - center| / radius``."""
    center = _check_ball(grid, np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,)), radius)
    r2 = _dist2(grid, center) / radius**2
    inside = r2 < 1
    vals = np.zeros(grid.shape)
    vals[inside] = np.exp(-1.0 / (1.0 - np.broadcast_to(r2, grid.shape)[inside]))
    return TestFunction(grid, amplitude * vals, Point(tuple(center)), radius)


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def plateau(grid: Grid, center=0.0, inner_radius: float = 1.0, outer_radius: float = 2.0) -> TestFunction:
    """Smooth window: exactly 1 on ``|x - c| <= inner_radius``, 0 beyond ``outer_radius``."""
    if not 0 < inner_radius < outer_radius:
        raise SupportError("need 0 < inner_radius < outer_radius")
    center = _check_ball(grid, np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,)), outer_radius)
    r = np.sqrt(_dist2(grid, center))
    vals = 1.0 - _smooth_step((r - inner_radius) / (outer_radius - inner_radius))
    vals = np.broadcast_to(vals, grid.shape)
    return TestFunction(grid, vals, Point(tuple(center)), outer_radius)


def _interp(grid: Grid, values: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of node ``values`` at ``pts`` (shape ``(k, dim)``)."""
    m, h, M = grid.nodes_per_axis, grid.spacing, grid.half_per_axis
    t = pts / h + M
    near = np.rint(t)
    t = np.where(np.abs(t - near) < _SNAP, near, t)
    i0 = np.clip(np.floor(t).astype(np.intp), 0, m - 2)
    frac = t - i0
    out = np.zeros(len(pts), dtype=values.dtype)
    for corner in itertools.product((0, 1), repeat=grid.dim):
        c = np.asarray(corner)
        w = np.prod(np.where(c == 1, frac, 1.0 - frac), axis=1)
        out += w * values[tuple((i0 + c).T)]
    return out


def interpolate(phi: TestFunction, x) -> complex:
    """Evaluate ``phi`` at an arbitrary box point (exact at nodes)."""
    x = phi.grid.check_point(x)
    return complex(_interp(phi.grid, phi.values, x[None, :])[0])


def interpolate_many(phi: TestFunction, pts) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != phi.grid.dim or not phi.grid.contains(pts):
        raise OutOfBoxError("some points lie outside the grid box")
    return _interp(phi.grid, phi.values, pts)


class Distribution:
    """Element of D'(E): weighted point atoms plus an optional node density.

    ``pair(phi, w) = sum_i c_i phi(x_i) + h^n sum_j density_j phi_j``.
    """

    def __init__(self, grid: Grid, atoms=(), density=None):
        checked = []
        for x, c in atoms:
            grid.check_point(x)
            c = complex(c)
            if not np.isfinite(c):
                raise SupportError("non-finite atom weight")
            checked.append((as_point(x), c))
        if density is not None:
            density = np.asarray(density, dtype=complex)
            if density.shape != grid.shape:
                raise GridMismatchError(f"density shape {density.shape} does not match grid {grid.shape}")
            if not np.all(np.isfinite(density)):
                raise SupportError("non-finite density")
            density = _frozen(density)
        self.grid = grid
        self.atoms = tuple(checked)
        self.density = density

    def __repr__(self):
        dens = "none" if self.density is None else "array"
        return f"Distribution(grid={self.grid}, atoms={len(self.atoms)}, density={dens})"

    @classmethod
    def zero(cls, grid: Grid) -> "Distribution":
        return cls(grid)

    @classmethod
    def from_density(cls, grid: Grid, density) -> "Distribution":
        return cls(grid, density=density)

    @property
    def is_atomic(self) -> bool:
        return self.density is None

    @property
    def is_unit_delta(self) -> bool:
        return self.density is None and len(self.atoms) == 1 and self.atoms[0][1] == 1

    def __add__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        _check_same_grid(self.grid, other.grid)
        if self.density is None:
            dens = other.density
        elif other.density is None:
            dens = self.density
        else:
            dens = self.density + other.density
        return Distribution(self.grid, self.atoms + other.atoms, dens)

    def __neg__(self):
        return -1.0 * self

    def __sub__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self + (-other)

    def __mul__(self, a):
        if not np.isscalar(a):
            return NotImplemented
        dens = None if self.density is None else a * self.density
        return Distribution(self.grid, [(x, a * c) for x, c in self.atoms], dens)

    __rmul__ = __mul__

    def same_as(self, other) -> bool:
        """Structural equality (same atoms in the same order, same density)."""
        if self.grid != other.grid or self.atoms != other.atoms:
            return False
        if (self.density is None) != (other.density is None):
            return False
        return self.density is None or np.array_equal(self.density, other.density)


def pair(phi: TestFunction, w: Distribution) -> complex:
    """Bilinear pairing ``<phi, w>`` (no complex conjugation)."""
    _check_same_grid(phi.grid, w.grid)
    total = 0j
    if w.atoms:
        pts = np.array([x.coords for x, _ in w.atoms])
        weights = np.array([c for _, c in w.atoms])
        total += np.sum(weights * _interp(phi.grid, phi.values, pts))
    if w.density is not None:
        total += quadrature(phi.grid, w.density * phi.values)
    return complex(total)


def inner(phi: TestFunction, psi: TestFunction) -> complex:
    """Hermitian form ``<phi|psi> = h^n sum phi conj(psi)``, linear in the first slot."""
    _check_same_grid(phi.grid, psi.grid)
    return complex(quadrature(phi.grid, phi.values * psi.values.conj()))


# -- JSON envelope --------------------------------------------------------


def _encode_array(a, encoding):
    a = np.ascontiguousarray(a, dtype="<c16")
    if encoding == "base64":
        return {"dtype": "complex128", "shape": list(a.shape), "base64": base64.b64encode(a.tobytes()).decode("ascii")}
    if encoding == "array":
        return {"shape": list(a.shape), "re": a.real.ravel().tolist(), "im": a.imag.ravel().tolist()}
    raise ValueError(f"unknown encoding {encoding!r}")


def _decode_array(d):
    shape = tuple(d["shape"])
    if "base64" in d:
        return np.frombuffer(base64.b64decode(d["base64"]), dtype="<c16").reshape(shape)
    return (np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)).reshape(shape)


def distribution_to_json(w: Distribution, encoding="base64") -> dict:
    return {
        "kind": "distribution",
        "grid": w.grid.to_dict(),
        "atoms": [{"x": list(x.coords), "weight": [c.real, c.imag]} for x, c in w.atoms],
        "density": None if w.density is None else _encode_array(w.density, encoding),
    }


def distribution_from_json(d) -> Distribution:
    grid = Grid.from_dict(d["grid"])
    atoms = [(Point(tuple(a["x"])), complex(*a["weight"])) for a in d.get("atoms", [])]
    dens = d.get("density")
    return Distribution(grid, atoms, None if dens is None else _decode_array(dens))


def testfunction_to_json(phi: TestFunction, encoding="base64") -> dict:
    return {
        "kind": "test_function",
        "grid": phi.grid.to_dict(),
        "values": _encode_array(phi.values, encoding),
        "support_center": list(phi.support_center.coords),
        "support_radius": phi.support_radius,
    }


def testfunction_from_json(d) -> TestFunction:
    grid = Grid.from_dict(d["grid"])
    return TestFunction(grid, _decode_array(d["values"]), d.get("support_center"), d.get("support_radius"))
