"""Measures on E as distributions, and the field integral of point measures.

A field ``x -> phi_x delta_x`` with ``phi`` in L^2(E) integrates to the
density distribution ``int phi_x delta_x d^n x``; on the lattice that is a
:class:`~distspace.grid.Distribution` whose node density is the coefficient
array.  A measure ``nu = c^2 d^n x`` (plus optional positive atoms) maps to
``w_nu`` the same way, and integrating a test function against ``nu`` is
evaluation of ``<phi, .>`` at the single point ``w_nu`` of D'(E), i.e.
integration against the Dirac measure ``eps_nu``.
"""

from __future__ import annotations

import numpy as np

from .errors import GridMismatchError, IntegrabilityError
from .grid import Distribution, Grid, TestFunction, _check_same_grid, _frozen, _interp, as_point, pair, quadrature


class PointMeasureField:
    """A coefficient field ``x -> phi_x`` on the nodes of ``grid``."""

    def __init__(self, grid: Grid, coefficient):
        coefficient = np.asarray(coefficient, dtype=complex)
        if coefficient.shape != grid.shape:
            raise GridMismatchError(f"coefficient shape {coefficient.shape} does not match {grid.shape}")
        if not np.all(np.isfinite(coefficient)):
            raise IntegrabilityError("coefficient field has non-finite values")
        l2 = float(quadrature(grid, np.abs(coefficient) ** 2).real)
        l1 = float(quadrature(grid, np.abs(coefficient)).real)
        if not (np.isfinite(l1) and np.isfinite(l2)):
            raise IntegrabilityError("coefficient field is not integrable on the grid")
        self.grid = grid
        self.coefficient = _frozen(coefficient)
        self.l1_norm = l1
        self.l2_norm = float(np.sqrt(l2))

    def spans_fiber(self, x) -> bool:
        """True iff ``phi_x delta_x`` spans the one-dimensional fiber T_x at node ``x``."""
        idx = tuple(np.rint(np.asarray(self.grid.check_point(x)) / self.grid.spacing).astype(int) + self.grid.half_per_axis)
        return bool(self.coefficient[idx] != 0)


def field_integral(f: PointMeasureField) -> Distribution:
    """``int phi_x delta_x d^n x`` as a density distribution."""
    return Distribution(f.grid, density=f.coefficient)


class Measure:
    """``nu = c^2 d^n x`` plus optional positive point masses.

    ``density_sqrt`` is the real node array ``c``; it is not required to be
    strictly positive anywhere (a lattice function of compact support cannot
    be), only non-negative.
    """

    def __init__(self, grid: Grid, density_sqrt=None, atoms=()):
        if density_sqrt is not None:
            density_sqrt = np.asarray(density_sqrt, dtype=float)
            if density_sqrt.shape != grid.shape:
                raise GridMismatchError(f"density shape {density_sqrt.shape} does not match {grid.shape}")
            if np.any(density_sqrt < 0) or not np.all(np.isfinite(density_sqrt)):
                raise IntegrabilityError("density_sqrt must be finite and non-negative")
            density_sqrt = _frozen(density_sqrt)
        checked = []
        for x, wt in atoms:
            grid.check_point(x)
            if not wt > 0:
                raise IntegrabilityError("atom weights of a measure must be positive")
            checked.append((as_point(x), float(wt)))
        self.grid = grid
        self.density_sqrt = density_sqrt
        self.atoms = tuple(checked)

    @classmethod
    def lebesgue(cls, grid: Grid) -> "Measure":
        """``d^n x`` itself, i.e. ``c = 1``."""
        return cls(grid, np.ones(grid.shape))

    @property
    def total_mass(self) -> float:
        mass = sum(w for _, w in self.atoms)
        if self.density_sqrt is not None:
            mass += float(quadrature(self.grid, self.density_sqrt**2).real)
        return mass

    def support(self) -> np.ndarray:
        """Boolean node mask where the density part is positive."""
        if self.density_sqrt is None:
            return np.zeros(self.grid.shape, dtype=bool)
        return self.density_sqrt > 0


def density_to_distribution(nu: Measure) -> Distribution:
    """``w_nu = int c^2(x) delta_x d^n x`` with the atoms of ``nu`` appended."""
    if nu.density_sqrt is None:
        return Distribution(nu.grid, atoms=nu.atoms)
    w = field_integral(PointMeasureField(nu.grid, nu.density_sqrt**2))
    return Distribution(nu.grid, atoms=nu.atoms, density=w.density)


def integrate_against_measure(phi: TestFunction, nu: Measure) -> complex:
    """``int_E phi d nu`` by the lattice rule (atoms: interpolated point values)."""
    _check_same_grid(phi.grid, nu.grid)
    total = 0j
    if nu.atoms:
        pts = np.array([x.coords for x, _ in nu.atoms])
        weights = np.array([complex(w) for _, w in nu.atoms])
        total += np.sum(weights * _interp(phi.grid, phi.values, pts))
    if nu.density_sqrt is not None:
        total += quadrature(phi.grid, (nu.density_sqrt**2).astype(complex) * phi.values)
    return complex(total)


def integrate_against_dirac(functional, w_nu: Distribution) -> complex:
    """``int_{D'(E)} F(w) eps_nu(dw) = F(w_nu)``: the Dirac measure at ``w_nu``."""
    return complex(functional(w_nu))


def identity_residuals(phi: TestFunction, nu: Measure) -> tuple:
    """The three sides of ``int phi nu = <phi, w_nu> = int <phi, w> eps_nu(w)``.

    Returns ``(lhs, pairing, dirac, max relative gap)``.
    """
    lhs = integrate_against_measure(phi, nu)
    w_nu = density_to_distribution(nu)
    mid = pair(phi, w_nu)
    rhs = integrate_against_dirac(lambda w: pair(phi, w), w_nu)
    scale = max(abs(lhs), abs(mid), abs(rhs), np.finfo(float).tiny)
    gap = max(abs(lhs - mid), abs(mid - rhs), abs(lhs - rhs)) / scale
    return lhs, mid, rhs, gap
