"""
Measures and their image in D'(E)
=================================

A measure nu = c^2 dx maps to the density distribution w_nu.  Integrating
a test function against nu, pairing it with w_nu and integrating the
functional <phi, .> against the Dirac measure at w_nu give the same number.
"""

import numpy as np

from distspace import Grid, Measure, Point, bump
from distspace.measure import density_to_distribution, identity_residuals

grid = Grid(1, 5.0, 0.01)
phi = bump(grid, 0.2, 1.5, 2.0)

lebesgue = Measure.lebesgue(grid)
lhs, mid, rhs, gap = identity_residuals(phi, lebesgue)
print(f"Lebesgue: {lhs.real:.10f} {mid.real:.10f} {rhs.real:.10f} (gap {gap:.1e})")

# a smooth density plus two point masses
c = bump(grid, -0.5, 2.0).values.real
nu = Measure(grid, c, atoms=[(Point((1.0,)), 0.3), (Point((-2.2,)), 0.1)])
lhs, mid, rhs, gap = identity_residuals(phi, nu)
print(f"c^2 dx + atoms: {lhs.real:.10f} {mid.real:.10f} {rhs.real:.10f} (gap {gap:.1e})")
print("total mass of nu:", round(nu.total_mass, 6))
print("w_nu has", len(density_to_distribution(nu).atoms), "atoms and a node density")
