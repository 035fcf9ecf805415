"""
Points as delta functions
=========================

Every point x of the box is sent to the distribution delta_x.  We check
that pairing with delta_x is evaluation, that the vector operations carry
over, and that a finite probe family separates nearby points.
"""

import numpy as np

from distspace import Grid, ProbeFamily, bump, embed_delta, pair
from distspace import delta

grid = Grid(1, 5.0, 0.01)
phi = bump(grid, 0.0, 1.0)

# pairing with delta_x reads off the (interpolated) value of phi
for x in (0.0, 0.3, 0.9):
    print(f"<phi, delta_{x}> = {pair(phi, embed_delta(grid, x)).real:.6f}")

# addition and scaling of deltas act on the points themselves
d = delta.delta_add(embed_delta(grid, 1.0), embed_delta(grid, 2.0))
print("delta_1 + delta_2 is delta_3:", d.same_as(embed_delta(grid, 3.0)))

# the weak* topology is replaced by a finite set of probe seminorms
probes = ProbeFamily.default(grid)
C = delta.lipschitz_constant(probes)
print(f"{len(probes)} probes, Lipschitz bound C = {C:.1f}")
for dist, sd in delta.homeo_sweep(probes, ks=range(1, 30, 4)):
    print(f"|x - 0| = {dist:.2e}   semidist = {sd:.3e}   C|x| = {C * dist:.3e}")

coarse = Grid(1, 5.0, 0.05)
scan = delta.separation_scan(ProbeFamily.default(coarse))
print(f"separation over {scan['pairs']} node pairs: min semidist {scan['min_semidist']:.2e}")
