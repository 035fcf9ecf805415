"""
Deforming test functions
========================

A deformation adds s_z(phi) = <phi, s_z> to the value phi(z).  For a
symmetric phi on E + E the deformed function no longer needs to be
symmetric, and its commutator is the pairing of phi with s_{x,y} - s_{y,x}.
"""

from distspace import Grid, InjectionField, bump, commutator, commutator_pairing, embed_delta, plateau, tensor
from distspace import coordinate_commutation

base = Grid(1, 2.0, 0.05)
G2 = base.power(2)
b1, b2 = bump(base, 0.2, 0.8), bump(base, -0.4, 0.8, 0.7)
phi = tensor(b1, b2) + tensor(b2, b1)

for s in (InjectionField.swap(G2), InjectionField.weighted_delta(G2)):
    for x, y in [(0.1, -0.3), (0.25, 0.05)]:
        lhs = commutator(phi, s, x, y)
        rhs = commutator_pairing(phi, s, x, y)
        print(f"{s.name:15s} ({x}, {y}): commutator {lhs.real:+.6f}  pairing {rhs.real:+.6f}")

# coordinates stay commutative on a windowed quantum plane
window = plateau(G2, (0.0, 0.0), 1.2, 1.9)
s = InjectionField.constant(embed_delta(G2, (0.5, 0.25)))
c12, c21 = coordinate_commutation(s, (0.3, -0.45), window)
print("x1 x2 deformed:", c12.real, " difference:", c12 - c21)
