"""
States on the truncated Borchers algebra
========================================

Elements are tuples (a_0, a_1, a_2) with a_k on the k-fold product grid.
A Gaussian measure gives a state whose two-point function is the
covariance kernel.  Positivity is checked on a Gram matrix of probes.
"""

import numpy as np

from distspace import BorchersElement, CovarianceForm, Distribution, Grid, State, bump, gaussian_state
from distspace import positivity_check, state_eval, tensor

base = Grid(1, 2.0, 0.02)
cov = CovarianceForm.inverse_laplacian(base)
W = gaussian_state(cov)

gen = np.random.default_rng(7)
probes = [
    BorchersElement(base, {0: complex(gen.normal(), gen.normal()), 1: bump(base, gen.uniform(-1, 1), 0.5) * gen.normal()}, 2)
    for _ in range(12)
]
print("Gaussian state, min Gram eigenvalue:", positivity_check(W, probes))

bad = State(base, {2: Distribution(base.power(2), density=-W.component(2).density)})
print("state with W_2 = -C, min Gram eigenvalue:", positivity_check(bad, probes))

phi, psi = bump(base, 0.1, 0.6), bump(base, -0.2, 0.7)
print("f(phi x psi) =", state_eval(W, BorchersElement(base, {2: tensor(phi, psi)})).real)
print("B(phi, psi)  =", cov.bilinear(phi, psi).real)
