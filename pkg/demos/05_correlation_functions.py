"""
Correlation functions three ways
================================

The n-point functions of a Gaussian measure can be read off from Wick
pairings, from derivatives of Z at 0, or from samples.  The three routes
share no code beyond the covariance matrix.
"""

import numpy as np

from distspace import CovarianceForm, GaussianMeasure, Grid, bump
from distspace.correlation import correlation_deriv, correlation_mc, correlation_wick

grid = Grid(1, 3.0, 0.01)
mu = GaussianMeasure(CovarianceForm.inverse_laplacian(grid), seed=4)
qs = [bump(grid, -0.2, 0.8), bump(grid, 0.1, 1.0, -1.0), bump(grid, 0.3, 0.6, 2.0), bump(grid, 0.0, 0.9)]

for n in (2, 3, 4):
    w = correlation_wick(mu.covariance, qs[:n])
    d = correlation_deriv(mu, qs[:n])
    m, e = correlation_mc(mu, qs[:n], 100_000)
    print(f"n = {n}: wick {w.real:+.8f}  deriv {d.real:+.8f}  mc {m.real:+.5f} +- {e:.5f}")

# fourth moment of a single probe with B(q) = 1
q = qs[0] * (1 / np.sqrt(mu.covariance(qs[0])))
print("<q^4> with B(q) = 1:", correlation_wick(mu.covariance, [q] * 4).real)
