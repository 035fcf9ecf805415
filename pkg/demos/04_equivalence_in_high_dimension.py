"""
Losing equivalence as the dimension grows
=========================================

Two Gaussians Z = exp(-lam^2 <q|q>) with different lam are equivalent in
any finite dimension, but their Hellinger affinity decays like a power of
the dimension count d.  The trace diagnostic Tr(I - K K^T / 2) grows with
d at the same time.
"""

import numpy as np

from distspace.gaussian import hellinger_affinity, hellinger_affinity_mc, trace_diagnostic

lam, lam2 = 1.0, 2.0
est, err = hellinger_affinity_mc(lam, lam2, 20, 200_000, seed=3)
for d in (1, 2, 5, 10, 20):
    print(f"d = {d:2d}  closed form {hellinger_affinity(lam, lam2, d):.5f}  MC {est[d - 1]:.5f} +- {err[d - 1]:.5f}")

for d in (8, 128, 2048):
    print(f"d = {d:4d}  affinity {hellinger_affinity(lam, lam2, d):.3e}  trace(K = I) = {trace_diagnostic(np.eye(d))}")
