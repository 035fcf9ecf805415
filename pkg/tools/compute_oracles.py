"""Independent reference values frozen into the test suite.

Nothing here imports distspace: integrals come from adaptive quadrature
(scipy.integrate.quad) and from a plain numpy rectangle rule on a fine
grid.  Run with ``python3 tools/compute_oracles.py``.
"""

import numpy as np
from scipy import integrate


def bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def fine_rule(f, h=1e-4):
    x = np.arange(-round(1 / h), round(1 / h) + 1) * h
    return h * f(x).sum()


def main():
    b = lambda x: float(bump(x))
    print("int bump          quad", integrate.quad(b, -1, 1, epsabs=1e-14)[0])
    print("int bump          h=1e-4", fine_rule(bump))
    print("int bump^2        quad", integrate.quad(lambda x: b(x) ** 2, -1, 1, epsabs=1e-14)[0])
    print("int bump^2        h=1e-4", fine_rule(lambda x: bump(x) ** 2))
    print("int bump^3        quad", integrate.quad(lambda x: b(x) ** 3, -1, 1, epsabs=1e-14)[0])
    print("int bump^3        h=1e-4", fine_rule(lambda x: bump(x) ** 3))

    # max |bump''| from a dense sample of the closed-form second derivative
    x = np.linspace(-0.999, 0.999, 2_000_001)
    u = 1 - x**2
    d2 = np.exp(-1 / u) * (6 * x**4 - 2) / u**4
    print("max |bump''|", np.abs(d2).max())

    # Hellinger overlap of N(0, 2 lam^2) and N(0, 2 lam2^2) in one dimension
    lam, lam2 = 1.0, 2.0
    s1, s2 = 2 * lam**2, 2 * lam2**2
    p = lambda t, s: np.exp(-t * t / (2 * s)) / np.sqrt(2 * np.pi * s)
    print("hellinger d=1     quad", integrate.quad(lambda t: np.sqrt(p(t, s1) * p(t, s2)), -np.inf, np.inf, epsabs=1e-14)[0])
    print("hellinger d=20    0.8**10", 0.8**10)

    # fourth moment of a unit-variance Gaussian
    print("E z^4             quad", integrate.quad(lambda t: t**4 * p(t, 1.0), -np.inf, np.inf)[0])


if __name__ == "__main__":
    main()
