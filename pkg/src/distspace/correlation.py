"""Correlation functions of Gaussian measures, computed three independent ways.

* :func:`correlation_wick` sums products of polarized covariances over
  perfect matchings (Isserlis);
* :func:`correlation_deriv` differentiates the characteristic functional,
  ``<q_1...q_n> = i^{-n} d^n/d a_1...d a_n Z(sum a_i q_i)`` at 0, by mixed
  central differences with one Richardson step;
* :func:`correlation_mc` averages ``prod <q_i, w>`` over samples.

All three canonicalize the order of ``qs`` first, so reordering the
arguments returns bit-identical results.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import rng
from .errors import StepError
from .gaussian import CovarianceForm, GaussianMeasure
from .grid import inner


def _canonical(qs):
    return sorted(qs, key=lambda q: q.values.tobytes())


def perfect_matchings(items):
    """Yield every partition of ``items`` into unordered pairs."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        for tail in perfect_matchings(rest[:i] + rest[i + 1:]):
            yield [(first, partner)] + tail


def polarization(B: CovarianceForm, q1, q2) -> complex:
    """``B(q1, q2) = (B(q1 + q2) - B(q1) - B(q2)) / 2``."""
    return 0.5 * (B.bilinear(q1 + q2, q1 + q2) - B.bilinear(q1, q1) - B.bilinear(q2, q2))


def correlation_wick(B: CovarianceForm, qs) -> complex:
    """``<q_1 ... q_n>`` of the centered Gaussian with covariance form ``B``."""
    qs = _canonical(qs)
    n = len(qs)
    if n % 2:
        return 0j
    P = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            P[i, j] = P[j, i] = polarization(B, qs[i], qs[j])
    total = 0j
    for matching in perfect_matchings(range(n)):
        term = 1.0 + 0j
        for i, j in matching:
            term *= P[i, j]
        total += term
    return complex(total)


def _mixed_difference(Z, qs, eps):
    n = len(qs)
    total = 0j
    for signs in itertools.product((1, -1), repeat=n):
        arg = qs[0] * (eps * signs[0])
        for s, q in zip(signs[1:], qs[1:]):
            arg = arg + q * (eps * s)
        total += np.prod(signs) * Z(arg)
    return total / (2 * eps) ** n


def correlation_deriv(Z, qs, step: float = 1e-2) -> complex:
    """``i^{-n}`` times the mixed derivative of ``a -> Z(sum a_i q_i)`` at 0.

    Central differences at ``step`` and ``step / 2`` combined as
    ``(4 D(step/2) - D(step)) / 3``; supports ``n <= 4``.  Each direction
    is scaled to unit L2 norm first and the result rescaled, so the step
    is meaningful whatever the size of the ``q_i``.
    """
    qs = _canonical(qs)
    n = len(qs)
    if n == 0:
        # Z(0) = 1
        return 1.0 + 0j
    if n > 4:
        raise StepError("mixed finite differences are only supported for n <= 4")
    if not step > 0 or (step / 2) ** n < 1e-40 or step / 2 < 1e-8:
        raise StepError(f"step {step} underflows for n = {n}")
    norms = [float(np.sqrt(inner(q, q).real)) for q in qs]
    if not all(norms):
        return 0j
    units = [q * (1.0 / r) for q, r in zip(qs, norms)]
    d1 = _mixed_difference(Z, units, step)
    d2 = _mixed_difference(Z, units, step / 2)
    return complex((1j ** -n) * (4 * d2 - d1) / 3 * np.prod(norms))


def correlation_mc(mu: GaussianMeasure, qs, n: int):
    """Monte Carlo ``E prod <q_i, w>`` and its standard error."""
    est, err = correlation_mc_many(mu, [qs], n)
    return complex(est[0]), float(err[0])


def correlation_mc_many(mu: GaussianMeasure, tuples, n: int):
    """:func:`correlation_mc` for several tuples on one shared set of samples."""
    tuples = [_canonical(qs) for qs in tuples]
    if n < 1000:
        raise ValueError("correlation_mc needs N >= 1000")
    pool, index = [], {}
    for qs in tuples:
        for q in qs:
            key = q.values.tobytes()
            if key not in index:
                index[key] = len(pool)
                pool.append(q)
    p = mu.sample_pairings(pool, n) if pool else np.empty((n, 0))
    prods = np.ones((n, len(tuples)), dtype=p.dtype)
    for t, qs in enumerate(tuples):
        for q in qs:
            prods[:, t] *= p[:, index[q.values.tobytes()]]
    est, err = rng.mean_and_stderr(prods)
    return est.astype(complex), err


def mean_pairing(mu: GaussianMeasure, phi, samples: int = 0) -> complex:
    """``int <phi, w> mu(dw)`` through the derivative route ``i^{-1} d/da Z(a phi)``.

    With ``samples > 0`` the second moment ``E <phi, w>^2`` is also
    estimated and required to be finite (square integrability of the
    extension ``w -> <phi, w>``).
    """
    value = correlation_deriv(mu.charfun, [phi])
    if samples:
        p = mu.sample_pairings([phi], samples)[:, 0]
        second = rng.column_means(np.abs(p[:, None]) ** 2)[0]
        if not np.isfinite(second):
            raise ArithmeticError("<phi, w> is not square integrable under mu")
    return value
