"""Truncated Borchers algebra ``C ⊕ D(E) ⊕ D(E ⊕ E) ⊕ ...`` and its states.

Elements carry components up to a degree cap ``K <= 3``; the degree-k
component lives on ``base.power(k)``.  The product is the tensor product
graded by degree, and the involution reverses the argument blocks and
conjugates.  A state is a family of distributions ``W_k`` and acts by
plain (unconjugated) pairing, ``f(a) = a_0 + sum_k <a_k, W_k>``.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import DegreeError, GridMismatchError, HermitianError
from .gaussian import CovarianceForm
from .grid import Distribution, Grid, TestFunction, pair, tensor

MAX_DEGREE = 3


def _check_cap(cap):
    if not 0 <= cap <= MAX_DEGREE:
        raise DegreeError(f"degree cap must be in 0..{MAX_DEGREE}, got {cap}")


class BorchersElement:
    """``(a_0, a_1, ..., a_K)``; missing components are zero."""

    def __init__(self, base: Grid, components: dict, degree_cap: int = MAX_DEGREE):
        _check_cap(degree_cap)
        comps = {}
        for k, c in components.items():
            if k < 0 or k > degree_cap:
                raise DegreeError(f"component of degree {k} exceeds cap {degree_cap}")
            if k == 0:
                if c != 0:
                    comps[0] = complex(c)
                continue
            if not isinstance(c, TestFunction):
                raise TypeError(f"degree-{k} component must be a TestFunction")
            if c.grid != base.power(k):
                raise GridMismatchError(f"degree-{k} component is not on the {k}-fold product grid")
            comps[k] = c
        self.base = base
        self.cap = degree_cap
        self.components = comps

    @classmethod
    def unit(cls, base: Grid, degree_cap: int = MAX_DEGREE) -> "BorchersElement":
        return cls(base, {0: 1.0}, degree_cap)

    @property
    def degree(self) -> int:
        return max(self.components, default=0)

    def __getitem__(self, k):
        if k == 0:
            return self.components.get(0, 0j)
        return self.components.get(k)

    def __add__(self, other):
        comps = dict(self.components)
        for k, c in other.components.items():
            comps[k] = comps[k] + c if k in comps else c
        return BorchersElement(self.base, comps, max(self.cap, other.cap))

    def __mul__(self, a):
        if not np.isscalar(a):
            return NotImplemented
        return BorchersElement(self.base, {k: a * c for k, c in self.components.items()}, self.cap)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return product(self, other)

    def max_gap(self, other) -> float:
        """Largest absolute componentwise difference (missing = zero)."""
        gap = abs(self[0] - other[0])
        for k in (set(self.components) | set(other.components)) - {0}:
            a, b = self[k], other[k]
            va = a.values if a is not None else 0
            vb = b.values if b is not None else 0
            gap = max(gap, float(np.abs(va - vb).max()))
        return float(gap)


def product(a: BorchersElement, b: BorchersElement) -> BorchersElement:
    """``(a b)_k = sum_{i+j=k} a_i ⊗ b_j``."""
    if a.base != b.base:
        raise GridMismatchError("elements over different base grids")
    cap = max(a.cap, b.cap)
    if a.degree + b.degree > cap:
        raise DegreeError(f"degree {a.degree} + {b.degree} exceeds cap {cap}")
    out = {}
    for i, ai in a.components.items():
        for j, bj in b.components.items():
            if i == 0:
                term = ai * bj
            elif j == 0:
                term = bj * ai
            else:
                term = tensor(ai, bj)
            k = i + j
            out[k] = out[k] + term if k in out else term
    return BorchersElement(a.base, out, cap)


def _reverse_blocks(values, n, k):
    axes = [ax for blk in reversed(range(k)) for ax in range(blk * n, (blk + 1) * n)]
    return np.transpose(values, axes)


def involution(a: BorchersElement) -> BorchersElement:
    """``a*_k(x_1, ..., x_k) = conj(a_k(x_k, ..., x_1))``."""
    n = a.base.dim
    out = {}
    for k, c in a.components.items():
        if k == 0:
            out[0] = np.conj(c)
        else:
            vals = np.ascontiguousarray(_reverse_blocks(c.values, n, k)).conj()
            out[k] = TestFunction._raw(c.grid, vals, c.support_center, c.support_radius)
    return BorchersElement(a.base, out, a.cap)


class State:
    """Distributions ``W_k`` on ``base.power(k)``, ``k = 1..K``; ``W_0 = 1``."""

    def __init__(self, base: Grid, components: dict, degree_cap: int = MAX_DEGREE):
        _check_cap(degree_cap)
        comps = {}
        for k, w in components.items():
            if not 1 <= k <= degree_cap:
                raise DegreeError(f"state component of degree {k} outside 1..{degree_cap}")
            if w is None:
                continue
            if w.grid != base.power(k):
                raise GridMismatchError(f"W_{k} is not on the {k}-fold product grid")
            comps[k] = w
        self.base = base
        self.cap = degree_cap
        self.components = comps

    def component(self, k: int) -> Distribution:
        if k in self.components:
            return self.components[k]
        if not 1 <= k <= self.cap:
            raise DegreeError(f"no component of degree {k}")
        return Distribution.zero(self.base.power(k))


def state_eval(W: State, a: BorchersElement) -> complex:
    """``f(a) = a_0 + sum_k <a_k, W_k>``."""
    if W.base != a.base:
        raise GridMismatchError("state and element over different base grids")
    if a.degree > W.cap:
        raise DegreeError(f"element degree {a.degree} exceeds the state's cap {W.cap}")
    total = a[0]
    for k, c in a.components.items():
        if k and k in W.components:
            total += pair(c, W.components[k])
    return complex(total)


def gaussian_state(C: CovarianceForm, degree_cap: int = 2) -> State:
    """Gaussian (quasi-free) state: ``W_2(x, y) = C(x, y)`` as a node density, odd ``W_k = 0``.

    The density is ``C / h^n`` so that ``<phi ⊗ psi, W_2> = B(phi, psi)``;
    it is the node covariance of the samples of the matching Gaussian measure.
    """
    _check_cap(degree_cap)
    if degree_cap < 2:
        raise DegreeError("a Gaussian state needs degree cap >= 2")
    base = C.grid
    g2 = base.power(2)
    kernel = C.node_covariance().reshape(g2.shape)
    return State(base, {2: Distribution(g2, density=kernel)}, degree_cap)


def positivity_gram(W: State, probes) -> np.ndarray:
    """``G_ij = f(a_i* a_j)``."""
    probes = list(probes)
    limit = W.cap // 2
    for p in probes:
        if p.degree > limit:
            raise DegreeError(f"probe degree {p.degree} exceeds floor(K/2) = {limit}")
    stars = [involution(p) for p in probes]
    m = len(probes)
    G = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            G[i, j] = state_eval(W, product(stars[i], probes[j]))
    return G


def positivity_check(W: State, probes) -> float:
    """Minimum eigenvalue of the Hermitianized positivity Gram matrix."""
    G = positivity_gram(W, probes)
    scale = max(1.0, float(np.abs(G).max()))
    gap = float(np.abs(G - G.conj().T).max())
    if gap > 1e-12 * scale:
        raise HermitianError(f"positivity Gram matrix not Hermitian (gap {gap:.2e})")
    return float(linalg.eigvalsh(0.5 * (G + G.conj().T))[0])
