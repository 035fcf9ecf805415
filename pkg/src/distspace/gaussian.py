"""Gaussian measures on the lattice dual, characteristic functionals and
equivalence diagnostics.

Conventions.  A covariance form is built from an operator ``K`` on the node
space with the quadrature inner product, so

    B(q) = <K^{-1} q | K^{-1} q> = h^n q^T C q,      C = K^{-T} K^{-1}.

Complex ``q`` enter through the bilinear extension ``q^T C q`` (no
conjugation), which is what ``Z(q) = E exp(i <q, w>)`` needs.  A sample
``w = mean + u`` has node covariance ``Cov(u) = C / h^n`` so that
``Var <q, w> = B(q)``; equivalently the node covariance is the matrix of
``B`` divided by ``h^{2n}``.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from . import rng
from .errors import CholeskyError, HermitianError
from .grid import Distribution, Grid, TestFunction, pair, quadrature


def _laplacian_1d(m, h):
    main = np.full(m, 2.0 / h**2)
    off = np.full(m - 1, -1.0 / h**2)
    return np.diag(main) + np.diag(off, 1) + np.diag(off, -1)


class CovarianceForm:
    """Positive quadratic form ``B`` on test functions over ``grid``.

    Use one of the constructors: :meth:`from_operator`, :meth:`from_covariance`,
    :meth:`scaled_identity`, :meth:`inverse_laplacian`.
    """

    def __init__(self, grid: Grid, C, K=None, KKt_diag=None, name="custom"):
        C = np.asarray(C, dtype=float)
        d = grid.dof
        if C.shape != (d, d):
            raise ValueError(f"covariance matrix must be {d}x{d}, got {C.shape}")
        if not np.allclose(C, C.T, rtol=0, atol=1e-10 * max(1.0, np.abs(C).max())):
            raise ValueError("covariance matrix is not symmetric")
        C = 0.5 * (C + C.T)
        C.setflags(write=False)
        self.grid = grid
        self.C = C
        self._K = K
        self._KKt_diag = KKt_diag
        self.name = name
        self._diag = np.diag(C).copy() if np.count_nonzero(C - np.diag(np.diag(C))) == 0 else None
        self._chol = None
        self.jitter = 0.0

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_operator(cls, grid: Grid, K) -> "CovarianceForm":
        K = np.asarray(K, dtype=float)
        Kinv = np.linalg.inv(K)
        return cls(grid, Kinv.T @ Kinv, K=K, name="operator")

    @classmethod
    def from_covariance(cls, grid: Grid, C) -> "CovarianceForm":
        return cls(grid, C, name="covariance")

    @classmethod
    def scaled_identity(cls, grid: Grid, lam: float = 1.0) -> "CovarianceForm":
        """``B(q) = 2 lam^2 <q|q>``, i.e. ``Z(q) = exp(-lam^2 <q|q>)``; ``K = I / (sqrt(2) lam)``."""
        if lam <= 0:
            raise ValueError("lam must be positive")
        d = grid.dof
        cov = cls(grid, 2 * lam**2 * np.eye(d), KKt_diag=np.full(d, 1.0 / (2 * lam**2)), name="scaled_identity")
        cov.lam = lam
        return cov

    @classmethod
    def inverse_laplacian(cls, grid: Grid, mass: float = 1.0, scale: float = 1.0) -> "CovarianceForm":
        """``C = scale * (-Δ_h + mass^2)^{-1}`` with zero (Dirichlet) values outside the box."""
        m, h = grid.nodes_per_axis, grid.spacing
        lap1 = _laplacian_1d(m, h)
        eye = np.eye(m)
        A = np.zeros((grid.dof, grid.dof))
        for ax in range(grid.dim):
            term = np.array([[1.0]])
            for j in range(grid.dim):
                term = np.kron(term, lap1 if j == ax else eye)
            A += term
        A += mass**2 * np.eye(grid.dof)
        C = scale * linalg.inv(A)
        return cls(grid, C, name="inverse_laplacian")

    # -- derived objects --------------------------------------------------

    @property
    def dof(self) -> int:
        return self.grid.dof

    @property
    def K(self) -> np.ndarray:
        """Operator with ``K^{-T} K^{-1} = C``; the symmetric root ``C^{-1/2}`` unless given."""
        if self._K is None:
            evals, evecs = linalg.eigh(self.C)
            self._K = (evecs / np.sqrt(evals)) @ evecs.T
        return self._K

    def KKt_diagonal(self) -> np.ndarray:
        if self._KKt_diag is not None:
            return self._KKt_diag
        K = self.K
        return np.einsum("ij,ij->i", K, K)

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.C))

    @property
    def cholesky(self) -> np.ndarray:
        """Lower factor ``L`` with ``L L^T = C`` (diagonal jitter on failure)."""
        if self._chol is None:
            if self._diag is not None:
                if np.any(self._diag <= 0):
                    raise CholeskyError("diagonal covariance is not positive", float(self._diag.min()))
                self._chol = np.diag(np.sqrt(self._diag))
            else:
                try:
                    self._chol = linalg.cholesky(self.C, lower=True)
                except linalg.LinAlgError:
                    self.jitter = 1e-12 * np.trace(self.C) / self.dof
                    try:
                        self._chol = linalg.cholesky(self.C + self.jitter * np.eye(self.dof), lower=True)
                    except linalg.LinAlgError:
                        raise CholeskyError("covariance not positive definite", float(linalg.eigvalsh(self.C)[0])) from None
        return self._chol

    def node_covariance(self) -> np.ndarray:
        return self.C / self.grid.cell_volume

    # -- the form ---------------------------------------------------------

    def _apply(self, v):
        if self._diag is not None:
            return self._diag * v
        if np.iscomplexobj(v):
            # keeps numpy from upcasting the whole of C to complex
            out = self.C @ v.real
            return out + 1j * (self.C @ v.imag) if np.any(v.imag) else out
        return self.C @ v

    def bilinear(self, q1: TestFunction, q2: TestFunction) -> complex:
        """``B(q1, q2) = h^n q1^T C q2`` (bilinear, symmetric)."""
        v1, v2 = q1.values.ravel(), q2.values.ravel()
        return complex(quadrature(self.grid, v1 * self._apply(v2)))

    def __call__(self, q: TestFunction) -> complex:
        """``B(q)``; real and non-negative for real ``q``."""
        b = self.bilinear(q, q)
        return b.real if q.is_real() else b


class GaussianMeasure:
    """Gaussian measure on the lattice dual with mean distribution and covariance form."""

    def __init__(self, covariance: CovarianceForm, mean: Distribution | None = None, seed: int = 0):
        self.covariance = covariance
        self.grid = covariance.grid
        self.mean = Distribution.zero(self.grid) if mean is None else mean
        self.seed = int(seed)

    @property
    def centered(self) -> bool:
        return not self.mean.atoms and (self.mean.density is None or not np.any(self.mean.density))

    def with_seed(self, seed: int) -> "GaussianMeasure":
        return GaussianMeasure(self.covariance, self.mean, seed)

    def shifted(self, w: Distribution) -> "GaussianMeasure":
        return GaussianMeasure(self.covariance, self.mean + w, self.seed)

    def charfun(self, q: TestFunction) -> complex:
        """``Z(q) = exp(i <q, mean> - B(q) / 2)``."""
        return complex(np.exp(1j * pair(q, self.mean) - 0.5 * self.covariance.bilinear(q, q)))

    __call__ = charfun

    def sample(self, n: int, antithetic: bool = False) -> list:
        """``n`` sample distributions ``mean + u`` (node density)."""
        L = self.covariance.cholesky
        scale = 1.0 / np.sqrt(self.grid.cell_volume)
        u = rng.map_blocks(lambda z: (z @ L.T) * scale, n, self.seed, rng.STREAM_GAUSSIAN, self.grid.dof, antithetic)
        shape = self.grid.shape
        return [self.mean + Distribution(self.grid, density=row.reshape(shape)) for row in u]

    def sample_linear(self, functionals, n: int, antithetic: bool = False) -> np.ndarray:
        """Values ``a_i . u`` of node functionals on ``n`` samples of the fluctuation ``u``.

        ``functionals`` is a ``(k, dof)`` array; returns ``(n, k)``.  The
        samples are the same ones :meth:`sample` builds, only projected
        before being materialized.
        """
        A = np.atleast_2d(np.asarray(functionals))
        L = self.covariance.cholesky
        scale = 1.0 / np.sqrt(self.grid.cell_volume)
        # rows L^T a_i / h^{n/2}; real and imaginary parts kept apart so the
        # normals are never upcast to complex
        Vr = (A.real @ L) * scale
        if np.iscomplexobj(A) and np.any(A.imag):
            Vi = (A.imag @ L) * scale

            def project(z):
                return z @ Vr.T + 1j * (z @ Vi.T)
        else:

            def project(z):
                return z @ Vr.T

        return rng.map_blocks(project, n, self.seed, rng.STREAM_GAUSSIAN, self.grid.dof, antithetic)

    def sample_pairings(self, qs, n: int, antithetic: bool = False) -> np.ndarray:
        """``<q_i, w_j>`` for ``n`` samples ``w_j``: array of shape ``(n, len(qs))``."""
        hn = self.grid.cell_volume
        A = np.stack([hn * q.values.ravel() for q in qs])
        offsets = np.array([pair(q, self.mean) for q in qs])
        vals = self.sample_linear(A, n, antithetic)
        return vals + offsets if np.any(offsets) else vals


def mc_charfun(mu: GaussianMeasure, qs, n: int, antithetic: bool = True):
    """Monte Carlo ``(1/N) sum exp(i <q, w_j>)`` and its standard error.

    ``qs`` may be one test function or a list; with a list all estimates
    share the same samples.  Antithetic pairs ``(u, -u)`` make
    ``mc(-q) == conj(mc(q))`` exact for a centered measure.
    """
    single = isinstance(qs, TestFunction)
    qs = [qs] if single else list(qs)
    if n < 100:
        raise ValueError("mc_charfun needs N >= 100")
    p = mu.sample_pairings(qs, n, antithetic)
    est, err = rng.mean_and_stderr(np.exp(1j * p), antithetic)
    if single:
        return complex(est[0]), float(err[0])
    return est, err


def bochner_check(Z, qs) -> float:
    """Minimum eigenvalue of the Gram matrix ``G_ij = Z(q_i - q_j)``."""
    qs = list(qs)
    if not qs:
        raise ValueError("need at least one probe")
    m = len(qs)
    G = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            G[i, j] = Z(qs[i] - qs[j])
    if np.abs(G - G.conj().T).max() > 1e-12:
        raise HermitianError(f"Gram matrix not Hermitian (gap {np.abs(G - G.conj().T).max():.2e})")
    return float(linalg.eigvalsh(0.5 * (G + G.conj().T))[0])


def riesz_embed(q: TestFunction) -> Distribution:
    """``w_q`` with ``<q', w_q> = <q'|q>``: the density ``conj(q)``."""
    return Distribution(q.grid, density=q.values.conj())


def _shift_vectors(mu: GaussianMeasure, q: TestFunction):
    if not mu.centered:
        raise ValueError("quasi-invariance check needs a centered measure")
    if not q.is_real():
        raise ValueError("shift must be real-valued")
    cov = mu.covariance
    v = riesz_embed(q).density.real.ravel()
    L = cov.cholesky
    # Sigma^{-1} v with Sigma = C / h^n
    sinv_v = cov.grid.cell_volume * linalg.cho_solve((L, True), v)
    return v, sinv_v


def log_rn_density(mu: GaussianMeasure, q: TestFunction, w: Distribution) -> float:
    """``log d mu(. - w_q) / d mu`` at the sample ``w``: ``u.S^{-1}v - v.S^{-1}v / 2``."""
    v, sinv_v = _shift_vectors(mu, q)
    u = w.density.real.ravel()
    return float(u @ sinv_v - 0.5 * (v @ sinv_v))


def translate_quasi_invariance(mu: GaussianMeasure, q, n: int):
    """Monte Carlo mean (and standard error) of the Radon-Nikodym density of
    ``mu`` translated by ``w_q = riesz_embed(q)`` with respect to ``mu``.

    ``q`` may be one test function or a list; a list shares one set of
    samples and returns arrays.
    """
    single = isinstance(q, TestFunction)
    qs = [q] if single else list(q)
    means, errs = np.ones(len(qs)), np.zeros(len(qs))
    live = [i for i, qi in enumerate(qs) if np.any(qi.values)]
    if live:
        vecs = [_shift_vectors(mu, qs[i]) for i in live]
        A = np.stack([sinv_v for _, sinv_v in vecs])
        quad = np.array([v @ sinv_v for v, sinv_v in vecs])
        s = mu.sample_linear(A, n)
        m, e = rng.mean_and_stderr(np.exp(s - 0.5 * quad))
        means[live], errs[live] = m.real, e
    if single:
        return float(means[0]), float(errs[0])
    return means, errs


def trace_diagnostic(K) -> float:
    """``Tr(I - K K^T / 2)`` on the current dof.

    ``K`` is a square matrix or a :class:`CovarianceForm` (whose exactly
    known ``diag(K K^T)`` is used when available).
    """
    if isinstance(K, CovarianceForm):
        diag = K.KKt_diagonal()
    else:
        K = np.asarray(K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError("K must be square")
        diag = np.einsum("ij,ij->i", K, K)
    return float(np.sum(1.0 - 0.5 * diag))


def trace_sweep(make_K, dofs) -> list:
    """``(d, Tr(I - KK^T/2), per-dof value)`` for each ``d``; ``make_K(d)`` builds the operator."""
    out = []
    for d in dofs:
        t = trace_diagnostic(make_K(d))
        out.append((d, t, t / d))
    return out


def hellinger_affinity(lam: float, lam2: float, d: int) -> float:
    """Affinity of the product Gaussians with ``Z = exp(-lam^2 <q|q>)`` and ``exp(-lam2^2 <q|q>)`` on ``d`` dof."""
    if lam <= 0 or lam2 <= 0:
        raise ValueError("lam and lam2 must be positive")
    if d < 1:
        raise ValueError("d must be >= 1")
    return float((2 * lam * lam2 / (lam**2 + lam2**2)) ** (d / 2))


def hellinger_affinity_mc(lam: float, lam2: float, dmax: int, n: int, seed: int = 0):
    """Monte Carlo ``E_mu sqrt(d mu' / d mu)`` for ``d = 1..dmax`` from one set of draws.

    Samples ``x ~ N(0, 2 lam^2 I)``; the log ratio for dimension ``d`` is the
    cumulative sum of the per-coordinate terms.  Returns ``(est, stderr)``
    arrays indexed by ``d - 1``.
    """
    if lam <= 0 or lam2 <= 0:
        raise ValueError("lam and lam2 must be positive")
    s1, s2 = 2 * lam**2, 2 * lam2**2

    def half_log_ratio(z):
        x2 = s1 * z**2
        per = 0.5 * (-0.5 * np.log(s2 / s1) - x2 / (2 * s2) + x2 / (2 * s1))
        return np.exp(np.cumsum(per, axis=1))

    vals = rng.map_blocks(half_log_ratio, n, seed, rng.STREAM_HELLINGER, dmax)
    est, err = rng.mean_and_stderr(vals)
    return est.real, err
