"""Counter-based random streams and deterministic block-parallel Monte Carlo.

Samples are produced in fixed blocks of ``BLOCK`` rows.  Block ``b`` of
stream ``s`` under seed ``seed`` always draws from
``Philox(key=(s << 64) | seed, counter=b << 192)``, so the sample set is a
function of ``(seed, stream, N)`` only.  Blocks may run on any number of
threads; results are reassembled in block order and reduced with numpy's
pairwise summation over a contiguous axis, which makes every estimate
bit-identical whatever ``DISTSPACE_THREADS`` says.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK = 1024  # even, so antithetic halves line up inside a block

# stream ids, one per kind of experiment
STREAM_GAUSSIAN = 0
STREAM_HELLINGER = 1


def thread_count() -> int:
    raw = os.environ.get("DISTSPACE_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    return max(1, int(raw))


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=(stream << 64) | seed, counter=block << 192))


def block_normals(seed: int, stream: int, block: int, rows: int, width: int, antithetic: bool = False) -> np.ndarray:
    rng = block_generator(seed, stream, block)
    if not antithetic:
        return rng.standard_normal((rows, width))
    if rows % 2:
        raise ValueError("antithetic blocks need an even number of rows")
    z = rng.standard_normal((rows // 2, width))
    return np.concatenate([z, -z])


def map_blocks(fn, n_samples: int, seed: int, stream: int, width: int, antithetic: bool = False) -> np.ndarray:
    """Apply ``fn`` to each block of standard normals and stack the results.

    ``fn`` receives a ``(rows, width)`` array and returns an array whose
    first axis has length ``rows``.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if antithetic and n_samples % 2:
        raise ValueError("antithetic sampling needs an even sample count")
    sizes = [min(BLOCK, n_samples - start) for start in range(0, n_samples, BLOCK)]

    def run(b):
        return fn(block_normals(seed, stream, b, sizes[b], width, antithetic))

    workers = min(thread_count(), len(sizes))
    if workers == 1:
        parts = [run(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    return np.concatenate(parts)


def column_means(x: np.ndarray) -> np.ndarray:
    """Mean of each column of an ``(N, k)`` array using pairwise summation."""
    xt = np.ascontiguousarray(np.atleast_2d(x.T))
    return xt.sum(axis=1) / xt.shape[1]


def mean_and_stderr(x: np.ndarray, antithetic: bool = False):
    """Column means and standard errors of ``(N, k)`` samples.

    With antithetic blocks the rows ``j`` and ``j + rows/2`` of each block
    are averaged first, and the errors are computed over those pairs.
    """
    x = np.asarray(x)
    if x.ndim == 1:
        x = x[:, None]
    if antithetic:
        units = []
        for start in range(0, len(x), BLOCK):
            blk = x[start:start + BLOCK]
            half = len(blk) // 2
            units.append(0.5 * (blk[:half] + blk[half:]))
        x = np.concatenate(units)
    n = len(x)
    mean = column_means(x)
    if n < 2:
        return mean, np.full(mean.shape, np.inf)
    dev = x - mean
    var = column_means(np.abs(dev) ** 2) * n / (n - 1)
    return mean, np.sqrt(var / n)
