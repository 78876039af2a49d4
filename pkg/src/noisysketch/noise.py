"""Additive Gaussian corruption of a signal, batch and streaming.

The corrupted vector is ``x + sigma * ||x||_2 * r`` with ``r`` standard
normal, drawn from the noise stream of the model's seed.  Noise words are
indexed by coordinate, so the draw for entry ``i`` does not depend on how
the vector is traversed; ``corrupt_streaming`` therefore produces
bit-identical statistics to ``corrupt`` followed by the batch norms, while
touching only one 2**16 chunk at a time.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ZeroVector
from .vectors import CHUNK, Vector, chunk_sum_sq, combine_partials, norm2_sq, norm_inf, nu

NOISY_STATS_CSV_HEADER = "n,sigma,seed,norm2sq,norminf,nu"


@dataclass(frozen=True)
class NoiseModel:
    sigma: float
    seed: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class NoisyStats:
    n: int
    norm2_sq_noisy: float
    norm_inf_noisy: float
    nu_noisy: float


def vector_stats(v: Vector) -> NoisyStats:
    """Batch statistics of an already-materialized vector."""
    return NoisyStats(v.n, norm2_sq(v), norm_inf(v), nu(v))


def stats_csv_row(stats: NoisyStats, nm: NoiseModel) -> str:
    return (
        f"{stats.n},{nm.sigma!r},{nm.seed},{stats.norm2_sq_noisy!r},"
        f"{stats.norm_inf_noisy!r},{stats.nu_noisy!r}"
    )


def _noise_scale(x: Vector, nm: NoiseModel) -> float:
    nx_sq = norm2_sq(x)
    if nx_sq == 0.0:
        raise ZeroVector("corruption scale sigma*||x|| is zero for the zero vector")
    return nm.sigma * math.sqrt(nx_sq)


def corrupt(x: Vector, nm: NoiseModel) -> Vector:
    """Materialize the corrupted vector (dense, length n)."""
    scale = _noise_scale(x, nm)
    key = rng.stream_key(nm.seed, rng.DOMAIN_NOISE)
    out = np.empty(x.n)
    for start in range(0, x.n, CHUNK):
        stop = min(start + CHUNK, x.n)
        r = rng.normals(key, np.arange(start, stop, dtype=np.uint64))
        out[start:stop] = x.dense_chunk(start, stop) + scale * r
    return Vector.dense(out)


def corrupt_streaming(x: Vector, nm: NoiseModel) -> NoisyStats:
    """Statistics of the corrupted vector in one pass, O(chunk) memory."""
    scale = _noise_scale(x, nm)
    key = rng.stream_key(nm.seed, rng.DOMAIN_NOISE)
    partials = []
    max_abs = 0.0
    for start in range(0, x.n, CHUNK):
        stop = min(start + CHUNK, x.n)
        r = rng.normals(key, np.arange(start, stop, dtype=np.uint64))
        chunk = x.dense_chunk(start, stop) + scale * r
        partials.append(chunk_sum_sq(chunk))
        max_abs = max(max_abs, float(np.max(np.abs(chunk))))
    total = combine_partials(partials)
    if total == 0.0:
        raise ZeroVector("corrupted vector has zero norm")
    return NoisyStats(x.n, total, max_abs, max_abs / math.sqrt(total))


def recover_norm_sq(norm2_sq_noisy: float, sigma: float, n: int) -> float:
    """Estimate ||x||^2 from the corrupted norm: divide out 1 + sigma^2 n."""
    return norm2_sq_noisy / (1.0 + sigma * sigma * n)
