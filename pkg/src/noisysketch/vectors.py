"""Vectors, norms, and the max-to-norm (non-uniformity) ratio.

A vector is dense (float64 array) or sparse (sorted unique indices plus
nonzero values).  Both storages are views of the same mathematical object:
every operation here returns bit-identical results for either form.

Sums of squares use one canonical scheme everywhere in the package: the
index space is cut into fixed chunks of 2**16, each chunk is summed
exactly (``math.fsum``), and the chunk partials are fsum-combined in
chunk order.  Zero entries contribute exactly 0.0, so dense and sparse
forms, and streaming and batch paths, agree to the last bit.
"""

import math

import numpy as np

from .errors import ZeroVector

CHUNK = 1 << 16


class Vector:
    """Immutable dense or sparse vector in R^n."""

    __slots__ = ("n", "_dense", "_indices", "_values")

    def __init__(self, n, dense=None, indices=None, values=None):
        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        self.n = int(n)
        if dense is not None:
            arr = np.ascontiguousarray(dense, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != self.n:
                raise ValueError(f"dense storage must have shape ({n},)")
            arr.flags.writeable = False
            self._dense, self._indices, self._values = arr, None, None
        else:
            idx = np.ascontiguousarray(indices, dtype=np.int64)
            val = np.ascontiguousarray(values, dtype=np.float64)
            if idx.ndim != 1 or val.ndim != 1 or idx.shape != val.shape:
                raise ValueError("sparse index and value lists must be 1-d and equal length")
            if idx.size:
                if idx[0] < 0 or idx[-1] >= self.n:
                    raise ValueError("sparse indices must lie in [0, n)")
                if np.any(np.diff(idx) <= 0):
                    raise ValueError("sparse indices must be strictly increasing")
            if np.any(val == 0.0):
                raise ValueError("sparse values must be nonzero")
            idx.flags.writeable = False
            val.flags.writeable = False
            self._dense, self._indices, self._values = None, idx, val

    @classmethod
    def dense(cls, values):
        values = np.asarray(values, dtype=np.float64)
        return cls(values.shape[0], dense=values)

    @classmethod
    def sparse(cls, n, indices, values):
        return cls(n, indices=indices, values=values)

    @classmethod
    def one_hot(cls, n, index=0, magnitude=1.0):
        return cls(n, indices=[index], values=[magnitude])

    @classmethod
    def k_sparse_equal(cls, n, k, magnitude=1.0):
        """First k coordinates set to the same magnitude, rest zero."""
        return cls(n, indices=np.arange(k), values=np.full(k, magnitude))

    @property
    def is_sparse(self):
        return self._dense is None

    @property
    def nnz(self):
        if self.is_sparse:
            return int(self._values.size)
        return int(np.count_nonzero(self._dense))

    @property
    def indices(self):
        return self._indices

    @property
    def values(self):
        return self._values

    def to_dense(self) -> np.ndarray:
        if not self.is_sparse:
            return self._dense
        out = np.zeros(self.n)
        out[self._indices] = self._values
        return out

    def dense_chunk(self, start, stop) -> np.ndarray:
        """Entries [start, stop) as a dense array."""
        if not self.is_sparse:
            return self._dense[start:stop]
        out = np.zeros(stop - start)
        lo = np.searchsorted(self._indices, start)
        hi = np.searchsorted(self._indices, stop)
        out[self._indices[lo:hi] - start] = self._values[lo:hi]
        return out

    def gather(self, positions) -> np.ndarray:
        """Entries at the given positions (sparse lookup fills zeros)."""
        positions = np.asarray(positions)
        if not self.is_sparse:
            return self._dense[positions]
        if self._indices.size == 0:
            return np.zeros(positions.shape)
        pos = np.minimum(
            np.searchsorted(self._indices, positions), self._indices.size - 1
        )
        hit = self._indices[pos] == positions
        return np.where(hit, self._values[pos], 0.0)

    def __repr__(self):
        storage = f"nnz={self.nnz} sparse" if self.is_sparse else "dense"
        return f"Vector(n={self.n}, {storage})"


def chunk_sum_sq(chunk: np.ndarray) -> float:
    """Exactly rounded sum of squares of one chunk."""
    return math.fsum((chunk * chunk).tolist())


def combine_partials(partials) -> float:
    """Exactly rounded combination of per-chunk partial sums."""
    return math.fsum(partials)


def norm2_sq(v: Vector) -> float:
    """Sum of squared entries, canonical chunked summation."""
    if v.is_sparse:
        if v.values.size == 0:
            return 0.0
        # group stored entries by the chunk their index falls in
        cut = np.flatnonzero(np.diff(v.indices // CHUNK)) + 1
        parts = [chunk_sum_sq(seg) for seg in np.split(v.values, cut)]
        return combine_partials(parts)
    arr = v.to_dense()
    parts = [chunk_sum_sq(arr[s : s + CHUNK]) for s in range(0, v.n, CHUNK)]
    return combine_partials(parts)


def norm2(v: Vector) -> float:
    return math.sqrt(norm2_sq(v))


def norm_inf(v: Vector) -> float:
    """Largest absolute entry."""
    if v.is_sparse:
        if v.values.size == 0:
            return 0.0
        return float(np.max(np.abs(v.values)))
    return float(np.max(np.abs(v.to_dense())))


def nu(v: Vector) -> float:
    """Max-to-norm ratio ||v||_inf / ||v||_2; lies in [n**-0.5, 1] for v != 0."""
    denom_sq = norm2_sq(v)
    if denom_sq == 0.0:
        raise ZeroVector("max-to-norm ratio is undefined for the zero vector")
    return norm_inf(v) / math.sqrt(denom_sq)


def read_vector(path) -> Vector:
    """Read a vector file.

    Dense format: one value per line.  Sparse format: a first line
    ``n=<dim>`` followed by ``index,value`` lines.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty vector file")
    if lines[0].startswith("n="):
        n = int(lines[0][2:])
        indices, values = [], []
        for ln in lines[1:]:
            idx, _, val = ln.partition(",")
            indices.append(int(idx))
            values.append(float(val))
        return Vector.sparse(n, indices, values)
    return Vector.dense([float(ln) for ln in lines])


def write_vector(v: Vector, path) -> None:
    """Write a vector in the format matching its storage."""
    with open(path, "w", encoding="utf-8") as fh:
        if v.is_sparse:
            fh.write(f"n={v.n}\n")
            for i, x in zip(v.indices.tolist(), v.values.tolist()):
                fh.write(f"{i},{x!r}\n")
        else:
            for x in v.to_dense().tolist():
                fh.write(f"{x!r}\n")
