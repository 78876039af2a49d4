"""Seeded, matrix-free sketch operators: gaussian, s-hashing, scaled sampling.

An operator is a value ``(kind, m, n, seed[, s])``; its matrix entries are
a pure function of that value via the counter scheme in :mod:`.rng`, so
``apply`` never stores the matrix and ``materialize`` reproduces exactly
the matrix ``apply`` acts by.

Entry layout per column/row stream:

* gaussian: column ``j`` has key ``child_key(base, j)``; row ``i`` draws
  word ``i`` and maps it to ``ndtri(u) * (1/sqrt(m))``.
* hashing(s): column ``j`` draws words ``0..s-1`` for a partial
  Fisher-Yates shuffle of [0, m) (word ``k`` picks uniformly from
  ``[k, m)``), giving ``s`` distinct rows; words ``s..2s-1`` give the
  signs.  Entries are ``+/- 1/sqrt(s)``.
* sampling: row ``i`` draws word ``i`` of the sampling stream and picks a
  source column uniformly on [0, n), with replacement across rows; the
  entry is ``sqrt(n/m)``.

Application order is fixed (columns ascending, then within-column rows
ascending), so results are bit-identical across runs, storage forms, and
thread counts.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import BadDimensions, BadParams, DimensionMismatch, TooLarge, ZeroVector
from .vectors import Vector, norm2_sq

GAUSSIAN = "gaussian"
HASHING = "hashing"
SAMPLING = "sampling"
KINDS = (GAUSSIAN, HASHING, SAMPLING)

MATERIALIZE_CAP = 1_000_000


@dataclass(frozen=True)
class SketchOperator:
    kind: str
    m: int
    n: int
    seed: int
    s: int | None = None  # hashing only


def make_operator(kind: str, m: int, n: int, seed: int, s: int | None = None) -> SketchOperator:
    """Validate dimensions and build an operator descriptor."""
    if kind not in KINDS:
        raise BadParams(f"unknown operator kind {kind!r}; expected one of {KINDS}")
    if not 0 <= seed < 1 << 64:
        raise BadParams(f"seed must be a 64-bit unsigned integer, got {seed}")
    if m < 1 or n < 1:
        raise BadDimensions(f"dimensions must be positive, got m={m} n={n}")
    if kind in (HASHING, SAMPLING) and m > n:
        raise BadDimensions(f"{kind} requires m <= n, got m={m} n={n}")
    if kind == HASHING:
        s = 1 if s is None else int(s)
        if s < 1:
            raise BadDimensions(f"hashing requires s >= 1, got s={s}")
        if s > m:
            raise BadDimensions(
                f"hashing draws s distinct rows per column without replacement, "
                f"so s <= m is required; got s={s} m={m}"
            )
    elif s is not None:
        raise BadParams(f"s only applies to hashing operators, got s={s} for {kind}")
    return SketchOperator(kind, int(m), int(n), int(seed), s)


def operator_descriptor(op: SketchOperator) -> str:
    """Single-line record ``kind,s,m,n,seed`` (s empty for non-hashing)."""
    s = "" if op.s is None else str(op.s)
    return f"{op.kind},{s},{op.m},{op.n},{op.seed}"


def parse_descriptor(line: str) -> SketchOperator:
    kind, s, m, n, seed = line.strip().split(",")
    return make_operator(kind, int(m), int(n), int(seed), int(s) if s else None)


def _sampling_sources(op: SketchOperator) -> np.ndarray:
    key = rng.stream_key(op.seed, rng.DOMAIN_SAMPLING)
    return rng.below(key, np.arange(op.m, dtype=np.uint64), op.n)


def _hashing_rows_coeffs(op: SketchOperator, cols: np.ndarray):
    """Rows (distinct per column) and signed coefficients, shape (s, len(cols)).

    The partial Fisher-Yates shuffle is emulated without the length-m
    array: writes are replayed as vectorized position lookups, which is
    exact because step k never touches positions below k again.
    """
    base = rng.stream_key(op.seed, rng.DOMAIN_HASHING)
    keys = rng.child_keys(base, cols)
    s, m = op.s, op.m
    ncols = len(cols)
    rows = np.empty((s, ncols), dtype=np.int64)
    stored_pos, stored_val = [], []
    for k in range(s):
        d = k + (rng.uniform64(keys, k) % np.uint64(m - k)).astype(np.int64)
        picked = d.copy()
        for pos, val in zip(stored_pos, stored_val):
            picked = np.where(d == pos, val, picked)
        rows[k] = picked
        displaced = np.full(ncols, k, dtype=np.int64)
        for pos, val in zip(stored_pos, stored_val):
            displaced = np.where(pos == k, val, displaced)
        stored_pos.append(d)
        stored_val.append(displaced)
    inv_sqrt_s = 1.0 / np.sqrt(float(s))
    sign_bits = rng.uniform64(keys, s + np.arange(s, dtype=np.uint64)[:, None]) >> np.uint64(63)
    coeffs = np.where(sign_bits.astype(bool), -inv_sqrt_s, inv_sqrt_s)
    return rows, coeffs


def _gaussian_columns(op: SketchOperator, cols: np.ndarray) -> np.ndarray:
    """Entry block of the given columns, shape (m, len(cols))."""
    base = rng.stream_key(op.seed, rng.DOMAIN_GAUSSIAN)
    keys = rng.child_keys(base, cols)
    inv_sqrt_m = 1.0 / np.sqrt(float(op.m))
    counters = np.arange(op.m, dtype=np.uint64)[:, None]
    return rng.normals(keys[None, :], counters) * inv_sqrt_m


_GAUSS_BLOCK = 1 << 18  # cap on entries generated at once


def apply(op: SketchOperator, v: Vector) -> Vector:
    """Compute the sketched vector (length m) without forming the matrix."""
    if v.n != op.n:
        raise DimensionMismatch(f"operator has n={op.n} but vector has n={v.n}")
    if op.kind == SAMPLING:
        scale = np.sqrt(op.n / op.m)
        out = scale * v.gather(_sampling_sources(op))
        return Vector.dense(out)
    if v.is_sparse:
        cols, vals = v.indices, v.values
    else:
        cols = np.arange(op.n, dtype=np.int64)
        vals = v.to_dense()
    if op.kind == HASHING:
        out = np.zeros(op.m)
        if len(cols):
            rows, coeffs = _hashing_rows_coeffs(op, cols)
            contrib = coeffs * vals[None, :]
            out += np.bincount(
                rows.ravel(order="F"),
                weights=contrib.ravel(order="F"),
                minlength=op.m,
            )
        return Vector.dense(out)
    # gaussian: accumulate column by column in ascending order
    out = np.zeros(op.m)
    block = max(1, _GAUSS_BLOCK // op.m)
    for start in range(0, len(cols), block):
        sub = cols[start : start + block]
        entries = _gaussian_columns(op, sub)
        for b in range(len(sub)):
            out += entries[:, b] * vals[start + b]
    return Vector.dense(out)


def materialize(op: SketchOperator, cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """The explicit m-by-n matrix realizing the same randomness as ``apply``."""
    if op.m * op.n > cap:
        raise TooLarge(f"matrix has {op.m * op.n} entries, cap is {cap}")
    M = np.zeros((op.m, op.n))
    if op.kind == SAMPLING:
        M[np.arange(op.m), _sampling_sources(op)] = np.sqrt(op.n / op.m)
        return M
    cols = np.arange(op.n, dtype=np.int64)
    if op.kind == HASHING:
        rows, coeffs = _hashing_rows_coeffs(op, cols)
        for k in range(op.s):
            M[rows[k], cols] = coeffs[k]
        return M
    block = max(1, _GAUSS_BLOCK // op.m)
    for start in range(0, op.n, block):
        sub = cols[start : start + block]
        M[:, sub] = _gaussian_columns(op, sub)
    return M


def embedding_distortion(op: SketchOperator, v: Vector) -> float:
    """Squared-norm ratio ||Sv||^2 / ||v||^2 of the sketched vector."""
    denom = norm2_sq(v)
    if denom == 0.0:
        raise ZeroVector("distortion is undefined for the zero vector")
    return norm2_sq(apply(op, v)) / denom
