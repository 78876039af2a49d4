"""Counter-based deterministic randomness.

Every random quantity in this package is a pure function of
``(seed, domain, index, counter)``:

* ``stream_key(seed, domain)`` mixes a user seed with a fixed domain tag,
  so e.g. sketch entries and noise draws under the same seed never share
  randomness.
* ``child_key(key, index)`` derives the key of column/row/trial ``index``.
* ``uniform64(key, counters)`` yields the ``counters``-th raw 64-bit words
  of the stream.

The mixer is the splitmix64 finalizer (Stafford variant 13); the stream is
the splitmix64 sequence seeded at the key.  All arithmetic is 64-bit
integer with wraparound, so the mapping is identical across platforms and
evaluation orders, and any slice of a stream can be generated on its own.

Normal variates use the inverse CDF: ``ndtri`` (the Cephes rational
approximation) applied to a uniform in the open interval (0, 1) built from
the top 53 bits of a raw word.  One word per variate keeps the counter
layout static, which is what makes partial/parallel evaluation exact.
"""

import numpy as np
from scipy.special import ndtri

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Domain tags: arbitrary fixed odd constants keeping streams disjoint.
DOMAIN_GAUSSIAN = 0xA3C59AC1D6F40B1D
DOMAIN_HASHING = 0x7E46D625A1B33E05
DOMAIN_SAMPLING = 0x1F0E3DAD99908345
DOMAIN_NOISE = 0xC2B2AE3D27D4EB4F
DOMAIN_TRIAL = 0x165667B19E3779F9

_U64 = np.uint64
_SHIFT_30 = _U64(30)
_SHIFT_27 = _U64(27)
_SHIFT_31 = _U64(31)
_SHIFT_11 = _U64(11)
_MIX_1 = _U64(0xBF58476D1CE4E5B9)
_MIX_2 = _U64(0x94D049BB133111EB)
_GOLDEN_U = _U64(_GOLDEN)
_UNIT_SCALE = 2.0 ** -53


def mix64(z: int) -> int:
    """Splitmix64 finalizer on a single 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # wraparound is the defined semantics; silence numpy's 0-d overflow warning
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _SHIFT_30)) * _MIX_1
        z = (z ^ (z >> _SHIFT_27)) * _MIX_2
        return z ^ (z >> _SHIFT_31)


def stream_key(seed: int, domain: int) -> int:
    """Key of the stream owned by (seed, domain)."""
    if not 0 <= seed < 1 << 64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return mix64(seed ^ domain)


def child_key(key: int, index: int) -> int:
    """Key of sub-stream ``index`` (column, row, or trial) of a stream."""
    return mix64((key + ((index + 1) * _GOLDEN)) & _MASK)


def child_keys(key: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized ``child_key`` over an integer array."""
    idx = np.asarray(indices, dtype=_U64)
    with np.errstate(over="ignore"):
        return _mix64_array(_U64(key) + (idx + _U64(1)) * _GOLDEN_U)


def uniform64(key, counters) -> np.ndarray:
    """Raw 64-bit words of the stream at the given counters.

    Both arguments broadcast: ``key`` may be a scalar or a uint64 array of
    keys (as returned by ``child_keys``), ``counters`` a scalar or array.
    """
    k = np.asarray(key, dtype=_U64)
    c = np.asarray(counters, dtype=_U64)
    with np.errstate(over="ignore"):
        return _mix64_array(k + (c + _U64(1)) * _GOLDEN_U)


def unit_open(words: np.ndarray) -> np.ndarray:
    """Map raw words to doubles in the open interval (0, 1), top 53 bits."""
    return ((words >> _SHIFT_11).astype(np.float64) + 0.5) * _UNIT_SCALE


def uniforms(key, counters) -> np.ndarray:
    """Uniform doubles in (0, 1) at the given counters."""
    return unit_open(uniform64(key, counters))


def normals(key, counters) -> np.ndarray:
    """Standard normal variates at the given counters (inverse-CDF transform)."""
    return ndtri(uniforms(key, counters))


def below(key, counters, bound: int) -> np.ndarray:
    """Integers uniform on [0, bound) at the given counters.

    Modulo reduction; the bias is < bound / 2**64, negligible at the index
    ranges used here.
    """
    if bound <= 0:
        raise ValueError(f"bound must be positive, got {bound}")
    return (uniform64(key, counters) % _U64(bound)).astype(np.int64)
