"""Closed-form thresholds, intervals, and tail probabilities.

Pure calculators; no randomness.  ``E``, ``C1``, ``C2`` are
problem-independent constants the theory leaves unspecified — defaults
(E = e, C1 = 2, C2 = 1) are exposed as calibration knobs and echoed by
every consumer.  All logs are natural.  Dimension thresholds are returned
as floats with integer-ceiling variants; probabilities are clamped to
[0, 1].
"""

import math
from dataclasses import dataclass

from .errors import BadParams

DEFAULT_E = math.e
DEFAULT_C1 = 2.0
DEFAULT_C2 = 1.0


@dataclass(frozen=True)
class EmbeddingParams:
    """Target distortion/failure (eps_s, delta_s) plus the constants E, C2."""

    eps_s: float
    delta_s: float
    E: float = DEFAULT_E
    C2: float = DEFAULT_C2

    def __post_init__(self):
        if not 0 < self.eps_s < 1:
            raise BadParams(f"eps_s must lie in (0, 1), got {self.eps_s}")
        if not 0 < self.delta_s < 1:
            raise BadParams(f"delta_s must lie in (0, 1), got {self.delta_s}")
        if not self.E > 0 or not self.C2 > 0:
            raise BadParams(f"E and C2 must be positive, got E={self.E} C2={self.C2}")


@dataclass(frozen=True)
class NoiseTailParams:
    """Noise-concentration knobs (eps, t, C1) and the noise scale sigma."""

    eps: float
    t: float
    C1: float = DEFAULT_C1
    sigma: float = 0.1

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise BadParams(f"eps must lie in (0, 1), got {self.eps}")
        if not self.t > 0 or not self.C1 > 0 or not self.sigma > 0:
            raise BadParams(
                f"t, C1, sigma must be positive, got t={self.t} C1={self.C1} sigma={self.sigma}"
            )
        if not 2 * self.sigma * self.t < 1:
            raise BadParams(f"need 2*sigma*t < 1, got {2 * self.sigma * self.t}")


def nu_bar(p: EmbeddingParams) -> float:
    """Non-uniformity level below which 1-hashing embeds with rate 1 - delta_s.

    ``C2 * sqrt(eps_s) * min(log(E/eps_s)/log(1/delta_s),
    sqrt(log(E)/log(1/delta_s)))``.  For E < 1 the square-root branch is
    undefined and the first branch decides alone.
    """
    log_inv_delta = math.log(1.0 / p.delta_s)
    first = math.log(p.E / p.eps_s) / log_inv_delta
    second = math.inf if p.E < 1.0 else math.sqrt(math.log(p.E) / log_inv_delta)
    return p.C2 * math.sqrt(p.eps_s) * min(first, second)


def noise_peak_bound(q: NoiseTailParams, n: int) -> float:
    """High-probability bound sigma*sqrt(2*C1*log(2n)) on the noise maximum."""
    return q.sigma * math.sqrt(2.0 * q.C1 * math.log(2.0 * n))


def norm_slack(q: NoiseTailParams, n: int) -> float:
    """Relative half-width (eps*sigma^2*n + 2*sigma*t) / (1 + sigma^2*n)."""
    s2n = q.sigma * q.sigma * n
    return (q.eps * s2n + 2.0 * q.sigma * q.t) / (1.0 + s2n)


def n0_threshold(nu_x: float, p: EmbeddingParams, q: NoiseTailParams, n_for_log: int) -> float:
    """Dimension above which the corrupted vector's non-uniformity clears nu_bar.

    The threshold itself contains log(2n); ``n_for_log`` supplies that n.
    Use :func:`solve_n0` for the self-consistent integer threshold.
    Clamped below at 1.
    """
    if not 0 < nu_x <= 1:
        raise BadParams(f"nu_x must lie in (0, 1], got {nu_x}")
    if n_for_log < 1:
        raise BadParams(f"n_for_log must be >= 1, got {n_for_log}")
    nb = nu_bar(p)
    ratio = (nu_x + noise_peak_bound(q, n_for_log)) / nb
    value = (ratio * ratio - 1.0 + 2.0 * q.sigma * q.t) / (q.sigma * q.sigma * (1.0 - q.eps))
    return max(1.0, value)


def solve_n0(nu_x: float, p: EmbeddingParams, q: NoiseTailParams, max_n: int = 1 << 62) -> int:
    """Smallest integer n with n >= n0_threshold(..., n_for_log=n).

    Doubling to bracket, then bisection; the threshold grows only
    logarithmically in n, so the predicate is monotone past the bracket.
    """

    def ok(n):
        return n >= n0_threshold(nu_x, p, q, n)

    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > max_n:
            raise BadParams(f"no self-consistent threshold below {max_n}")
    if hi == 1:
        return 1
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def sampling_m_value(nu_x: float, n: int, p: EmbeddingParams, q: NoiseTailParams) -> float:
    """Pre-ceiling sampling dimension for embedding a corrupted vector."""
    if not 0 < nu_x <= 1:
        raise BadParams(f"nu_x must lie in (0, 1], got {nu_x}")
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    peak = nu_x + noise_peak_bound(q, n)
    denom = (q.sigma * q.sigma + 1.0 / n) * (1.0 - norm_slack(q, n))
    if denom <= 0:
        raise BadParams("noisy-distortion factor is not positive")
    return 2.0 * p.eps_s**-2 * math.log(1.0 / p.delta_s) * peak * peak / denom


def sampling_m(nu_x: float, n: int, p: EmbeddingParams, q: NoiseTailParams) -> int:
    return math.ceil(sampling_m_value(nu_x, n, p, q))


def hashing_m_value(p: EmbeddingParams) -> float:
    """Pre-ceiling hashing/gaussian dimension E * eps_s^-2 * log(1/delta_s)."""
    if p.E >= 2.0 / (p.delta_s * math.log(1.0 / p.delta_s)):
        raise BadParams(
            f"E={p.E} is not below 2/(delta_s*log(1/delta_s))="
            f"{2.0 / (p.delta_s * math.log(1.0 / p.delta_s))}"
        )
    return p.E * p.eps_s**-2 * math.log(1.0 / p.delta_s)


def hashing_m(p: EmbeddingParams) -> int:
    return math.ceil(hashing_m_value(p))


def noisy_norm_interval(norm2_sq_x: float, n: int, q: NoiseTailParams) -> tuple[float, float]:
    """Two-sided high-probability interval for the corrupted squared norm."""
    if norm2_sq_x < 0:
        raise BadParams(f"norm2_sq_x must be nonnegative, got {norm2_sq_x}")
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    center = (1.0 + q.sigma * q.sigma * n) * norm2_sq_x
    slack = norm_slack(q, n)
    return center * (1.0 - slack), center * (1.0 + slack)


@dataclass(frozen=True)
class TailBounds:
    max_gauss: float
    chi_sq: float
    combined: float


def tail_bounds(n: int, q: NoiseTailParams) -> TailBounds:
    """Failure probabilities: noise-peak tail, squared-norm tail, and their
    union with the (2n)^-(C1-1) peak-choice term."""
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    max_gauss = min(1.0, 2.0 * n * math.exp(-q.t * q.t / 2.0))
    chi_sq_raw = 2.0 * math.exp(-n * q.eps * q.eps / 12.0)
    extra = (2.0 * n) ** -(q.C1 - 1.0)
    combined = min(1.0, chi_sq_raw + 2.0 * math.exp(-q.t * q.t / 2.0) + extra)
    return TailBounds(max_gauss, min(1.0, chi_sq_raw), combined)


def noisy_nu_bound(nu_x: float, n: int, q: NoiseTailParams) -> float:
    """High-probability upper bound on the corrupted vector's non-uniformity."""
    if not 0 < nu_x <= 1:
        raise BadParams(f"nu_x must lie in (0, 1], got {nu_x}")
    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    denom_sq = (1.0 + q.sigma * q.sigma * n) * (1.0 - norm_slack(q, n))
    if denom_sq <= 0:
        raise BadParams("noisy-norm lower factor is not positive")
    return (nu_x + noise_peak_bound(q, n)) / math.sqrt(denom_sq)
