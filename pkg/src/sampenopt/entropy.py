"""Sample entropy, fuzzy entropy and the counting-based standard error.

Template matching follows the Richman & Moorman (2000) construction with
delay fixed at 1. Matches at template lengths m and m+1 are counted over
the common start-index range {0, ..., N-m-2} (0-based), so both counts
share the normalizer Z = (N-m)(N-m-1) over ordered pairs, the conditional
probability CP = A/B is a like-to-like ratio, and an (m+1)-match always
implies an m-match. Distances are Chebyshev (L-inf); a match is d <= r
(closed ball). Self-matches are never counted.

The radius r is interpreted in units of the normalized signal's standard
deviation, i.e. r = 0.20 means 0.20 sigma on a unit-variance signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SignalTooShort, UndefinedEntropy
from .signal import Signal

__all__ = [
    "SampEnParams",
    "MatchCounts",
    "SampEnResult",
    "count_matches",
    "sampen",
    "fuzzen",
    "counting_se",
    "cp_sigma",
]


@dataclass(frozen=True)
class SampEnParams:
    """Embedding dimension m >= 1 and similarity radius r > 0 (delay is 1)."""

    m: int
    r: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("embedding dimension m must be >= 1")
        if not (self.r > 0):
            raise ValueError("similarity radius r must be positive")


@dataclass(frozen=True)
class MatchCounts:
    """Ordered-pair match counts at lengths m (b_count) and m+1 (a_count).

    z = (N-m)(N-m-1) is the number of ordered index pairs, shared by both
    counts. Each unordered match is counted twice, so both counts are even.
    """

    b_count: int
    a_count: int
    z: int

    def __post_init__(self):
        if self.a_count > self.b_count:
            raise ValueError("a_count cannot exceed b_count")


@dataclass(frozen=True)
class SampEnResult:
    """SampEn estimate with its match probabilities.

    value is -log(am/bm) when defined, math.inf when bm > 0 but am = 0,
    and None (undefined) when bm = 0. cp is None exactly when bm = 0.
    """

    bm: float
    am: float
    cp: float | None
    value: float | None

    @property
    def defined(self) -> bool:
        return self.value is not None

    @property
    def finite(self) -> bool:
        return self.value is not None and math.isfinite(self.value)


def _template_distance_matrices(x: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev distance matrices for m- and (m+1)-templates.

    Both matrices are restricted to the common start range 0..N-m-2 and
    have shape (N-m, N-m). Built by a running maximum over diagonal-shifted
    absolute difference matrices, which reproduces the naive double loop's
    float operations exactly (abs and max are exact).
    """
    n = x.size
    nt = n - m
    a = np.abs(x[:, None] - x[None, :])
    d = a
    for k in range(1, m):
        d = np.maximum(d[:-1, :-1], a[k:, k:])
    # d now holds length-m template distances for starts 0..n-m
    d_m = d[:nt, :nt]
    d_m1 = np.maximum(d[:-1, :-1], a[m:, m:])
    return d_m, d_m1


def count_matches(x: Signal, p: SampEnParams) -> MatchCounts:
    """Count ordered template-pair matches at lengths m and m+1.

    Requires N >= m + 2 so that the common index range is non-degenerate.
    """
    n = x.n
    if n < p.m + 2:
        raise SignalTooShort(f"signal {x.id!r}: need N >= m + 2 = {p.m + 2}, got N = {n}")
    nt = n - p.m
    d_m, d_m1 = _template_distance_matrices(x.values, p.m)
    # subtract the diagonal: self-distances are 0 and always within r
    b_count = int(np.count_nonzero(d_m <= p.r)) - nt
    a_count = int(np.count_nonzero(d_m1 <= p.r)) - nt
    return MatchCounts(b_count=b_count, a_count=a_count, z=nt * (nt - 1))


def sampen(x: Signal, p: SampEnParams) -> SampEnResult:
    """Sample entropy estimate -log(A/B) with explicit undefined/infinite states."""
    c = count_matches(x, p)
    bm = c.b_count / c.z
    am = c.a_count / c.z
    if c.b_count == 0:
        return SampEnResult(bm=bm, am=am, cp=None, value=None)
    cp = c.a_count / c.b_count
    if c.a_count == 0:
        return SampEnResult(bm=bm, am=am, cp=cp, value=math.inf)
    return SampEnResult(bm=bm, am=am, cp=cp, value=-math.log(cp))


def _fuzzy_log_phi(x: np.ndarray, k: int, nt: int, r: float, eta: float) -> float:
    """log of the mean fuzzy membership over ordered baseline-removed k-template pairs.

    Works in the log domain so tiny memberships (large (d/r)^eta) never
    underflow the average to zero; self-pairs are excluded by masking.
    """
    t = np.lib.stride_tricks.sliding_window_view(x, k)[:nt].astype(np.float64)
    t = t - t.mean(axis=1, keepdims=True)
    d = np.abs(t[:, None, :] - t[None, :, :]).max(axis=2)
    with np.errstate(over="ignore"):
        u = -np.power(d / r, eta)
    # clamp so an overflowed exponent cannot poison the max-shift with -inf
    u = np.maximum(u, -1e300)
    np.fill_diagonal(u, -np.inf)
    top = u.max()
    return float(top + np.log(np.exp(u - top).sum()) - math.log(nt * (nt - 1)))


def fuzzen(x: Signal, m: int, r: float, eta: float = 2.0) -> float:
    """Fuzzy entropy: -log(phi_{m+1}/phi_m) with membership exp(-(d/r)^eta).

    Templates are baseline-removed (each minus its own mean) following
    Chen et al.'s fuzzy entropy convention, and both phi terms average over
    the same ordered index range as sampen. Always finite for finite input.
    """
    if m < 1:
        raise ValueError("embedding dimension m must be >= 1")
    if not (r > 0) or not (eta > 0):
        raise ValueError("r and eta must be positive")
    n = x.n
    if n < m + 2:
        raise SignalTooShort(f"signal {x.id!r}: need N >= m + 2 = {m + 2}, got N = {n}")
    nt = n - m
    return _fuzzy_log_phi(x.values, m, nt, r, eta) - _fuzzy_log_phi(x.values, m + 1, nt, r, eta)


def _overlap_counts(starts: np.ndarray, ext_match: np.ndarray, m: int) -> tuple[int, int]:
    """Ordered counts of overlapping distinct pairs-of-pairs (K_B, K_A).

    starts: (K, 2) start indices (i < j) of the K unordered matching
    m-template pairs. ext_match: boolean (K,) marking pairs that also match
    at length m+1. Two pairs overlap when any of their four (m+1)-point
    template windows [s, s+m] intersect, i.e. when
    min(|i-k|, |i-l|, |j-k|, |j-l|) <= m.
    """
    i = starts[:, 0].astype(np.int32)
    j = starts[:, 1].astype(np.int32)
    kb = 0
    ka = 0
    chunk = max(1, int(2_000_000 // max(len(i), 1)))
    for lo in range(0, len(i), chunk):
        hi = lo + chunk
        ic, jc = i[lo:hi, None], j[lo:hi, None]
        gap = np.abs(ic - i[None, :])
        np.minimum(gap, np.abs(ic - j[None, :]), out=gap)
        np.minimum(gap, np.abs(jc - i[None, :]), out=gap)
        np.minimum(gap, np.abs(jc - j[None, :]), out=gap)
        ov = gap <= m
        # drop the self-pairs on the global diagonal
        rows = np.arange(lo, min(hi, len(i)))
        ov[rows - lo, rows] = False
        kb += int(np.count_nonzero(ov))
        ka += int(np.count_nonzero(ov[ext_match[lo:hi]][:, ext_match]))
    return kb, ka


def cp_sigma(x: Signal, p: SampEnParams) -> tuple[float, float]:
    """Conditional probability CP and its counting-based standard deviation.

    Follows Lake et al. (2002): treat each of the B unordered matching
    m-template pairs as a Bernoulli trial for extension to an (m+1)-match,
    and correct for correlation between overlapping pairs:

        var(CP) = CP(1 - CP)/B + (K_A - K_B CP^2)/B^2

    where K_B counts ordered distinct overlapping pairs of matching
    m-pairs and K_A the same among pairs that also match at length m+1
    (E[X_p X_q] for overlapping pairs is estimated by K_A/K_B). Negative
    corrected variance is clamped to zero.

    Raises UndefinedEntropy when CP is undefined (B = 0) or zero (A = 0).
    """
    n = x.n
    if n < p.m + 2:
        raise SignalTooShort(f"signal {x.id!r}: need N >= m + 2 = {p.m + 2}, got N = {n}")
    nt = n - p.m
    d_m, d_m1 = _template_distance_matrices(x.values, p.m)
    iu = np.triu_indices(nt, k=1)
    match_m = d_m[iu] <= p.r
    if not match_m.any():
        raise UndefinedEntropy(f"signal {x.id!r}: no template matches at (m={p.m}, r={p.r})")
    starts = np.column_stack((iu[0][match_m], iu[1][match_m]))
    ext = d_m1[starts[:, 0], starts[:, 1]] <= p.r
    b_un = int(len(starts))
    a_un = int(np.count_nonzero(ext))
    cp = a_un / b_un
    if a_un == 0:
        raise UndefinedEntropy(f"signal {x.id!r}: CP = 0 at (m={p.m}, r={p.r}); entropy infinite")
    kb, ka = _overlap_counts(starts, ext, p.m)
    var_cp = cp * (1.0 - cp) / b_un + (ka - kb * cp * cp) / (b_un * b_un)
    return cp, math.sqrt(max(var_cp, 0.0))


def counting_se(x: Signal, p: SampEnParams) -> float:
    """Counting-based standard error of the SampEn estimate: sigma_CP / CP.

    The corresponding SampEn variance estimate is this value squared
    (delta method through -log). Requires a finite entropy estimate.
    """
    cp, sigma = cp_sigma(x, p)
    return sigma / cp
