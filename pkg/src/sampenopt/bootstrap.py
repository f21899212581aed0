"""Stationary bootstrap replicates and the bootstrap variance/bias/MSE.

Replicates follow Politis & Romano's stationary bootstrap: blocks start at
a uniformly random index, have Geom(q) lengths (support {1, 2, ...},
expected length 1/q), wrap around the end of the signal, and the final
block is truncated so the replicate has exactly the original length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import SampEnParams, SampEnResult, sampen
from .errors import Infeasible
from .rng import generator
from .signal import Signal

__all__ = [
    "BootstrapConfig",
    "BootstrapEstimates",
    "stationary_bootstrap",
    "bootstrap_sampen",
    "variance",
    "bias",
    "mse",
    "bootstrap_se",
]


@dataclass(frozen=True)
class BootstrapConfig:
    """Replicate count B, geometric success probability q and master seed."""

    q: float
    b: int
    seed: int

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError("q must lie in (0, 1)")
        if self.b < 1:
            raise ValueError("replicate count B must be >= 1")


@dataclass(frozen=True)
class BootstrapEstimates:
    """Original estimate plus B replicate estimates and the feasibility flag.

    feasible is true iff the original value is finite and at least 90% of
    replicate values are finite.
    """

    original: SampEnResult
    replicates: tuple[SampEnResult, ...]

    @property
    def feasible(self) -> bool:
        n_finite = sum(1 for r in self.replicates if r.finite)
        return self.original.finite and 10 * n_finite >= 9 * len(self.replicates)

    def finite_values(self) -> np.ndarray:
        return np.array([r.value for r in self.replicates if r.finite], dtype=np.float64)


def _draw_block_lengths(q: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Geom(q) block lengths with support {1, 2, ...} (P(b=1) = q, E[b] = 1/q)."""
    return rng.geometric(q, size=size)


def _block_indices(starts: np.ndarray, lengths: np.ndarray, n: int) -> np.ndarray:
    """Source indices for concatenated blocks, wrapped mod n, truncated to n.

    starts are 0-based. lengths must sum to at least n; the final block is
    shortened so exactly n indices come back.
    """
    cum = np.cumsum(lengths)
    nb = int(np.searchsorted(cum, n)) + 1
    starts = starts[:nb]
    lengths = lengths[:nb].copy()
    lengths[-1] -= int(cum[nb - 1]) - n
    offsets = np.arange(n) - np.repeat(np.concatenate(([0], np.cumsum(lengths[:-1]))), lengths)
    return (np.repeat(starts, lengths) + offsets) % n


def stationary_bootstrap(x: Signal, q: float, rng: np.random.Generator) -> Signal:
    """One stationary-bootstrap replicate of x, same length as x.

    Draws n start indices and n geometric lengths up front (n blocks always
    suffice since lengths are >= 1) and assembles only as many blocks as
    needed; wrap-around indexing handles blocks running past the end.
    """
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie in (0, 1)")
    n = x.n
    starts = rng.integers(0, n, size=n)
    lengths = _draw_block_lengths(q, n, rng)
    return x.with_values(x.values[_block_indices(starts, lengths, n)])


def bootstrap_sampen(x: Signal, p: SampEnParams, cfg: BootstrapConfig) -> BootstrapEstimates:
    """Score B stationary-bootstrap replicates of x with sampen.

    Replicate b draws from the child stream (cfg.seed, b), so results are
    identical under any parallel execution order.
    """
    original = sampen(x, p)
    reps = []
    for b in range(cfg.b):
        xb = stationary_bootstrap(x, cfg.q, generator(cfg.seed, b))
        reps.append(sampen(xb, p))
    return BootstrapEstimates(original=original, replicates=tuple(reps))


def _require_feasible(est: BootstrapEstimates) -> np.ndarray:
    if not est.feasible:
        raise Infeasible("bootstrap estimate set is infeasible (too many non-finite values)")
    # sorting makes every moment exactly invariant to replicate order
    return np.sort(est.finite_values())


def variance(est: BootstrapEstimates) -> float:
    """Mean squared deviation of finite replicate values around their mean."""
    vals = _require_feasible(est)
    return float(np.mean((vals - vals.mean()) ** 2))


def bias(est: BootstrapEstimates) -> float:
    """Mean of finite replicate values minus the original estimate."""
    vals = _require_feasible(est)
    return float(vals.mean() - est.original.value)


def mse(est: BootstrapEstimates) -> float:
    """Mean squared deviation of finite replicates from the original estimate.

    Equals bias(est)**2 + variance(est) exactly (same finite subset and
    divisor on both sides of the identity).
    """
    vals = _require_feasible(est)
    return float(np.mean((est.original.value - vals) ** 2))


def bootstrap_se(est: BootstrapEstimates) -> float:
    """Bootstrap standard error: sqrt of the replicate variance."""
    return math.sqrt(variance(est))
