"""Signal containers, normalization, differencing and synthetic generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scipy.signal import lfilter

from .errors import NonStationaryConfig, TooShort, ZeroVariance
from .rng import child_seed, generator


@dataclass(frozen=True)
class Signal:
    """One finite real-valued time series with an identity and optional label."""

    id: str
    values: np.ndarray
    label: str | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError(f"signal {self.id!r}: values must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"signal {self.id!r}: values must be finite")

    @property
    def n(self) -> int:
        return int(self.values.size)

    def with_values(self, values: np.ndarray) -> "Signal":
        return Signal(id=self.id, values=values, label=self.label)


@dataclass(frozen=True)
class SignalSet:
    """An ordered collection of signals with unique ids."""

    signals: tuple[Signal, ...]

    def __post_init__(self):
        sigs = tuple(self.signals)
        object.__setattr__(self, "signals", sigs)
        if len(sigs) < 1:
            raise ValueError("signal set must contain at least one signal")
        ids = [s.id for s in sigs]
        if len(set(ids)) != len(ids):
            raise ValueError("signal ids must be unique within a set")

    @property
    def n(self) -> int:
        return len(self.signals)

    def __iter__(self):
        return iter(self.signals)

    def __getitem__(self, i: int) -> Signal:
        return self.signals[i]

    def labels(self) -> list[str | None]:
        return [s.label for s in self.signals]


@dataclass(frozen=True)
class Ar1Config:
    """AR(1) generator settings: x_t = phi * x_{t-1} + eps_t, eps ~ N(0, sigma^2)."""

    phi: float
    sigma: float
    n: int
    seed: int
    burn_in: int = 500

    def __post_init__(self):
        if abs(self.phi) >= 1.0:
            raise NonStationaryConfig(f"|phi| must be < 1 for a stationary AR(1); got {self.phi}")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")


def normalize(x: Signal) -> Signal:
    """Rescale to zero sample mean and unit sample (n-1) standard deviation.

    Raises ZeroVariance for constant signals. Idempotent to within 1e-12.
    """
    if x.n < 2:
        raise TooShort(f"signal {x.id!r}: need at least 2 samples to normalize")
    sd = float(np.std(x.values, ddof=1))
    if sd == 0.0:
        raise ZeroVariance(f"signal {x.id!r}: constant signal cannot be normalized")
    return x.with_values((x.values - np.mean(x.values)) / sd)


def difference(x: Signal) -> Signal:
    """First difference: out[t] = x[t+1] - x[t]; length drops by one."""
    if x.n < 3:
        raise TooShort(f"signal {x.id!r}: need at least 3 samples to difference")
    return x.with_values(np.diff(x.values))


def gen_white_noise(n: int, sigma: float, seed: int, id: str = "wn", label: str | None = None) -> Signal:
    """n i.i.d. N(0, sigma^2) draws; bit-reproducible under the seed."""
    if n < 1:
        raise ValueError("n must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = generator(seed)
    return Signal(id=id, values=sigma * rng.standard_normal(n), label=label)


def gen_ar1(cfg: Ar1Config, id: str = "ar1", label: str | None = None) -> Signal:
    """Simulate burn_in + n AR(1) steps from x_0 = 0 and discard the burn-in."""
    rng = generator(cfg.seed)
    total = cfg.burn_in + cfg.n
    eps = cfg.sigma * rng.standard_normal(total)
    # x_t = phi x_{t-1} + eps_t from x_0 = 0 is an IIR filter with zero state
    out = lfilter([1.0], [1.0, -cfg.phi], eps)
    return Signal(id=id, values=out[cfg.burn_in:], label=label)


def gen_signal_set(
    kind: str,
    n_signals: int,
    n: int,
    seed: int,
    sigma: float = 1.0,
    phi: float = 0.9,
    burn_in: int = 500,
    normalize_signals: bool = True,
    label: str | None = None,
) -> SignalSet:
    """Generate a set of white-noise or AR(1) signals with indexed child seeds.

    Signal i uses the child stream (seed, i), so any subset is reproducible
    independently of set size.
    """
    if kind not in ("white_noise", "ar1"):
        raise ValueError(f"unknown signal kind {kind!r}")
    signals = []
    for i in range(n_signals):
        sid = f"{kind}_{i:05d}"
        sub = child_seed(seed, i)
        if kind == "white_noise":
            s = gen_white_noise(n, sigma, sub, id=sid, label=label)
        else:
            s = gen_ar1(Ar1Config(phi=phi, sigma=sigma, n=n, seed=sub, burn_in=burn_in), id=sid, label=label)
        signals.append(normalize(s) if normalize_signals else s)
    return SignalSet(tuple(signals))
