"""Tree-structured Parzen Estimator surrogate and acquisition.

The history of (psi, y) trials is split into better/worse sets by the
top-quantile rule T_l = min(ceil(gamma * T), 25). Each set gets a
per-dimension kernel mixture: one truncated Gaussian (continuous dims) or
interval-discretized Gaussian (the embedding dimension) per trial, plus a
non-informative prior component, with shared mixture weights per group.
The next evaluation point is the best of S candidates drawn from the
better-group density, scored by the log density ratio.

Constants (gamma = 0.10, cap 25, S = 24 candidates, Scott bandwidths with
magic clipping, old-decay weights) follow the defaults popularized by
Bergstra et al.'s TPE work and the Optuna framework.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import EmptyHistory

__all__ = [
    "ParamDomain",
    "ParamVector",
    "Trial",
    "TrialHistory",
    "TpeConfig",
    "SurrogateDensity",
    "split_history",
    "scott_bandwidth",
    "kernel_continuous",
    "kernel_discrete",
    "decay_weights",
    "build_density",
    "propose",
]

_TINY = 1e-300


@dataclass(frozen=True)
class ParamDomain:
    """Search domain: m in {1..u}, r and q in open unit subintervals.

    fixed_q pins the bootstrap success probability and removes q from the
    sampled/kernelized dimensions.
    """

    u: int = 3
    r_bounds: tuple[float, float] = (0.01, 1.0)
    q_bounds: tuple[float, float] = (0.01, 0.99)
    fixed_q: float | None = None

    def __post_init__(self):
        if self.u < 1:
            raise ValueError("m upper bound U must be >= 1")
        for name, (lo, hi) in (("r", self.r_bounds), ("q", self.q_bounds)):
            if not (0.0 < lo < hi <= 1.0):
                raise ValueError(f"{name} bounds must satisfy 0 < lo < hi <= 1")
        if self.fixed_q is not None and not (0.0 < self.fixed_q < 1.0):
            raise ValueError("fixed q must lie in (0, 1)")

    @property
    def n_dims(self) -> int:
        return 2 if self.fixed_q is not None else 3

    def contains(self, psi: "ParamVector") -> bool:
        ok = 1 <= psi.m <= self.u and self.r_bounds[0] <= psi.r <= self.r_bounds[1]
        if self.fixed_q is None:
            ok = ok and self.q_bounds[0] <= psi.q <= self.q_bounds[1]
        else:
            ok = ok and psi.q == self.fixed_q
        return ok


@dataclass(frozen=True)
class ParamVector:
    """One decision point: embedding dimension m, radius r, bootstrap q."""

    m: int
    r: float
    q: float


@dataclass(frozen=True)
class Trial:
    """A scored decision point; y is math.inf for infeasible evaluations."""

    psi: ParamVector
    y: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.y)


class TrialHistory:
    """Insertion-ordered trials plus a stable sorted-by-y view."""

    def __init__(self, trials: list[Trial] | None = None):
        self.trials: list[Trial] = list(trials) if trials else []

    def append(self, trial: Trial) -> None:
        self.trials.append(trial)

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def sorted_by_y(self) -> list[Trial]:
        # stable sort: ties and +inf keep insertion order, +inf sorts last
        return sorted(self.trials, key=lambda t: t.y)


@dataclass(frozen=True)
class TpeConfig:
    """Surrogate/acquisition constants and the search domain."""

    domain: ParamDomain = field(default_factory=ParamDomain)
    gamma: float = 0.10
    better_cap: int = 25
    n_candidates: int = 24

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must lie in (0, 1]")
        if self.n_candidates < 1:
            raise ValueError("candidate count S must be >= 1")


def _split_indices(history: TrialHistory, cfg: TpeConfig) -> tuple[list[int], list[int]]:
    t = len(history)
    if t < 1:
        raise EmptyHistory("need at least one trial to split")
    order = sorted(range(t), key=lambda i: history.trials[i].y)  # stable: ties keep insertion order
    t_l = min(math.ceil(cfg.gamma * t), cfg.better_cap)
    n_finite = sum(1 for tr in history.trials if tr.finite)
    t_l = min(t_l, n_finite)
    return order[:t_l], order[t_l:]


def split_history(history: TrialHistory, cfg: TpeConfig) -> tuple[list[Trial], list[Trial]]:
    """Partition trials into (better, worse) by the top-quantile rule.

    T_l = min(ceil(gamma * T), cap), restricted to finite-y trials:
    infeasible trials always land in the worse set, so the better set may
    be smaller than T_l (possibly empty when every trial is infeasible).
    """
    better_idx, worse_idx = _split_indices(history, cfg)
    trials = history.trials
    return [trials[i] for i in better_idx], [trials[i] for i in worse_idx]


def scott_bandwidth(t_group: int, d: int, lo: float, hi: float, t_total: int) -> float:
    """Scott's rule T^(-1/(d+4)) with the magic-clipping floor (hi-lo)/min(T, 100)."""
    if t_group < 1:
        raise ValueError("bandwidth needs at least one observation")
    b = t_group ** (-1.0 / (d + 4))
    b_min = (hi - lo) / min(t_total, 100)
    return max(b, b_min)


def kernel_continuous(v: float, center: float, b: float, lo: float, hi: float) -> float:
    """Gaussian density at v, renormalized by the Gaussian mass on [lo, hi]."""
    z = (v - center) / b
    mass = ndtr((hi - center) / b) - ndtr((lo - center) / b)
    return math.exp(-0.5 * z * z) / (b * math.sqrt(2.0 * math.pi)) / max(mass, _TINY)


def kernel_discrete(m: int, center: float, b: float, u: int) -> float:
    """Gaussian mass on [m - 1/2, m + 1/2] normalized by the mass on [1/2, u + 1/2]."""
    if not (1 <= m <= u):
        raise ValueError("m outside {1..U}")
    cell = ndtr((m + 0.5 - center) / b) - ndtr((m - 0.5 - center) / b)
    total = ndtr((u + 0.5 - center) / b) - ndtr((0.5 - center) / b)
    return float(cell / max(total, _TINY))


def decay_weights(t_l: int, t_g: int) -> tuple[np.ndarray, np.ndarray]:
    """Mixture weights for both groups; index 0 of each vector is the prior.

    Better group: uniform over its t_l kernels plus the prior. Worse group:
    old-decay: the 25 most recent components keep raw weight 1, older ones
    ramp down via tau(i) = (i - 1)/(t_g - 25) as w' = tau + (1 - tau)/(t_g + 1);
    the prior takes the oldest position (i = 1); weights are then normalized.
    When t_g <= 25 every component is "recent" and the group is uniform.
    """
    better = np.full(t_l + 1, 1.0 / (t_l + 1))
    if t_g <= 25:
        worse = np.ones(t_g + 1)
    else:
        order = np.arange(1, t_g + 2, dtype=np.float64)
        tau = (order - 1.0) / (t_g - 25)
        worse = np.where(order > t_g + 1 - 25, 1.0, tau + (1.0 - tau) / (t_g + 1))
    return better, worse / worse.sum()


@dataclass(frozen=True)
class _DimMixture:
    """One dimension of the surrogate: kernel centers and bandwidths.

    Component 0 is the prior; components 1.. are per-trial kernels (worse
    group: in query order, matching the weight vector).
    """

    kind: str  # "discrete" | "continuous"
    lo: float
    hi: float
    centers: np.ndarray
    bandwidths: np.ndarray

    def log_components(self, v: float) -> np.ndarray:
        c, b = self.centers, self.bandwidths
        if self.kind == "discrete":
            u = int(self.hi)
            cell = ndtr((v + 0.5 - c) / b) - ndtr((v - 0.5 - c) / b)
            total = ndtr((u + 0.5 - c) / b) - ndtr((0.5 - c) / b)
            return np.log(np.maximum(cell, _TINY)) - np.log(np.maximum(total, _TINY))
        z = (v - c) / b
        log_norm = -0.5 * z * z - np.log(b) - 0.5 * math.log(2.0 * math.pi)
        mass = ndtr((self.hi - c) / b) - ndtr((self.lo - c) / b)
        return log_norm - np.log(np.maximum(mass, _TINY))

    def sample_component(self, idx: int, rng: np.random.Generator) -> float:
        c, b = float(self.centers[idx]), float(self.bandwidths[idx])
        if self.kind == "discrete":
            u = int(self.hi)
            grid = np.arange(1, u + 1)
            cells = ndtr((grid + 0.5 - c) / b) - ndtr((grid - 0.5 - c) / b)
            cells = np.maximum(cells, 0.0)
            cdf = np.cumsum(cells / max(cells.sum(), _TINY))
            return float(grid[int(np.searchsorted(cdf, rng.random(), side="left").clip(0, u - 1))])
        # inverse-CDF truncated normal draw, clamped inside the open domain
        a = ndtr((self.lo - c) / b)
        z = ndtr((self.hi - c) / b)
        v = c + b * ndtri(a + (z - a) * rng.random())
        eps = 1e-9 * (self.hi - self.lo)
        return float(min(max(v, self.lo + eps), self.hi - eps))


@dataclass(frozen=True)
class SurrogateDensity:
    """Per-dimension kernel mixtures with shared component weights."""

    dims: dict  # name -> _DimMixture
    weights: np.ndarray

    def logpdf(self, psi: ParamVector) -> float:
        logw = np.log(self.weights)
        total = 0.0
        for name, mix in self.dims.items():
            v = getattr(psi, name)
            comp = logw + mix.log_components(float(v))
            m = comp.max()
            total += m + math.log(np.exp(comp - m).sum())
        return total

    def sample(self, rng: np.random.Generator, fixed_q: float | None) -> ParamVector:
        cdf = np.cumsum(self.weights)
        out = {}
        for name, mix in self.dims.items():
            idx = int(np.searchsorted(cdf, rng.random(), side="left").clip(0, len(self.weights) - 1))
            out[name] = mix.sample_component(idx, rng)
        return ParamVector(m=int(out["m"]), r=out["r"], q=fixed_q if fixed_q is not None else out["q"])


def _prior_params(domain: ParamDomain) -> dict:
    # non-informative prior: mean ((U-1)/2, 1/2, 1/2), stds (U-1, 1, 1);
    # the m std degenerates at U = 1 where any positive value gives mass 1
    u = domain.u
    return {
        "m": ((u - 1) / 2.0, float(u - 1) if u > 1 else 1.0),
        "r": (0.5, 1.0),
        "q": (0.5, 1.0),
    }


def build_density(group: list[Trial], role: str, cfg: TpeConfig, t_total: int) -> SurrogateDensity:
    """Kernel density for one partition group ("better" or "worse").

    An empty group yields the prior alone. Weights index components in the
    order given, with the prior at position 0; for the worse group the
    caller must pass trials oldest-first so old-decay lines up with query
    order (the better group's weights are uniform, so order is moot).
    """
    if role not in ("better", "worse"):
        raise ValueError("role must be 'better' or 'worse'")
    domain = cfg.domain
    k = len(group)
    if role == "better":
        weights, _ = decay_weights(k, 0)
    else:
        _, weights = decay_weights(0, k)
    prior = _prior_params(domain)
    bounds = {"m": (1.0, float(domain.u)), "r": domain.r_bounds, "q": domain.q_bounds}
    dims = {}
    names = ["m", "r"] + ([] if domain.fixed_q is not None else ["q"])
    d = len(names)
    for name in names:
        lo, hi = bounds[name]
        pc, pb = prior[name]
        centers = [pc]
        bws = [pb]
        if k > 0:
            # Scott term uses the full evaluation count T: bandwidths then
            # shrink as the search proceeds, which is what moves the
            # sampler from exploration into exploitation
            b = scott_bandwidth(t_total, d, lo, hi, t_total)
            centers.extend(float(getattr(tr.psi, name)) for tr in group)
            bws.extend([b] * k)
        dims[name] = _DimMixture(
            kind="discrete" if name == "m" else "continuous",
            lo=lo,
            hi=hi,
            centers=np.asarray(centers),
            bandwidths=np.asarray(bws),
        )
    return SurrogateDensity(dims=dims, weights=weights)


def propose(history: TrialHistory, cfg: TpeConfig, rng: np.random.Generator) -> ParamVector:
    """Next evaluation point: argmax of the density ratio over S candidates.

    Candidates are drawn from the better-group density; scoring is done in
    the log domain. Deterministic given the rng state.
    """
    better_idx, worse_idx = _split_indices(history, cfg)
    t_total = len(history)
    trials = history.trials
    p_l = build_density([trials[i] for i in better_idx], "better", cfg, t_total)
    # old-decay weights index worse-group components by query order, oldest first
    p_g = build_density([trials[i] for i in sorted(worse_idx)], "worse", cfg, t_total)
    best_psi = None
    best_score = -math.inf
    for _ in range(cfg.n_candidates):
        cand = p_l.sample(rng, cfg.domain.fixed_q)
        score = p_l.logpdf(cand) - p_g.logpdf(cand)
        if score > best_score:
            best_score = score
            best_psi = cand
    return best_psi
