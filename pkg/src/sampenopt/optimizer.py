"""Regularized MSE objectives and the Bayesian-optimization drivers.

A trial evaluates the bootstrap-MSE objective f(psi) = MSE + lambda*sqrt(r)
for a decision point psi = (m, r, q); signal sets average the per-signal
MSE before adding the penalty. Infeasible evaluations (undefined entropy
or too many non-finite bootstrap replicates) score +inf and are never
selected. The driver runs T_init uniform random trials, then TPE proposals
until the trial budget is exhausted.

RNG streams: trial t, signal i, replicate b draws from the child stream
(seed, 0, t, i, b); the TPE proposal (and random-init draw) for trial t
uses (seed, 1, t). Results are therefore identical under any parallel
schedule of per-signal or per-replicate work; with threads > 1 the
per-signal evaluations run on a thread pool and are collected by index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import BootstrapConfig, bias, bootstrap_sampen, mse, variance
from .entropy import SampEnParams
from .errors import AllTrialsInfeasible, SignalTooShort
from .rng import child_seed, generator
from .signal import Signal, SignalSet
from .tpe import ParamDomain, ParamVector, TpeConfig, Trial, TrialHistory, propose

__all__ = [
    "OptimizerConfig",
    "TrialRecord",
    "OptResult",
    "objective_single",
    "objective_set",
    "optimize_single",
    "optimize_set",
]


@dataclass(frozen=True)
class OptimizerConfig:
    """Budgets, regularization and domains for the optimization drivers."""

    lam: float = 1.0 / 3.0
    b: int = 100
    t_tilde: int = 100
    t_init: int = 10
    domain: ParamDomain = field(default_factory=ParamDomain)
    n_candidates: int = 24
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.t_init < 1 or self.t_tilde < self.t_init:
            raise ValueError("need 1 <= T_init <= T_tilde")
        if self.b < 1:
            raise ValueError("replicate count B must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def tpe(self) -> TpeConfig:
        return TpeConfig(domain=self.domain, n_candidates=self.n_candidates)


@dataclass(frozen=True)
class TrialRecord:
    """Diagnostics for one trial: objective plus mean entropy/variance/bias.

    The mean diagnostics cover signals with feasible bootstrap sets; they
    are None for infeasible trials (y = +inf).
    """

    psi: ParamVector
    y: float
    feasible: bool
    entropy: float | None
    variance: float | None
    bias: float | None


@dataclass(frozen=True)
class OptResult:
    """Best point, best objective and the full trial history."""

    best_psi: ParamVector
    best_y: float
    history: TrialHistory
    records: tuple[TrialRecord, ...]

    def best_so_far(self) -> list[float]:
        out = []
        cur = math.inf
        for tr in self.history:
            cur = min(cur, tr.y)
            out.append(cur)
        return out


def _evaluate_signal(x: Signal, params: SampEnParams, q: float, b: int, seed: int):
    cfg = BootstrapConfig(q=q, b=b, seed=seed)
    try:
        est = bootstrap_sampen(x, params, cfg)
    except SignalTooShort:
        return None  # m too large for this signal: the trial is infeasible
    if not est.feasible:
        return None
    return mse(est), est.original.value, variance(est), bias(est)


def _objective(
    signals: tuple[Signal, ...],
    psi: ParamVector,
    lam: float,
    b: int,
    seed: int,
    trial_index: int,
    threads: int = 1,
) -> TrialRecord:
    """Mean bootstrap MSE + lambda*sqrt(r); +inf if any signal is infeasible."""
    params = SampEnParams(m=psi.m, r=psi.r)
    seeds = [child_seed(seed, 0, trial_index, i) for i in range(len(signals))]
    if threads > 1 and len(signals) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(_evaluate_signal, signals, [params] * len(signals), [psi.q] * len(signals), [b] * len(signals), seeds))
    else:
        outs = []
        for x, s_i in zip(signals, seeds):
            out = _evaluate_signal(x, params, psi.q, b, s_i)
            if out is None:
                outs = [None]
                break
            outs.append(out)
    if any(o is None for o in outs):
        return TrialRecord(psi=psi, y=math.inf, feasible=False, entropy=None, variance=None, bias=None)
    mses, thetas, variances, biases = map(list, zip(*outs))
    y = float(np.mean(mses)) + lam * math.sqrt(psi.r)
    return TrialRecord(
        psi=psi,
        y=y,
        feasible=True,
        entropy=float(np.mean(thetas)),
        variance=float(np.mean(variances)),
        bias=float(np.mean(biases)),
    )


def objective_single(
    x: Signal, psi: ParamVector, lam: float, b: int, seed: int, trial_index: int = 0
) -> float:
    """Bootstrap-MSE objective for one signal; +inf when infeasible."""
    return _objective((x,), psi, lam, b, seed, trial_index).y


def objective_set(
    s: SignalSet, psi: ParamVector, lam: float, b: int, seed: int, trial_index: int = 0
) -> float:
    """Mean per-signal bootstrap MSE + lambda*sqrt(r); +inf if any signal fails."""
    return _objective(s.signals, psi, lam, b, seed, trial_index).y


def _random_psi(domain: ParamDomain, rng: np.random.Generator) -> ParamVector:
    eps_r = 1e-9 * (domain.r_bounds[1] - domain.r_bounds[0])
    m = int(rng.integers(1, domain.u + 1))
    r = float(np.clip(rng.uniform(*domain.r_bounds), domain.r_bounds[0] + eps_r, domain.r_bounds[1] - eps_r))
    if domain.fixed_q is not None:
        q = domain.fixed_q
    else:
        eps_q = 1e-9 * (domain.q_bounds[1] - domain.q_bounds[0])
        q = float(np.clip(rng.uniform(*domain.q_bounds), domain.q_bounds[0] + eps_q, domain.q_bounds[1] - eps_q))
    return ParamVector(m=m, r=r, q=q)


def _optimize(signals: tuple[Signal, ...], cfg: OptimizerConfig) -> OptResult:
    tpe_cfg = cfg.tpe()
    history = TrialHistory()
    records: list[TrialRecord] = []
    for t in range(1, cfg.t_tilde + 1):
        rng = generator(cfg.seed, 1, t)
        if t <= cfg.t_init:
            psi = _random_psi(cfg.domain, rng)
        else:
            psi = propose(history, tpe_cfg, rng)
        rec = _objective(signals, psi, cfg.lam, cfg.b, cfg.seed, t, threads=cfg.threads)
        records.append(rec)
        history.append(Trial(psi=psi, y=rec.y))
    best_idx = None
    best_y = math.inf
    for i, tr in enumerate(history):
        if tr.finite and tr.y < best_y:
            best_idx, best_y = i, tr.y
    if best_idx is None:
        raise AllTrialsInfeasible("every trial scored +inf; widen the domain or shrink m/r demands")
    return OptResult(
        best_psi=history.trials[best_idx].psi,
        best_y=best_y,
        history=history,
        records=tuple(records),
    )


def optimize_single(x: Signal, cfg: OptimizerConfig) -> OptResult:
    """Select (m, r, q) for one signal by TPE Bayesian optimization."""
    return _optimize((x,), cfg)


def optimize_set(s: SignalSet, cfg: OptimizerConfig) -> OptResult:
    """Select one (m, r, q) for a whole signal set (mean-MSE objective)."""
    return _optimize(s.signals, cfg)
