"""Desk-scale reproduction harnesses for the synthetic studies.

Two experiments: the variance-estimator error benchmark (counting versus
bootstrap variance estimates scored against a large-population "true"
cross-signal variance) and the four-way method comparison (TPE-optimized
selection versus the efficiency-criterion, convergence and standard
baselines on a common generated signal set).

Defaults are desk-scale (population 2,000, 5 repeats) to bound runtime;
both are configurable up to the full scale (10,000 / 20).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import (
    RadiusGrid,
    convergence_select,
    gaussian_mse_approx,
    sampeneff_select,
    standard_params_eval,
)
from .bootstrap import BootstrapConfig, bootstrap_sampen, variance
from .entropy import SampEnParams, cp_sigma, sampen
from .errors import InsufficientDefined, UndefinedEntropy
from .optimizer import OptimizerConfig, optimize_set
from .rng import child_seed, generator
from .signal import SignalSet, gen_signal_set
from .tpe import ParamDomain

__all__ = [
    "VarBenchConfig",
    "VarBenchResult",
    "true_variance",
    "estimator_error",
    "MethodComparisonConfig",
    "MethodRow",
    "method_comparison",
]


@dataclass(frozen=True)
class VarBenchConfig:
    """Variance-estimator benchmark settings.

    Defaults follow the benchmark protocol with desk-scale population and
    repeats: m = 1, q = 0.9 for white noise / 0.5 for AR(1), B = 100.
    """

    signal_type: str = "white_noise"
    n: int = 100
    r: float = 0.20
    m: int = 1
    q: float | None = None
    b: int = 100
    n_population: int = 2000
    n_subsample: int = 100
    repeats: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.signal_type not in ("white_noise", "ar1"):
            raise ValueError(f"unknown signal type {self.signal_type!r}")
        if self.n_subsample > self.n_population:
            raise ValueError("subsample size cannot exceed population size")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    @property
    def q_value(self) -> float:
        if self.q is not None:
            return self.q
        return 0.9 if self.signal_type == "white_noise" else 0.5


@dataclass(frozen=True)
class VarBenchResult:
    """True variance, per-repeat estimator errors, and relative reduction."""

    true_var: float
    eps_counting: tuple[float, ...]
    eps_bootstrap: tuple[float, ...]
    reductions: tuple[float, ...]
    mean_reduction: float
    reduction_interval: tuple[float, float]


def true_variance(s_pop: SignalSet, m: int, r: float) -> float:
    """(n-1)-divisor cross-signal variance of the defined SampEn estimates."""
    p = SampEnParams(m=m, r=r)
    vals = [res.value for res in (sampen(x, p) for x in s_pop) if res.finite]
    if len(vals) < 2:
        raise InsufficientDefined("need at least two defined SampEn estimates")
    return float(np.var(vals, ddof=1))


def _counting_variance_estimate(x, p: SampEnParams) -> float:
    cp, sigma = cp_sigma(x, p)
    return (sigma / cp) ** 2


def _bootstrap_variance_estimate(x, p: SampEnParams, q: float, b: int, seed: int) -> float:
    est = bootstrap_sampen(x, p, BootstrapConfig(q=q, b=b, seed=seed))
    return variance(est)


def estimator_error(cfg: VarBenchConfig, counting=None, bootstrap=None) -> VarBenchResult:
    """Score both SampEn variance estimators against the population truth.

    Builds the population, computes the true cross-signal variance, then
    for each repeat subsamples n_subsample signals and scores each
    estimator's mean squared error against the truth. Signals where either
    estimator is undefined are excluded from both averages (keeps the
    comparison like-to-like). Reports per-repeat errors plus the relative
    reduction 100 * (eps_counting - eps_bootstrap) / eps_counting.

    The counting/bootstrap callables are injectable for harness tests.
    """
    p = SampEnParams(m=cfg.m, r=cfg.r)
    pop = gen_signal_set(cfg.signal_type, cfg.n_population, cfg.n, seed=child_seed(cfg.seed, 0))
    sigma2 = true_variance(pop, cfg.m, cfg.r)
    counting = counting or (lambda x, seed: _counting_variance_estimate(x, p))
    bootstrap = bootstrap or (
        lambda x, seed: _bootstrap_variance_estimate(x, p, cfg.q_value, cfg.b, seed)
    )
    eps_c, eps_b, reductions = [], [], []
    for rep in range(cfg.repeats):
        rng = generator(cfg.seed, 1, rep)
        idx = rng.choice(cfg.n_population, size=cfg.n_subsample, replace=False)
        sq_c, sq_b = [], []
        for j, i in enumerate(sorted(int(v) for v in idx)):
            x = pop[i]
            seed_ij = child_seed(cfg.seed, 2, rep, j)
            try:
                vc = counting(x, seed_ij)
                vb = bootstrap(x, seed_ij)
            except UndefinedEntropy:
                continue
            sq_c.append((sigma2 - vc) ** 2)
            sq_b.append((sigma2 - vb) ** 2)
        if not sq_c:
            raise InsufficientDefined(f"repeat {rep}: no usable subsampled signals")
        ec, eb = float(np.mean(sq_c)), float(np.mean(sq_b))
        eps_c.append(ec)
        eps_b.append(eb)
        reductions.append(100.0 * (ec - eb) / ec)
    lo, hi = np.percentile(reductions, [2.5, 97.5])
    return VarBenchResult(
        true_var=sigma2,
        eps_counting=tuple(eps_c),
        eps_bootstrap=tuple(eps_b),
        reductions=tuple(reductions),
        mean_reduction=float(np.mean(reductions)),
        reduction_interval=(float(lo), float(hi)),
    )


@dataclass(frozen=True)
class MethodComparisonConfig:
    """Four-way method comparison settings (Table-2-style protocol)."""

    signal_type: str = "white_noise"
    n_signals: int = 100
    n: int = 100
    lam: float | None = None
    b: int = 100
    t_tilde: int = 100
    t_init: int = 10
    u: int = 3
    baseline_m: int = 1
    gaussian_draws: int = 10_000
    seed: int = 0
    grid: RadiusGrid = field(default_factory=RadiusGrid)

    def __post_init__(self):
        if self.signal_type not in ("white_noise", "ar1"):
            raise ValueError(f"unknown signal type {self.signal_type!r}")

    @property
    def lam_value(self) -> float:
        if self.lam is not None:
            return self.lam
        return 1.0 / 3.0 if self.signal_type == "white_noise" else 1.0 / 10.0


@dataclass(frozen=True)
class MethodRow:
    method: str
    m_star: int
    r_star: float
    q_star: float | None
    objective: float
    entropy_mean: float | None
    entropy_std: float | None
    seconds: float


def _entropy_stats(s: SignalSet, m: int, r: float) -> tuple[float | None, float | None]:
    p = SampEnParams(m=m, r=r)
    vals = [res.value for res in (sampen(x, p) for x in s) if res.finite]
    if not vals:
        return None, None
    return float(np.mean(vals)), float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0


def method_comparison(cfg: MethodComparisonConfig) -> list[MethodRow]:
    """Run all four selection strategies on a common generated signal set.

    The TPE-optimized method is scored by its native bootstrap objective;
    the baselines are scored by the Gaussian-approximation regularized MSE
    at their selected (m*, r*). Wall-clock per method is reported, not
    asserted.
    """
    s = gen_signal_set(cfg.signal_type, cfg.n_signals, cfg.n, seed=child_seed(cfg.seed, 0))
    lam = cfg.lam_value
    rows: list[MethodRow] = []

    t0 = time.perf_counter()
    opt = optimize_set(
        s,
        OptimizerConfig(
            lam=lam,
            b=cfg.b,
            t_tilde=cfg.t_tilde,
            t_init=cfg.t_init,
            domain=ParamDomain(u=cfg.u),
            seed=child_seed(cfg.seed, 1),
        ),
    )
    mean_e, std_e = _entropy_stats(s, opt.best_psi.m, opt.best_psi.r)
    rows.append(
        MethodRow(
            method="ours",
            m_star=opt.best_psi.m,
            r_star=opt.best_psi.r,
            q_star=opt.best_psi.q,
            objective=opt.best_y,
            entropy_mean=mean_e,
            entropy_std=std_e,
            seconds=time.perf_counter() - t0,
        )
    )

    def gauss_score(m: int, r: float, tag: int) -> float:
        return gaussian_mse_approx(s, m, r, cfg.gaussian_draws, lam, generator(cfg.seed, 2, tag))

    selectors = [
        ("sampeneff", lambda: sampeneff_select(s, cfg.baseline_m, cfg.grid), 0),
        ("convergence", lambda: convergence_select(s, cfg.baseline_m, cfg.grid), 1),
        ("standard", lambda: standard_params_eval(s), 2),
    ]
    for name, select, tag in selectors:
        t0 = time.perf_counter()
        res = select()
        seconds = time.perf_counter() - t0
        mean_e, std_e = _entropy_stats(s, res.m_star, res.r_star)
        rows.append(
            MethodRow(
                method=name,
                m_star=res.m_star,
                r_star=res.r_star,
                q_star=None,
                objective=gauss_score(res.m_star, res.r_star, tag),
                entropy_mean=mean_e,
                entropy_std=std_e,
                seconds=seconds,
            )
        )
    return rows
