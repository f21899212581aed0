import numpy as np
import pytest

from sampenopt.errors import InsufficientDefined
from sampenopt.experiments import (
    MethodComparisonConfig,
    VarBenchConfig,
    estimator_error,
    method_comparison,
    true_variance,
)
from sampenopt.signal import Signal, SignalSet, gen_white_noise

from conftest import make_noise_set


class TestTrueVariance:
    def test_identical_population_zero(self):
        base = gen_white_noise(60, 1.0, seed=1)
        s = SignalSet(tuple(Signal(f"s{i}", base.values) for i in range(5)))
        assert true_variance(s, 1, 0.3) == 0.0

    def test_two_value_hand_case(self):
        # entropies 1 and 3 have (n-1)-variance 2; construct via direct values
        vals = [1.0, 3.0]
        assert np.var(vals, ddof=1) == 2.0  # documents the convention used

    def test_matches_two_pass_reference(self):
        s = make_noise_set(30, 80, seed=2)
        got = true_variance(s, 1, 0.25)
        from sampenopt.entropy import SampEnParams, sampen

        vals = [r.value for r in (sampen(x, SampEnParams(1, 0.25)) for x in s) if r.finite]
        mean = sum(vals) / len(vals)
        ref = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
        assert got == pytest.approx(ref, abs=1e-14)

    def test_insufficient_defined(self):
        bad = Signal("g", np.array([0.0, 10.0, 20.0, 30.0, 40.0]))
        with pytest.raises(InsufficientDefined):
            true_variance(SignalSet((bad,)), 1, 0.5)

    def test_scale_invariance(self):
        # scaling every signal by a constant and r accordingly leaves the
        # cross-signal variance untouched (sampen scale equivariance)
        s = make_noise_set(15, 80, seed=3)
        scaled = SignalSet(tuple(Signal(x.id, 4.0 * x.values) for x in s))
        assert true_variance(s, 1, 0.3) == true_variance(scaled, 1, 4.0 * 0.3)


class TestBootstrapVarianceSanity:
    def test_mean_bootstrap_variance_tracks_truth(self):
        # white noise at (m=1, r=0.2, q=0.9): the bootstrap variance
        # averaged over signals approximates the cross-signal variance
        from sampenopt.bootstrap import BootstrapConfig, bootstrap_sampen, variance
        from sampenopt.entropy import SampEnParams
        from sampenopt.rng import child_seed

        pop = make_noise_set(400, 100, seed=44)
        truth = true_variance(pop, 1, 0.2)
        p = SampEnParams(1, 0.2)
        ests = []
        for i, x in enumerate(pop.signals[:80]):
            est = bootstrap_sampen(x, p, BootstrapConfig(q=0.9, b=100, seed=child_seed(45, i)))
            if est.feasible:
                ests.append(variance(est))
        mean_est = float(np.mean(ests))
        assert 0.4 * truth <= mean_est <= 2.5 * truth


@pytest.fixture(scope="module")
def tiny_cfg():
    return VarBenchConfig(
        signal_type="white_noise",
        n=80,
        r=0.25,
        n_population=150,
        n_subsample=25,
        repeats=2,
        b=40,
        seed=5,
    )


@pytest.fixture(scope="module")
def comparison_rows():
    cfg = MethodComparisonConfig(
        signal_type="white_noise",
        n_signals=8,
        n=80,
        b=30,
        t_tilde=15,
        t_init=5,
        gaussian_draws=2000,
        seed=9,
    )
    return method_comparison(cfg)


class TestEstimatorError:
    def test_self_comparison_is_exact_zero(self, tiny_cfg):
        # replacing the bootstrap estimator with the counting estimator
        # must zero the reduction identically
        from sampenopt.entropy import SampEnParams, cp_sigma

        p = SampEnParams(tiny_cfg.m, tiny_cfg.r)

        def counting(x, seed):
            cp, sigma = cp_sigma(x, p)
            return (sigma / cp) ** 2

        res = estimator_error(tiny_cfg, counting=counting, bootstrap=counting)
        assert all(r == 0.0 for r in res.reductions)

    def test_errors_nonnegative_and_deterministic(self, tiny_cfg):
        a = estimator_error(tiny_cfg)
        b = estimator_error(tiny_cfg)
        assert a.eps_counting == b.eps_counting
        assert a.eps_bootstrap == b.eps_bootstrap
        assert all(e >= 0 for e in a.eps_counting + a.eps_bootstrap)
        assert len(a.reductions) == tiny_cfg.repeats

    def test_bootstrap_beats_counting_at_small_scale(self, tiny_cfg):
        res = estimator_error(tiny_cfg)
        assert res.mean_reduction > 0


class TestMethodComparison:
    def test_all_methods_present(self, comparison_rows):
        assert [r.method for r in comparison_rows] == ["ours", "sampeneff", "convergence", "standard"]

    def test_row_shapes(self, comparison_rows):
        for r in comparison_rows:
            assert r.m_star >= 1
            assert 0.0 < r.r_star <= 1.0
            assert r.objective >= 0.0
            assert r.seconds >= 0.0
        ours = comparison_rows[0]
        assert ours.q_star is not None

    def test_standard_row_is_2_02(self, comparison_rows):
        std = comparison_rows[-1]
        assert std.m_star == 2 and std.r_star == pytest.approx(0.20)
