import math

import numpy as np
import pytest

from sampenopt.bootstrap import (
    BootstrapConfig,
    BootstrapEstimates,
    _block_indices,
    _draw_block_lengths,
    bias,
    bootstrap_sampen,
    mse,
    stationary_bootstrap,
    variance,
)
from sampenopt.entropy import SampEnParams, SampEnResult
from sampenopt.errors import Infeasible
from sampenopt.rng import generator
from sampenopt.signal import Signal, gen_white_noise


def _result(value) -> SampEnResult:
    if value is None:
        return SampEnResult(bm=0.0, am=0.0, cp=None, value=None)
    if math.isinf(value):
        return SampEnResult(bm=0.5, am=0.0, cp=0.0, value=math.inf)
    return SampEnResult(bm=0.5, am=0.25, cp=0.5, value=float(value))


def _estimates(original, replicates) -> BootstrapEstimates:
    return BootstrapEstimates(original=_result(original), replicates=tuple(_result(v) for v in replicates))


class TestBlockAssembly:
    def test_wrap_rule(self):
        # start at the last element with a 3-long block wraps to the front
        x = np.array([10.0, 20.0, 30.0, 40.0, 50.0])
        idx = _block_indices(np.array([4, 0]), np.array([3, 2]), 5)
        assert np.array_equal(x[idx][:3], [50.0, 10.0, 20.0])

    def test_truncates_to_exact_length(self):
        idx = _block_indices(np.array([0, 2]), np.array([3, 7]), 5)
        assert idx.size == 5

    def test_single_overlong_block(self):
        idx = _block_indices(np.array([3]), np.array([12]), 6)
        assert idx.size == 6
        assert np.array_equal(idx, (3 + np.arange(6)) % 6)


class TestStationaryBootstrap:
    def test_length_preserved(self):
        for n in (1, 2, 5, 50, 100):
            x = gen_white_noise(n, 1.0, seed=n)
            for seed in range(20):
                out = stationary_bootstrap(x, 0.5, generator(seed))
                assert out.n == n

    def test_multiset_containment(self):
        x = gen_white_noise(40, 1.0, seed=3)
        members = set(x.values.tolist())
        for seed in range(50):
            out = stationary_bootstrap(x, 0.3, generator(seed))
            assert set(out.values.tolist()) <= members

    def test_deterministic(self):
        x = gen_white_noise(64, 1.0, seed=5)
        a = stationary_bootstrap(x, 0.7, generator(11))
        b = stationary_bootstrap(x, 0.7, generator(11))
        assert np.array_equal(a.values, b.values)

    def test_block_length_distribution(self):
        lens = _draw_block_lengths(0.5, 100_000, generator(1))
        assert lens.min() >= 1
        assert 1.9 <= lens.mean() <= 2.1

    def test_invalid_q(self):
        x = gen_white_noise(10, 1.0, seed=1)
        with pytest.raises(ValueError):
            stationary_bootstrap(x, 1.0, generator(0))


class TestBootstrapSampen:
    def test_constant_signal_feasible_zero(self):
        x = Signal("c", np.full(30, 2.0))
        est = bootstrap_sampen(x, SampEnParams(1, 0.2), BootstrapConfig(q=0.5, b=20, seed=1))
        assert est.feasible
        assert all(r.value == 0.0 for r in est.replicates)
        assert variance(est) == 0.0 and mse(est) == 0.0

    def test_tiny_radius_infeasible(self):
        # radius below every pairwise template gap: nothing matches anywhere
        x = Signal("g", np.array([0.0, 10.0, 20.0, 30.0, 40.0, 50.0]))
        est = bootstrap_sampen(x, SampEnParams(1, 1e-6), BootstrapConfig(q=0.5, b=10, seed=2))
        assert not est.feasible

    def test_single_replicate(self):
        x = gen_white_noise(50, 1.0, seed=9)
        est = bootstrap_sampen(x, SampEnParams(1, 0.3), BootstrapConfig(q=0.5, b=1, seed=3))
        assert len(est.replicates) == 1

    def test_replicate_streams_are_child_indexed(self):
        # replicate b depends only on (seed, b): growing B keeps the prefix
        x = gen_white_noise(50, 1.0, seed=10)
        p = SampEnParams(1, 0.3)
        small = bootstrap_sampen(x, p, BootstrapConfig(q=0.5, b=5, seed=4))
        large = bootstrap_sampen(x, p, BootstrapConfig(q=0.5, b=10, seed=4))
        assert [r.value for r in small.replicates] == [r.value for r in large.replicates[:5]]


class TestMoments:
    def test_variance_divisor(self):
        est = _estimates(2.0, [1.0, 2.0, 3.0])
        assert abs(variance(est) - 2.0 / 3.0) <= 1e-15

    def test_mse_hand_value(self):
        est = _estimates(1.0, [1.0, 3.0])
        assert abs(mse(est) - 2.0) <= 1e-15

    def test_zero_spread(self):
        est = _estimates(1.5, [1.5, 1.5, 1.5])
        assert variance(est) == 0.0 and mse(est) == 0.0 and bias(est) == 0.0

    def test_variance_matches_two_pass_reference(self):
        rng = np.random.default_rng(0)
        vals = rng.standard_normal(64).tolist()
        est = _estimates(0.3, vals)
        mean = sum(vals) / len(vals)
        ref = sum((v - mean) ** 2 for v in vals) / len(vals)
        assert abs(variance(est) - ref) <= 1e-14

    def test_decomposition_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            theta = float(rng.standard_normal())
            vals = rng.standard_normal(int(rng.integers(2, 40))).tolist()
            est = _estimates(theta, vals)
            assert abs(mse(est) - (bias(est) ** 2 + variance(est))) <= 1e-12

    def test_identity_with_censored_replicates(self):
        # one non-finite replicate out of 20 stays under the 10% cut; the
        # identity must hold on the retained subset
        rng = np.random.default_rng(2)
        vals = rng.standard_normal(19).tolist() + [math.inf]
        est = _estimates(0.5, vals)
        assert est.feasible
        assert abs(mse(est) - (bias(est) ** 2 + variance(est))) <= 1e-12

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        vals = rng.standard_normal(30).tolist()
        est1 = _estimates(0.2, vals)
        est2 = _estimates(0.2, list(reversed(vals)))
        assert variance(est1) == variance(est2)
        assert mse(est1) == mse(est2)

    def test_infeasible_raises(self):
        est = _estimates(1.0, [None] * 10)
        assert not est.feasible
        with pytest.raises(Infeasible):
            variance(est)
        with pytest.raises(Infeasible):
            mse(est)

    def test_feasibility_boundary(self):
        # exactly 90% finite is feasible; below it is not
        ok = _estimates(1.0, [1.0] * 9 + [None])
        assert ok.feasible
        bad = _estimates(1.0, [1.0] * 8 + [None, math.inf])
        assert not bad.feasible
