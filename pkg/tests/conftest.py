"""Shared fixtures: small signals with known properties."""

import numpy as np
import pytest

from sampenopt.signal import Ar1Config, Signal, SignalSet, gen_ar1, gen_white_noise, normalize


@pytest.fixture
def alternating():
    """[0, 1, 0, 1, 0]: every m=1 template gap is 0 or 1."""
    return Signal("alt", [0.0, 1.0, 0.0, 1.0, 0.0])


@pytest.fixture
def constant():
    return Signal("const", np.full(30, 5.0))


@pytest.fixture
def white100():
    return normalize(gen_white_noise(100, 1.0, seed=1234))


@pytest.fixture
def ar100():
    return normalize(gen_ar1(Ar1Config(phi=0.9, sigma=0.1, n=100, seed=4321)))


def make_noise_set(n_signals: int, n: int, seed: int, label=None) -> SignalSet:
    from sampenopt.signal import gen_signal_set

    return gen_signal_set("white_noise", n_signals, n, seed=seed, label=label)


def make_ar_set(n_signals: int, n: int, seed: int, label=None) -> SignalSet:
    from sampenopt.signal import gen_signal_set

    return gen_signal_set("ar1", n_signals, n, seed=seed, label=label)
