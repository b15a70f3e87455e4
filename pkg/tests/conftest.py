import numpy as np
import pytest

from qtricycle import TricycleConfig


@pytest.fixture
def default_config():
    return TricycleConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_config(rng):
    """Valid configuration draw kept inside well-conditioned ranges
    (beta * omega stays below ~25 on every branch)."""
    T_c = rng.uniform(0.15, 0.5)
    T_h = rng.uniform(0.9, 2.0)
    T_p = T_c + rng.uniform(0.2, 0.8) * (T_h - T_c)
    return TricycleConfig(
        T_c=T_c, T_h=T_h, T_p=T_p,
        zeta_c=rng.uniform(1.2, 3.0),
        zeta_h=rng.uniform(1.2, 3.0),
        delta_c=rng.uniform(0.15, 0.8),
        gamma0=rng.uniform(0.5, 2.0),
        alpha=rng.uniform(-0.5, 1.5),
    )


def random_branch(rng):
    config = random_config(rng)
    reservoir = ("c", "h", "p")[rng.integers(0, 3)]
    return config.branch(reservoir, float(rng.uniform(1.0, 50.0)))
