import numpy as np
import pytest

from mayleonard import ModelParams


@pytest.fixture
def params_case2():
    """Large saddle value, low frequency: delta=3, xi=65, sqrt(a1)=sqrt(0.5)."""
    return ModelParams(c=0.6, e=0.2, gamma=0.01, omega=0.3)


@pytest.fixture
def params_case1():
    """Saddle value barely above one: delta=1.1, xi=6.62."""
    return ModelParams(c=0.55, e=0.5, gamma=1e-3, omega=0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def random_admissible(rng, n, omega_range=(0.05, 5.0)):
    """Random (c, e, omega) triples with 0 < e < c < 1."""
    out = []
    while len(out) < n:
        c = rng.uniform(0.05, 0.99)
        e = rng.uniform(0.01, 0.95)
        if not e < c:
            continue
        out.append((c, e, rng.uniform(*omega_range)))
    return out
