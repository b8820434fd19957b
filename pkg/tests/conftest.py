from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from kreinlab.triplet import random_triplet, validate_triplet

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.tuples(st.integers(2, 8), st.integers(1, 4)).map(lambda t: (t[0], min(t[1], t[0])))


def make_triplet(seed: int, N: int = 5, m: int = 2):
    return random_triplet(np.random.default_rng(seed), N, m)


def upper_sample(rng: np.random.Generator, T, im_lo: float = 0.1, im_hi: float = 3.0) -> complex:
    return complex(rng.uniform(-6, 6), T.gap * rng.uniform(im_lo, im_hi))


def cgauss(rng: np.random.Generator, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scalar_T():
    return validate_triplet([[2.0]], [[1.0]], [[0.0]])


@pytest.fixture
def diag_T():
    return validate_triplet(np.diag([2.0, 3.0]), [[1.0], [0.0]], [[0.0]])
