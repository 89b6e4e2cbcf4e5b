import numpy as np
import pytest
from hypothesis import strategies as st

from truthcal import WeightedSample

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
grid = st.integers(0, 8).map(lambda i: i / 8)


@st.composite
def samples(draw, max_size=30, binary=None):
    """Random uniform-weight samples; predictions sometimes on a coarse grid to force ties."""
    T = draw(st.integers(1, max_size))
    values = draw(st.sampled_from([unit, grid]))
    r = draw(st.lists(values, min_size=T, max_size=T))
    is_binary = draw(st.booleans()) if binary is None else binary
    y = draw(st.lists(st.sampled_from([0.0, 1.0]) if is_binary else unit, min_size=T, max_size=T))
    return WeightedSample(r, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
