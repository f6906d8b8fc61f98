"""Hypothesis strategies for small complex matrices and maps."""

import numpy as np
from hypothesis import strategies as st

from cbnorm import channels as ch

dims = st.integers(min_value=1, max_value=3)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def complex_matrices(draw, rows=None, cols=None):
    r = draw(dims) if rows is None else rows
    c = draw(dims) if cols is None else cols
    g = np.random.default_rng(draw(seeds))
    return g.standard_normal((r, c)) + 1j * g.standard_normal((r, c))


@st.composite
def linear_maps(draw, hp=False):
    n, m = draw(dims), draw(dims)
    gen = ch.random_hp_map if hp else ch.random_map
    return gen(n, m, draw(seeds))


@st.composite
def quantum_channels(draw):
    n, m = draw(dims), draw(dims)
    return ch.random_channel(n, m, draw(seeds))
