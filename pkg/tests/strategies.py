"""Hypothesis strategies for small Hermitian and positive matrices."""

import numpy as np
from hypothesis import strategies as st

from posmaps.herm import herm

_entry = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False, width=64)


@st.composite
def hermitian(draw, min_dim=1, max_dim=5, real=None):
    n = draw(st.integers(min_dim, max_dim))
    is_real = draw(st.booleans()) if real is None else real
    re = np.array(draw(st.lists(_entry, min_size=n * n, max_size=n * n))).reshape(n, n)
    if is_real:
        return herm(re)
    im = np.array(draw(st.lists(_entry, min_size=n * n, max_size=n * n))).reshape(n, n)
    return herm(re + 1j * im)


@st.composite
def psd(draw, min_dim=1, max_dim=5, real=None):
    h = draw(hermitian(min_dim, max_dim, real))
    return herm(h @ h.conj().T)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
