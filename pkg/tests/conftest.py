import math

import numpy as np
import pytest
from hypothesis import strategies as st

from gausspurity import GaussianParams


def brute_moments(a, b, c, half_width=None, n=1201):
    """Doubled second moments of exp(-(a x^2 + b y^2 - 2cxy)) by a plain 2-D Riemann sum.

    Written straight from the exponent so it shares no code with the library.
    """
    if half_width is None:
        half_width = 8.0 * math.sqrt(max(a, b) / (a * b - c * c) / 2.0)
    axis = np.linspace(-half_width, half_width, n)
    x, y = np.meshgrid(axis, axis, indexing="ij")
    w = np.exp(-(a * x * x + b * y * y - 2 * c * x * y))
    z = w.sum()
    return (2 * (x * x * w).sum() / z, 2 * (y * y * w).sum() / z, 2 * (x * y * w).sum() / z)


@st.composite
def normalizable_params(draw, lo=0.1, hi=10.0, physical=False):
    a = draw(st.floats(lo, hi))
    b = draw(st.floats(lo, hi))
    bound = math.sqrt(a * b)
    if physical:
        # ab - c^2 <= 1
        c_min = math.sqrt(max(a * b - 1.0, 0.0))
        frac = draw(st.floats(0.0, 0.98))
        mag = c_min + frac * (bound - c_min)
    else:
        mag = draw(st.floats(0.0, 0.98)) * bound
    sign = draw(st.sampled_from([-1.0, 1.0]))
    return a, b, sign * mag


def random_physical_triples(rng, count, lo=0.1, hi=10.0, min_gram=0.05):
    """Random (a, b, c) with a, b in [lo, hi] and min_gram <= ab - c^2 <= 1."""
    out = []
    while len(out) < count:
        a, b = rng.uniform(lo, hi, size=2)
        g = rng.uniform(min_gram, 1.0)
        if a * b <= g:
            continue
        c = math.copysign(math.sqrt(a * b - g), rng.uniform(-1, 1))
        out.append((float(a), float(b), float(c)))
    return out


@pytest.fixture
def vacuum():
    return GaussianParams(1.0, 1.0, 0.0)
