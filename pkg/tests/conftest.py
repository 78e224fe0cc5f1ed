import numpy as np
import pytest
from hypothesis import strategies as st

from geoslide.so3 import UnitQuaternion


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


finite_components = st.floats(
    min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False
)


@st.composite
def unit_quaternions(draw):
    raw = draw(
        st.tuples(*(finite_components for _ in range(4))).filter(
            lambda q: sum(x * x for x in q) > 1e-4
        )
    )
    return UnitQuaternion(raw[0], np.array(raw[1:], dtype=np.float64))


@st.composite
def vectors3(draw, magnitude=10.0):
    comp = st.floats(
        min_value=-magnitude, max_value=magnitude, allow_nan=False, allow_infinity=False
    )
    return np.array(draw(st.tuples(comp, comp, comp)), dtype=np.float64)
