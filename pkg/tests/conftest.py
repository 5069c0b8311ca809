import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from diskflow.poly2 import Poly2


def rationals(min_num=-10, max_num=10, max_den=6, nonzero=False):
    """Hypothesis strategy for small exact rationals."""
    base = st.builds(Fraction,
                     st.integers(min_num, max_num),
                     st.integers(1, max_den))
    if nonzero:
        return base.filter(lambda f: f != 0)
    return base


def polys(max_degree=6, varnames=("S", "I")):
    """Random sparse Poly2 up to the given total degree."""
    exps = st.tuples(st.integers(0, max_degree), st.integers(0, max_degree)) \
        .filter(lambda e: e[0] + e[1] <= max_degree)
    return st.dictionaries(exps, rationals(), max_size=6) \
        .map(lambda d: Poly2(d, varnames))


def random_positive_rational(rng: random.Random, max_num=12, max_den=6) -> Fraction:
    return Fraction(rng.randint(1, max_num), rng.randint(1, max_den))


@pytest.fixture
def rng():
    return random.Random(20240817)
