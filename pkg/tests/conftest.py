from fractions import Fraction

from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


def matrices(n, m=None):
    m = n if m is None else m
    return st.lists(st.lists(rationals, min_size=m, max_size=m), min_size=n, max_size=n)
