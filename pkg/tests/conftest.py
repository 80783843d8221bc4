import os

from hypothesis import HealthCheck, settings, strategies as st

from mosg import polytope as P
from mosg.rational import to_q

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DEN = 6


def coord():
    return st.integers(0, DEN).map(lambda k: to_q(f"{k}/{DEN}"))


def points(dim):
    return st.tuples(*[coord() for _ in range(dim)])


def polytopes(dim=2, max_points=4):
    return st.lists(points(dim), min_size=1, max_size=max_points).map(lambda ps: P.from_points(ps, dim))


def grid(dim, den=12):
    return list(P.grid_points(dim, den))
