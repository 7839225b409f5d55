import numpy as np
import pytest

from stokesmg.grid import GridSpec, StaggeredField


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


def random_field(grid: GridSpec, rng, complex_valued=False) -> StaggeredField:
    x = StaggeredField.random(grid, rng)
    if complex_valued:
        y = StaggeredField.random(grid, rng)
        return StaggeredField(x.u + 1j * y.u, x.v + 1j * y.v, x.p + 1j * y.p)
    return x


def match_roots(a: np.ndarray, b: np.ndarray) -> float:
    """Max distance between two eigenvalue triples under optimal pairing.

    Sorting complex conjugate pairs by (real, imag) can flip on 1e-16 noise
    in the real parts, so comparisons pair the roots explicitly.
    """
    from itertools import permutations

    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    worst = 0.0
    for ra, rb in zip(a, b):
        best = min(max(abs(ra[i] - rb[p[i]]) for i in range(3)) for p in permutations(range(3)))
        worst = max(worst, best)
    return worst
