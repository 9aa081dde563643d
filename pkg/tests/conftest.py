import itertools

import numpy as np
import pytest

from cslattice import build_domain


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def b2():
    return build_domain(2, 2)


@pytest.fixture(scope="session")
def b3():
    return build_domain(2, 3)


def box_ball_oracle(n, radius):
    """Independent domain construction by exhaustive box enumeration.

    Scans the cube [-(radius+2), radius+2]^n, classifies interior by the
    distance sum, and boundary as non-interior points with an interior
    neighbour.  Used to validate the recursive ball builder.
    """
    span = range(-(radius + 2), radius + 3)
    interior, boundary = set(), set()
    for p in itertools.product(span, repeat=n):
        if sum(abs(c) for c in p) <= radius:
            interior.add(p)
    for p in itertools.product(span, repeat=n):
        if p in interior:
            continue
        for axis in range(n):
            for step in (-1, 1):
                q = p[:axis] + (p[axis] + step,) + p[axis + 1 :]
                if q in interior:
                    boundary.add(p)
    return interior, boundary


def bisection_root(fn, lo, hi, iters=200):
    """Sign-change bisection; fn(lo) and fn(hi) must have opposite signs."""
    flo = fn(lo)
    assert flo * fn(hi) < 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) * flo > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
