import dataclasses
import random

import pytest
from hypothesis import HealthCheck, settings

from mechlab import (
    BidProfile,
    DEFAULT_QUADRATURE,
    DEFAULT_TOLERANCES,
    Mechanism,
    SearchGrid,
    builtin_suite,
    make_mechanism,
)

settings.register_profile(
    "mechlab",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("mechlab")


def opaque(mech: Mechanism) -> Mechanism:
    """The same mechanism with its closed-form integral hidden.

    Payments then have to go through the bracketing quadrature, which is
    how tests exercise the generic engine instead of the shortcuts.
    """
    return dataclasses.replace(mech, exact_integral=None)


def sample_profiles(count: int, seed: int = 7, n_min: int = 2, n_max: int = 5,
                    grid: SearchGrid = None) -> list:
    grid = grid or SearchGrid()
    rng = random.Random(seed)
    points = grid.base_points()
    out = []
    for _ in range(count):
        n = rng.randint(n_min, n_max)
        out.append(BidProfile.from_bids([rng.choice(points) for _ in range(n)]))
    return out


@pytest.fixture
def tolerances():
    return DEFAULT_TOLERANCES


@pytest.fixture
def quadrature():
    return DEFAULT_QUADRATURE


@pytest.fixture
def grid():
    return SearchGrid()


@pytest.fixture
def spa():
    return make_mechanism("spa")


@pytest.fixture
def lottery():
    return make_mechanism("lottery")


@pytest.fixture
def proportional():
    return make_mechanism("proportional")


@pytest.fixture
def proportional_myerson():
    return make_mechanism("proportional", payment_mode="myerson")


@pytest.fixture
def reserve():
    return make_mechanism("reserve_spa")


@pytest.fixture
def asymmetric():
    return make_mechanism("asymmetric_spa")


@pytest.fixture
def suite():
    return builtin_suite()
