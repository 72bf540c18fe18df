import pytest

from henonlab.dynamics import MapParams
from henonlab.periodic2d import periodic_points_2d


@pytest.fixture(scope="session")
def horseshoe():
    return MapParams(10.0, 0.3)


@pytest.fixture(scope="session")
def horseshoe_levels(horseshoe):
    # enumeration is deterministic, so share one census across the session
    return {n: periodic_points_2d(horseshoe, n) for n in range(1, 9)}
