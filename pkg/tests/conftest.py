import math

import pytest

from cellplan.antenna_pattern import ArraySpec, ideal_pattern
from cellplan.scenario import default_scenario


@pytest.fixture(scope="session")
def ideal320():
    return ideal_pattern(ArraySpec(320))


@pytest.fixture(scope="session")
def single_site():
    return default_scenario()


@pytest.fixture(scope="session")
def cluster20():
    # coarser raster than the default; the cluster tests only need users and a few pixels
    return default_scenario(**{"layout.n_sites": 20, "grid.width": 200, "grid.height": 200,
                               "grid.resolution": 60.0})


def deg(x):
    return math.radians(x)
