import math

import pytest

from subtiling.catalog import load, names
from subtiling.spectral import spectral_data
from subtiling.view import TilingView

ALL_NAMES = sorted(names())


@pytest.fixture(scope="session", params=ALL_NAMES)
def any_system(request):
    return load(request.param)


@pytest.fixture(scope="session")
def fibonacci():
    return load("fibonacci")


@pytest.fixture(scope="session")
def nonpisot13():
    return load("nonpisot13")


@pytest.fixture(scope="session")
def table2d():
    return load("table2d")


@pytest.fixture(scope="session")
def chair():
    return load("chair")


@pytest.fixture(scope="session")
def bicolor():
    return load("bicolor3x3")


@pytest.fixture(scope="session")
def spec_of():
    return spectral_data


def view_for(system, radius):
    return TilingView.for_extent(system, radius * math.sqrt(system.d))


@pytest.fixture(scope="session")
def small_view():
    """A view big enough for windows of diameter ~60 in any system."""

    def make(system):
        return view_for(system, 60.0)

    return make
