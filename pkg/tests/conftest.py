import pytest

from lclre.catalog import (sinkless_orientation, three_coloring_intermediate,
                           toy_default_diagram, toy_problem,
                           toy_tweaked_diagram)


@pytest.fixture(scope="session")
def so():
    return sinkless_orientation()


@pytest.fixture(scope="session")
def toy():
    return toy_problem()


@pytest.fixture(scope="session")
def toy_default():
    return toy_default_diagram()


@pytest.fixture(scope="session")
def toy_tweaked():
    return toy_tweaked_diagram()


@pytest.fixture(scope="session")
def intermediate_3col():
    return three_coloring_intermediate()
