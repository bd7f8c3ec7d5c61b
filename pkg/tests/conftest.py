import pytest

import helpers


@pytest.fixture
def example1():
    return helpers.example_inconsistent()


@pytest.fixture
def figure3():
    return helpers.keyed_sixteen()
