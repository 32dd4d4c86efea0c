import numpy as np
import pytest

from fracbvp.grid import make_grid, sample


@pytest.fixture
def grid_257():
    return make_grid(257)


def sampled(f, n):
    return sample(f, make_grid(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20170124)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)
