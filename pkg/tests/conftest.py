"""Shared fixtures: small deterministic paths and seeded process samples."""

import numpy as np
import pytest

from randloc.functionals import LocationFunctional, PreparedFunctional, Scope
from randloc.paths import DiscretePath, PathMode
from randloc.processes import ProcessSpec, RngSeed, sample_paths


class WindowRule(LocationFunctional):
    """Path-independent window rule, for checker controls.

    ``start`` returns the window's left endpoint (a valid local
    functional: the whole line under the inverse time order); ``mid``
    returns the window midpoint, which admits no ordered-set
    representation and violates the window-replacement condition.
    """

    scope = Scope.LOCAL_ONLY
    claims_doubly = True

    def __init__(self, T, rule):
        self.related_length = T
        self.rule = rule
        self.name = f"window_{rule}"

    @property
    def params(self):
        return {"T": self.related_length, "rule": self.rule}

    def prepare(self, path):
        rule, T = self.rule, self.related_length

        class _P(PreparedFunctional):
            def locate(_self, i, j):
                a = path.node_time(i)
                return a if rule == "start" else a + T / 2.0

        return _P(path)


@pytest.fixture(scope="session")
def ou_spec():
    return ProcessSpec("ou", {"theta": 1.0, "sigma": np.sqrt(2.0)})


@pytest.fixture(scope="session")
def bm_spec():
    return ProcessSpec("brownian", {"sigma": 1.0})


@pytest.fixture(scope="session")
def cp_spec():
    return ProcessSpec("compound_poisson",
                       {"rate": 2.0, "jump_mean": 0.0, "jump_sd": 1.0})


@pytest.fixture(scope="session")
def ou_paths(ou_spec):
    """Ten OU paths on [0, 4] with step 0.01."""
    return sample_paths(ou_spec, 0.0, 0.01, 401, 10, RngSeed(101))


@pytest.fixture(scope="session")
def bm_paths(bm_spec):
    return sample_paths(bm_spec, 0.0, 0.01, 401, 10, RngSeed(202))


@pytest.fixture(scope="session")
def cp_paths(cp_spec):
    return sample_paths(cp_spec, 0.0, 0.01, 401, 10, RngSeed(303))


@pytest.fixture
def tent_path():
    """f(t) = -|t| sampled on [-3, 3] with step 0.05, piecewise linear."""
    t = np.arange(-3.0, 3.0 + 1e-12, 0.05)
    return DiscretePath(-3.0, 0.05, -np.abs(t), PathMode.CONTINUOUS_LINEAR)


@pytest.fixture
def constant_path():
    return DiscretePath(0.0, 0.25, np.full(17, 2.5), PathMode.CONTINUOUS_LINEAR)
