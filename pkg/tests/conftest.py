import numpy as np
import pytest

from weakkam.critical import compute_barrier, critical_value
from weakkam.mather import extreme_mather_measures
from weakkam.model import Family, FourierSeries, HamiltonianModel
from weakkam.scheme import DiscreteScheme, build_graph


def pendulum_model(family="linear"):
    if family == "linear":
        return HamiltonianModel.pendulum()
    if family == "cubic":
        return HamiltonianModel(Family.NONLINEAR, FourierSeries.cosine_well(), g_coeffs=(1.0, 0.0, 1.0))
    if family == "state_weighted":
        return HamiltonianModel(Family.STATE_WEIGHTED, FourierSeries.cosine_well(),
                                weight=FourierSeries(cos=(2.0,), sin=(0.0, 1.0)))
    raise ValueError(family)


def two_well_model():
    return HamiltonianModel(Family.STATE_WEIGHTED, FourierSeries.two_well(),
                            weight=FourierSeries(cos=(2.0, 1.0)))


def flat_model():
    return HamiltonianModel(Family.LINEAR, FourierSeries.constant(0.0))


def closed_form_barrier(x):
    x = np.asarray(x, dtype=float)
    return (2.0 / np.pi) * (1.0 - np.cos(np.pi * np.minimum(x, 1.0 - x)))


class Setup:
    """Graph, c, barrier and Mather measures for one model and grid."""

    def __init__(self, model, N, W=8, tau=None):
        self.model = model
        self.scheme = DiscreteScheme(N, tau, W)
        self.graph = build_graph(model, self.scheme)
        self.c = critical_value(self.graph)
        self.barrier = compute_barrier(self.graph, self.c)
        self._measures = None

    @property
    def measures(self):
        if self._measures is None:
            self._measures = extreme_mather_measures(self.graph, self.c, self.barrier)
        return self._measures


@pytest.fixture(scope="session")
def pendulum200():
    return Setup(pendulum_model(), 200)


@pytest.fixture(scope="session")
def pendulum100():
    return Setup(pendulum_model(), 100)


@pytest.fixture(scope="session")
def two_well200():
    return Setup(two_well_model(), 200)


@pytest.fixture(scope="session")
def two_well100():
    return Setup(two_well_model(), 100)


@pytest.fixture(scope="session")
def pendulum16():
    return Setup(pendulum_model(), 16, W=2)
