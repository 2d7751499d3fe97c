import numpy as np
import pytest

import geim
from geim import analysis

N_MAX = 20


def make_grid():
    return geim.Grid.uniform(-1.0, 1.0, 200)


def gaussian_family(grid):
    spec = geim.FamilySpec(
        geim.GAUSSIAN_BUMP, tuple(np.linspace(-0.8, 0.8, 40)), grid, width=0.25
    )
    return geim.build_family(spec)


def rational_family(grid):
    spec = geim.FamilySpec(
        geim.RATIONAL_PEAK, tuple(np.linspace(0.5, 6.0, 40)), grid
    )
    return geim.build_family(spec)


def hilbert_dictionary(grid):
    return geim.dirac_dictionary(grid, geim.HILBERT, stride=2)


def sup_dictionary(grid):
    return geim.dirac_dictionary(grid, geim.SUP)


class RunBundle:
    """One finished selection run plus everything the checks reuse."""

    def __init__(self, name, F, sigmas, cfg):
        self.name = name
        self.F = F
        self.sigmas = sigmas
        self.cfg = cfg
        self.result = geim.run_geim(F, sigmas, cfg)
        self._report = None

    @property
    def report(self):
        if self._report is None:
            self._report = analysis.build_report(self.F, self.result)
        return self._report


@pytest.fixture(scope="session")
def grid():
    return make_grid()


@pytest.fixture(scope="session")
def gauss_hilbert(grid):
    F = gaussian_family(grid)
    cfg = geim.GreedyConfig(n_max=N_MAX, mode=geim.HILBERT)
    return RunBundle("gauss-hilbert", F, hilbert_dictionary(grid), cfg)


@pytest.fixture(scope="session")
def gauss_sup(grid):
    F = gaussian_family(grid)
    cfg = geim.GreedyConfig(n_max=N_MAX, mode=geim.SUP)
    return RunBundle("gauss-sup", F, sup_dictionary(grid), cfg)


@pytest.fixture(scope="session")
def rational_hilbert(grid):
    # the rational family has numerical rank about 16; stop well above the
    # roundoff floor so every audited quantity stays meaningful
    F = rational_family(grid)
    cfg = geim.GreedyConfig(n_max=N_MAX, mode=geim.HILBERT, stop_tol=1e-9)
    return RunBundle("rational-hilbert", F, hilbert_dictionary(grid), cfg)


@pytest.fixture(scope="session")
def rational_sup(grid):
    F = rational_family(grid)
    cfg = geim.GreedyConfig(n_max=N_MAX, mode=geim.SUP, stop_tol=1e-9)
    return RunBundle("rational-sup", F, sup_dictionary(grid), cfg)


@pytest.fixture(scope="session")
def weak_gauss_hilbert(grid):
    F = gaussian_family(grid)
    cfg = geim.GreedyConfig(
        n_max=16, mode=geim.HILBERT, eta_target=0.5,
        subset_schedule=geim.FIXED_SIZE, subset_size=8, seed=7,
    )
    return RunBundle("weak-gauss-hilbert", F, hilbert_dictionary(grid), cfg)


@pytest.fixture(scope="session")
def all_runs(gauss_hilbert, gauss_sup, rational_hilbert, rational_sup):
    return [gauss_hilbert, gauss_sup, rational_hilbert, rational_sup]


@pytest.fixture(scope="session")
def hilbert_runs(gauss_hilbert, rational_hilbert, weak_gauss_hilbert):
    return [gauss_hilbert, rational_hilbert, weak_gauss_hilbert]


# --- the three-member hand example ----------------------------------------

HAND_MEMBERS = (
    (1.0, 0.0, 0.0),
    (0.6, 0.8, 0.0),
    (0.0, 0.0, 0.5),
)


@pytest.fixture(scope="session")
def hand_example():
    g = geim.Grid(np.array([0.0, 1.0, 2.0]), np.array([1.0, 1.0, 1.0]))
    F = geim.FunctionSet(
        tuple(geim.DiscreteFunction(g, np.array(v)) for v in HAND_MEMBERS)
    )
    sigmas = geim.dirac_dictionary(g, geim.HILBERT)
    result = geim.run_geim(F, sigmas, geim.GreedyConfig(n_max=3, mode=geim.HILBERT))
    return g, F, sigmas, result
