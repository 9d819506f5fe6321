"""Shared fixtures.  The reference cooling runs are expensive, so they are
computed once per session and reused by the unit and acceptance suites."""
import functools

import numpy as np
import pytest

from eitcool.model import fig3_params

FIG3_N_MAX = 35
FIG3_N0 = 2.0
FIG3_T_END = 1.5e5
FIG3_N_TIMES = 251
FIG3_SEED = 12345


def fig3_grid():
    return np.linspace(0.0, FIG3_T_END, FIG3_N_TIMES)


@functools.lru_cache(maxsize=None)
def fig3_master():
    from eitcool.quantum_sim import DensityOperator, evolve_master

    rho0 = DensityOperator.thermal(FIG3_N0, FIG3_N_MAX)
    return evolve_master(fig3_params(), rho0, fig3_grid(), FIG3_N_MAX, store_states=False)


@functools.lru_cache(maxsize=None)
def fig3_mc(n_traj=500, seed=FIG3_SEED):
    from eitcool.quantum_sim import ThermalFock, run_trajectories

    return run_trajectories(fig3_params(), ThermalFock(FIG3_N0), fig3_grid(), n_traj, seed, FIG3_N_MAX)


@functools.lru_cache(maxsize=None)
def fig3_rate():
    from eitcool.rate_model import PopulationDistribution, evolve_populations

    return evolve_populations(fig3_params(), PopulationDistribution.thermal(FIG3_N0, 60), fig3_grid())


@pytest.fixture
def fig3():
    return fig3_params()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    report = getattr(module, "REPORT", None)
    if report:
        terminalreporter.section("acceptance criteria")
        for number in sorted(report):
            terminalreporter.write_line(report[number])
