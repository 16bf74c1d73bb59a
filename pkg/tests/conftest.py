import pytest

from gimbalsim import sim


@pytest.fixture(scope="session")
def rec_fig3():
    return sim.integrate(sim.preset("fig3-stab"))


@pytest.fixture(scope="session")
def rec_fig4():
    return sim.integrate(sim.preset("fig4-step"))


@pytest.fixture(scope="session")
def rec_fig5():
    return sim.integrate(sim.preset("fig5-sin"))


@pytest.fixture(scope="session")
def rec_fig4_pid():
    return sim.integrate(sim.preset("fig4-step-pid"))
