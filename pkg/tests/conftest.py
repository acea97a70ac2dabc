import numpy as np
import pytest

from nexussim.gasnet import (
    Compressor,
    GasNetwork,
    GasNode,
    GasProperties,
    Injector,
    Pipe,
)
from nexussim.network import Bus, ElectricNetwork, Generator, Line, RenewableCluster


def node(nid, p_min_bar=38.0, p_max_bar=95.0):
    return GasNode(nid, p_min_bar * 1e5, p_max_bar * 1e5)


@pytest.fixture
def ring3():
    """Symmetric 3-bus ring with one slack and two generators."""
    return ElectricNetwork(
        buses=(Bus("B1", reference=True), Bus("B2"), Bus("B3")),
        lines=(
            Line("L12", "B1", "B2", 200.0, 0.1),
            Line("L23", "B2", "B3", 200.0, 0.1),
            Line("L31", "B3", "B1", 200.0, 0.1),
        ),
        generators=(
            Generator("G1", "B1", "coal", 300.0, cost_energy=20.0),
            Generator("G2", "B2", "oil", 150.0, cost_energy=60.0),
        ),
    )


@pytest.fixture
def single_pipe_net():
    """lam=0.01, c=350 m/s, L=50 km, d=0.9 m: the analytic benchmark pipe."""
    return GasNetwork(
        nodes=(node("A", 30.0), node("B", 30.0)),
        pipes=(Pipe("P1", "A", "B", 50e3, 0.9, 0.01),),
        injectors=(Injector("T1", "A", "terminal", 250.0),),
        properties=GasProperties(sound_speed=350.0),
    )


@pytest.fixture
def two_zone_net():
    """A -P1- B =K1= C -P2- D: one compressor splitting two zones."""
    return GasNetwork(
        nodes=(node("A"), node("B"), node("C"), node("D")),
        pipes=(Pipe("P1", "A", "B", 40e3, 0.9), Pipe("P2", "C", "D", 40e3, 0.9)),
        compressors=(Compressor("K1", "B", "C", 1.2),),
        injectors=(
            Injector("T1", "A", "terminal", 400.0),
            Injector("S1", "C", "storage", 100.0),
        ),
        properties=GasProperties(),
    )


@pytest.fixture(scope="session")
def sweep_sys():
    from nexussim.synthetic import sweep_system

    return sweep_system()


@pytest.fixture(scope="session")
def desk_sys():
    from nexussim.synthetic import desk_system

    return desk_system()
