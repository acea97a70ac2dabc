import pytest

from nexussim.gasnet import GasNetwork, Injector, Pipe
from nexussim.network import Bus, ElectricNetwork, Generator, Line
from nexussim.system import (
    CouplingMap,
    CouplingPoint,
    DanglingNode,
    UnboundGfpp,
    bind_coupling,
    validate_coupling,
)

from conftest import node


def _nets():
    net_e = ElectricNetwork(
        buses=(Bus("B1", True), Bus("B2")),
        lines=(Line("L1", "B1", "B2", 500.0, 0.1),),
        generators=(
            Generator("G1", "B1", "coal", 400.0, cost_energy=25.0),
            Generator("GG", "B2", "CCGT", 300.0, cost_energy=45.0, gfpp=True),
        ),
    )
    net_g = GasNetwork(
        nodes=(node("N43"), node("N44")),
        pipes=(Pipe("P1", "N43", "N44", 20e3, 0.9),),
        injectors=(Injector("T1", "N43", "terminal", 100.0),),
    )
    return net_e, net_g


def test_bind_single_ccgt():
    net_e, net_g = _nets()
    cmap = CouplingMap((CouplingPoint("GG", "N43", 0.55, 52.0e6),))
    sys = bind_coupling(net_e, net_g, cmap)
    assert len(sys.coupling.entries) == 1
    entry = sys.coupling.for_generator("GG")
    assert entry.gas_node == "N43"
    assert entry.efficiency == 0.55


def test_unbound_gfpp():
    net_e, net_g = _nets()
    with pytest.raises(UnboundGfpp):
        bind_coupling(net_e, net_g, CouplingMap(()))


def test_dangling_node():
    net_e, net_g = _nets()
    cmap = CouplingMap((CouplingPoint("GG", "Z", 0.55, 52.0e6),))
    with pytest.raises(DanglingNode):
        bind_coupling(net_e, net_g, cmap)


def test_one_entry_per_gfpp(desk_sys):
    gfpps = [g.id for g in desk_sys.electric.generators if g.gfpp]
    mapped = [e.generator for e in desk_sys.coupling.entries]
    assert sorted(mapped) == sorted(gfpps)
    assert len(set(mapped)) == len(mapped)


def test_validate_coupling_findings():
    net_e, net_g = _nets()
    cmap = CouplingMap((
        CouplingPoint("G1", "N43", 0.55, 52.0e6),   # not a GFPP
        CouplingPoint("GG", "N43", 1.5, 52.0e6),    # efficiency out of range
    ))
    report = validate_coupling(net_e, net_g, cmap)
    messages = [f.message for f in report.findings]
    assert any("not a GFPP" in m for m in messages)
    assert any("efficiency" in m for m in messages)


def test_zone_membership_of_gfpps(sweep_sys):
    zones = sweep_sys.zones()
    for entry in sweep_sys.coupling.entries:
        zone = zones[entry.gas_node]
        members = sweep_sys.gfpps_in_zone(zone)
        assert entry.generator in [m.generator for m in members]
