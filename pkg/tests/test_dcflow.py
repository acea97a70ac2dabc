import numpy as np
import pytest

from nexussim.dcflow import SingularTopology, compute_dc_flows
from nexussim.network import Bus, ElectricNetwork, Line


def test_two_bus_transfer():
    net = ElectricNetwork(
        buses=(Bus("B1", True), Bus("B2")),
        lines=(Line("L1", "B1", "B2", 100.0, 0.1),),
        generators=(),
    )
    flows, _ = compute_dc_flows(net, {"B1": 50.0, "B2": -50.0})
    assert flows["L1"] == pytest.approx(50.0)


def test_symmetric_ring_split(ring3):
    # 90 MW from B1 to B2: direct line carries 60, the two-hop path 30.
    flows, _ = compute_dc_flows(ring3, {"B1": 90.0, "B2": -90.0})
    assert flows["L12"] == pytest.approx(60.0)
    assert flows["L23"] == pytest.approx(-30.0)
    assert flows["L31"] == pytest.approx(-30.0)


def test_zero_injections_zero_flows(ring3):
    flows, theta = compute_dc_flows(ring3, {})
    assert all(abs(f) < 1e-12 for f in flows.values())
    assert all(abs(t) < 1e-12 for t in theta.values())


def test_kcl_holds_everywhere(ring3):
    inj = {"B1": 37.5, "B2": -12.5, "B3": -25.0}
    flows, _ = compute_dc_flows(ring3, inj)
    for bus in ring3.bus_ids():
        net_out = sum(flows[l.id] for l in ring3.lines if l.from_bus == bus)
        net_out -= sum(flows[l.id] for l in ring3.lines if l.to_bus == bus)
        assert net_out == pytest.approx(inj.get(bus, 0.0), abs=1e-6)


def test_missing_reference_raises():
    net = ElectricNetwork(
        buses=(Bus("B1"), Bus("B2")),
        lines=(Line("L1", "B1", "B2", 100.0, 0.1),),
        generators=(),
    )
    with pytest.raises(SingularTopology):
        compute_dc_flows(net, {"B1": 10.0, "B2": -10.0})


def test_unbalanced_injections_rejected(ring3):
    with pytest.raises(ValueError):
        compute_dc_flows(ring3, {"B1": 10.0})


def test_islands_solved_independently():
    net = ElectricNetwork(
        buses=(Bus("B1", True), Bus("B2"), Bus("B3", True), Bus("B4")),
        lines=(
            Line("L1", "B1", "B2", 100.0, 0.1),
            Line("L2", "B3", "B4", 100.0, 0.2),
        ),
        generators=(),
    )
    flows, _ = compute_dc_flows(net, {"B1": 5.0, "B2": -5.0, "B3": -7.0, "B4": 7.0})
    assert flows["L1"] == pytest.approx(5.0)
    assert flows["L2"] == pytest.approx(-7.0)
