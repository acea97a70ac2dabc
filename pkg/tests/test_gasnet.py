import math

from nexussim.gasnet import (
    Compressor,
    GasDemand,
    GasNetwork,
    GasNode,
    GasProperties,
    Injector,
    Pipe,
    compute_zones,
    validate_gas_network,
)

from conftest import node


def test_single_pipe_network_is_clean(single_pipe_net):
    assert validate_gas_network(single_pipe_net).ok


def test_empty_pressure_band():
    net = GasNetwork(
        nodes=(GasNode("A", 96e5, 95e5), node("B")),
        pipes=(Pipe("P1", "A", "B", 10e3, 0.9),),
    )
    report = validate_gas_network(net)
    assert any(f.kind == "node" and "empty pressure band" in f.message
               for f in report.findings)


def test_nonpositive_diameter():
    net = GasNetwork(
        nodes=(node("A"), node("B")),
        pipes=(Pipe("P1", "A", "B", 10e3, 0.0),),
    )
    report = validate_gas_network(net)
    assert any("nonpositive diameter" in f.message for f in report.findings)


def test_cross_section_consistency():
    bad = Pipe("P1", "A", "B", 10e3, 0.9, cross_section_m2=0.5)
    net = GasNetwork(nodes=(node("A"), node("B")), pipes=(bad,))
    report = validate_gas_network(net)
    assert any("cross section" in f.message for f in report.findings)
    good = Pipe("P2", "A", "B", 10e3, 0.9)
    assert math.isclose(good.cross_section_m2, math.pi * 0.81 / 4.0, rel_tol=1e-12)


def test_compressor_ratio_below_one(two_zone_net):
    net = GasNetwork(
        nodes=two_zone_net.nodes,
        pipes=two_zone_net.pipes,
        compressors=(Compressor("K1", "B", "C", 0.9),),
    )
    report = validate_gas_network(net)
    assert any("pressure ratio below 1" in f.message for f in report.findings)


def test_disconnected_network_flagged():
    net = GasNetwork(
        nodes=(node("A"), node("B"), node("C")),
        pipes=(Pipe("P1", "A", "B", 10e3, 0.9),),
    )
    report = validate_gas_network(net)
    assert any("not connected" in f.message for f in report.findings)


def test_duplicate_demand_profile_flagged(two_zone_net):
    net = GasNetwork(
        nodes=two_zone_net.nodes,
        pipes=two_zone_net.pipes,
        compressors=two_zone_net.compressors,
        demands=(
            GasDemand("D", (1.0,) * 24, firm=True),
            GasDemand("D", (2.0,) * 24, firm=True),
        ),
    )
    report = validate_gas_network(net)
    assert any("duplicate profile" in f.message for f in report.findings)


def test_injector_schedule_bounds(two_zone_net):
    net = GasNetwork(
        nodes=two_zone_net.nodes,
        pipes=two_zone_net.pipes,
        injectors=(Injector("T1", "A", "terminal", 100.0, scheduled_rate_kg_s=150.0),),
    )
    report = validate_gas_network(net)
    assert any("scheduled rate" in f.message for f in report.findings)


def test_zones_are_compressor_delimited(two_zone_net):
    zones = compute_zones(two_zone_net)
    assert zones["A"] == zones["B"]
    assert zones["C"] == zones["D"]
    assert zones["A"] != zones["C"]


def test_zone_ids_stable_under_bypass(two_zone_net):
    before = compute_zones(two_zone_net)
    after = compute_zones(two_zone_net.with_compressor_bypassed("K1"))
    assert before == after
