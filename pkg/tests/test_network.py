import numpy as np

from nexussim.network import (
    Bus,
    ElectricNetwork,
    Generator,
    Line,
    RenewableCluster,
    validate_electric_network,
)


def test_valid_ring_has_empty_report(ring3):
    report = validate_electric_network(ring3)
    assert report.ok
    assert str(report) == "no findings"


def test_unknown_endpoint_is_reported(ring3):
    net = ElectricNetwork(
        buses=ring3.buses,
        lines=ring3.lines + (Line("LX", "B1", "B9", 100.0, 0.1),),
        generators=ring3.generators,
    )
    report = validate_electric_network(net)
    assert not report.ok
    assert any(f.kind == "line" and "unknown endpoint B9" in f.message
               for f in report.findings)


def test_two_slack_buses_in_one_island(ring3):
    net = ElectricNetwork(
        buses=(Bus("B1", True), Bus("B2", True), Bus("B3")),
        lines=ring3.lines,
        generators=ring3.generators,
    )
    report = validate_electric_network(net)
    assert any(f.kind == "topology" and "multiple slack buses" in f.message
               for f in report.findings)


def test_island_without_reference():
    net = ElectricNetwork(
        buses=(Bus("B1", True), Bus("B2"), Bus("B3")),
        lines=(Line("L12", "B1", "B2", 100.0, 0.1),),
        generators=(),
    )
    report = validate_electric_network(net)
    assert any("island without a reference bus" in f.message for f in report.findings)


def test_gfpp_flag_must_match_tech():
    net = ElectricNetwork(
        buses=(Bus("B1", True),),
        lines=(),
        generators=(Generator("G1", "B1", "coal", 100.0, gfpp=True),),
    )
    report = validate_electric_network(net)
    assert any(f.kind == "generator" and "gfpp" in f.message for f in report.findings)


def test_generator_limit_invariants():
    net = ElectricNetwork(
        buses=(Bus("B1", True),),
        lines=(),
        generators=(Generator("G1", "B1", "coal", 100.0, p_min_stable_mw=150.0),),
    )
    report = validate_electric_network(net)
    assert any("p_min_stable" in f.message for f in report.findings)


def test_cluster_checks():
    net = ElectricNetwork(
        buses=(Bus("B1", True),),
        lines=(),
        generators=(),
        clusters=(RenewableCluster("W1", "B9", "wind", -5.0, 8.0),),
    )
    report = validate_electric_network(net)
    messages = [f.message for f in report.findings]
    assert any("unknown bus" in m for m in messages)
    assert any("nonpositive capacity" in m for m in messages)


def test_validation_is_idempotent(ring3):
    first = validate_electric_network(ring3)
    second = validate_electric_network(ring3)
    assert [str(f) for f in first.findings] == [str(f) for f in second.findings]


def test_islands_partition(ring3):
    islands = ring3.islands()
    assert islands == [{"B1", "B2", "B3"}]
    cut = ElectricNetwork(
        buses=ring3.buses, lines=ring3.lines[:1], generators=())
    parts = cut.islands()
    assert len(parts) == 2
    assert {"B1", "B2"} in parts and {"B3"} in parts


def test_generator_scaled_keeps_ratios():
    g = Generator("G1", "B1", "coal", 100.0, 40.0, 50.0, 60.0)
    h = g.scaled(0.5)
    assert h.p_max_mw == 50.0
    assert h.p_min_stable_mw == 20.0
    assert h.ramp_up_mw_h == 25.0
    assert h.ramp_down_mw_h == 30.0
