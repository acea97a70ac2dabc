"""Shipped synthetic systems: desk-scale networks and a UK-shaped skeleton.

The real national datasets behind the study are proprietary, so the repo
carries deterministic synthetic stand-ins at three scales: a 10-node gas
network for conservation checks, a coupled desk system (~30 units, 30
pipes) for full studies, a small sweep system for N-1 exercises, and a
UK-shaped topology skeleton (29 buses / 99 lines / 60 plants / 9 solar /
14 wind clusters; 69 pipes / 21 compressors / 9 terminals / 9 storages)
that reproduces the published element counts for enumeration.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .fileio import write_electric, write_gas
from .gasnet import (
    Compressor,
    GasNetwork,
    GasNode,
    GasProperties,
    Injector,
    Pipe,
)
from .network import Bus, ElectricNetwork, Generator, Line, RenewableCluster
from .system import CoupledSystem, CouplingMap, CouplingPoint, bind_coupling
from .units import SECONDS_PER_DAY, mcm_per_day_to_kg_s

BAND = dict(p_min_bar=38.0, p_max_bar=95.0)


def _node(nid: str, p_min_bar: float = 38.0, p_max_bar: float = 95.0) -> GasNode:
    return GasNode(nid, p_min_bar * 1e5, p_max_bar * 1e5)


def _hours() -> np.ndarray:
    return np.arange(24, dtype=float)


def load_shape() -> np.ndarray:
    t = _hours()
    return 0.78 + 0.22 * np.sin(2 * math.pi * (t - 9.0) / 24.0)


def wind_shape() -> np.ndarray:
    t = _hours()
    return 0.45 + 0.20 * np.sin(2 * math.pi * (t - 2.0) / 24.0)


def solar_shape() -> np.ndarray:
    t = _hours()
    return np.clip(np.sin(math.pi * (t - 5.5) / 13.0), 0.0, None)


def gas_demand_shape() -> np.ndarray:
    t = _hours()
    shape = 1.0 + 0.22 * np.sin(2 * math.pi * (t - 12.0) / 24.0)
    return shape / shape.mean()


# --- ten-node gas network -----------------------------------------------------------


def ten_node_gas_network() -> GasNetwork:
    """Two zones joined by one compressor; loop in the supply zone."""
    nodes = tuple(_node(f"N{i:02d}") for i in range(1, 11))
    pipes = (
        Pipe("P01", "N01", "N02", 40e3, 0.9),
        Pipe("P02", "N02", "N03", 50e3, 0.9),
        Pipe("P03", "N03", "N04", 40e3, 0.9),
        Pipe("P04", "N02", "N05", 60e3, 0.7),
        Pipe("P05", "N05", "N04", 60e3, 0.7),   # loop N02-N04
        Pipe("P06", "N04", "N06", 30e3, 0.9),
        Pipe("P07", "N07", "N08", 40e3, 0.8),
        Pipe("P08", "N08", "N09", 40e3, 0.8),
        Pipe("P09", "N09", "N10", 30e3, 0.7),
    )
    compressors = (Compressor("K01", "N06", "N07", 1.15),)
    injectors = (
        Injector("T1", "N01", "terminal", 500.0),
        Injector("S1", "N05", "storage", 200.0),
        Injector("S2", "N08", "storage", 150.0),
    )
    return GasNetwork(nodes, pipes, compressors, injectors, (), GasProperties())


def ten_node_offtakes(total_kg_s: float = 300.0) -> dict[str, np.ndarray]:
    """Sinusoidal daily off-takes balanced to the given daily-average total."""
    shape = gas_demand_shape()
    split = {"N03": 0.2, "N06": 0.25, "N09": 0.25, "N10": 0.3}
    return {n: f * total_kg_s * shape for n, f in split.items()}


# --- desk-scale coupled system ------------------------------------------------------


def desk_gas_network() -> GasNetwork:
    """Three compressor-delimited zones, 32 nodes, 30 pipes (one loop)."""
    nodes = [f"A{i:02d}" for i in range(1, 13)] \
        + [f"B{i:02d}" for i in range(1, 12)] \
        + [f"C{i:02d}" for i in range(1, 10)]
    pipes = []
    # Zone A trunk and branch, with one loop A07-A10.
    for i in range(1, 10):
        pipes.append(Pipe(f"PA{i:02d}", f"A{i:02d}", f"A{i + 1:02d}", 45e3, 1.0))
    pipes.append(Pipe("PA10", "A03", "A11", 35e3, 0.8))
    pipes.append(Pipe("PA11", "A11", "A12", 35e3, 0.8))
    pipes.append(Pipe("PA12", "A10", "A07", 50e3, 0.8))
    # Zone B trunk and spur.
    for i in range(1, 10):
        pipes.append(Pipe(f"PB{i:02d}", f"B{i:02d}", f"B{i + 1:02d}", 40e3, 0.9))
    pipes.append(Pipe("PB10", "B07", "B11", 30e3, 0.7))
    # Zone C trunk and spur.
    for i in range(1, 8):
        pipes.append(Pipe(f"PC{i:02d}", f"C{i:02d}", f"C{i + 1:02d}", 40e3, 0.9))
    pipes.append(Pipe("PC08", "C05", "C09", 30e3, 0.7))
    compressors = (
        Compressor("K01", "A05", "B01", 1.15),
        Compressor("K02", "A08", "C01", 1.12),
        Compressor("K03", "A10", "B03", 1.10, drive="electric", electric_bus="E05"),
    )
    injectors = (
        Injector("T1", "A01", "terminal", 900.0),
        Injector("T2", "C02", "terminal", 350.0),
        Injector("S1", "A06", "storage", 250.0),
        Injector("S2", "B02", "storage", 250.0),
    )
    return GasNetwork(tuple(_node(n) for n in nodes), tuple(pipes),
                      compressors, injectors, (), GasProperties())


_DESK_TECHS = [
    # tech, p_max, p_min, ramp, min_up, min_dn, energy cost, startup cost
    ("nuclear", 1200.0, 600.0, 600.0, 8, 8, 9.0, 18000.0),
    ("coal", 600.0, 200.0, 300.0, 4, 4, 28.0, 8000.0),
    ("CCGT", 800.0, 160.0, 480.0, 3, 3, 45.0, 5000.0),
    ("CCGT", 750.0, 150.0, 450.0, 3, 3, 46.0, 5000.0),
    ("OCGT", 300.0, 30.0, 300.0, 1, 1, 80.0, 1500.0),
    ("oil", 200.0, 40.0, 200.0, 1, 1, 120.0, 1200.0),
    ("hydro", 400.0, 0.0, 400.0, 1, 1, 5.0, 500.0),
    ("bio/lignite", 300.0, 90.0, 150.0, 2, 2, 35.0, 3000.0),
    ("pumped-storage", 300.0, 0.0, 300.0, 1, 1, 2.0, 300.0),
    ("CCGT", 820.0, 170.0, 500.0, 3, 3, 44.0, 5200.0),
]


def desk_electric_network() -> ElectricNetwork:
    """12 buses, 16 lines, 30 units, 4 RES clusters, one boundary bus."""
    nb = 12
    buses = tuple(Bus(f"E{i:02d}", reference=(i == 1)) for i in range(1, nb + 1))
    lines = []
    for i in range(1, nb + 1):
        j = i % nb + 1
        lines.append(Line(f"L{i:02d}", f"E{i:02d}", f"E{j:02d}", 4000.0, 0.05))
    for k, (i, j) in enumerate(((1, 6), (3, 9), (5, 11), (7, 12)), start=1):
        lines.append(Line(f"LX{k:02d}", f"E{i:02d}", f"E{j:02d}", 3000.0, 0.08))
    gens = []
    for k in range(30):
        tech, pmax, pmin, ramp, mu, md, ce, cs = _DESK_TECHS[k % len(_DESK_TECHS)]
        bus = f"E{(k % nb) + 1:02d}"
        gens.append(Generator(
            f"G{k:02d}", bus, tech, pmax, pmin, ramp, ramp, mu, md,
            cost_energy=ce + 0.1 * (k // len(_DESK_TECHS)),
            cost_startup=cs, cost_shutdown=0.1 * cs,
            gfpp=tech in ("OCGT", "CCGT"),
        ))
    clusters = (
        RenewableCluster("W1", "E04", "wind", 4000.0, 8.0),
        RenewableCluster("W2", "E08", "wind", 2500.0, 8.0),
        RenewableCluster("S1", "E06", "solar", 1500.0, 5.0),
        RenewableCluster("S2", "E10", "solar", 1500.0, 5.0),
        RenewableCluster("R1", "E09", "RoR", 500.0, 3.0),
    )
    boundary = (("IC1", "E02"),)
    return ElectricNetwork(buses, tuple(lines), tuple(gens), clusters, boundary)


def desk_coupling(net_e: ElectricNetwork) -> CouplingMap:
    """Bind each GFPP to a gas node, spread over the three zones."""
    gas_nodes = ["B06", "B09", "C04", "C06", "A09", "B04", "C08", "A12", "B11", "C09"]
    entries = []
    gfpps = [g for g in net_e.generators if g.gfpp]
    for i, g in enumerate(gfpps):
        eta = 0.55 if g.tech == "CCGT" else 0.38
        entries.append(CouplingPoint(g.id, gas_nodes[i % len(gas_nodes)], eta, 52.0e6))
    return CouplingMap(tuple(entries))


def desk_system() -> CoupledSystem:
    net_e = desk_electric_network()
    return bind_coupling(net_e, desk_gas_network(), desk_coupling(net_e))


def desk_bundle_doc(reserve_mw: float = 3000.0) -> dict:
    """scenario.json content for the desk system (capacities mirror the network)."""
    net = desk_electric_network()
    caps: dict[str, float] = {}
    for g in net.generators:
        caps[g.tech] = caps.get(g.tech, 0.0) + g.p_max_mw
    for c in net.clusters:
        caps[c.kind] = caps.get(c.kind, 0.0) + c.capacity_mw
    load = 11000.0 * load_shape()
    wind = caps["wind"] * wind_shape()
    solar = caps["solar"] * 0.7 * solar_shape()
    ror = np.full(24, 200.0)
    imports = 400.0 * np.ones(24)
    doc = {
        "format": "nexus-scenario-1",
        "pathway": "synthetic-base",
        "year": 2025,
        "horizon_hours": 24,
        "capacity": {"unit": "MW", "values": {k: float(v) for k, v in sorted(caps.items())}},
        "load": {"unit": "MW", "values": [float(x) for x in load]},
        "wind": {"unit": "MW", "values": [float(x) for x in wind]},
        "solar": {"unit": "MW", "values": [float(x) for x in solar]},
        "ror": {"unit": "MW", "values": [float(x) for x in ror]},
        "interconnectors": {"IC1": {"unit": "MW", "values": [float(x) for x in imports]}},
        "non_electric_gas_demand": {
            "unit": "mcm_per_day", "value": 42.0,
            "hourly_shape": [float(x) for x in gas_demand_shape()],
        },
        "gas_export": {"unit": "mcm_per_day", "value": 3.0, "node": "C09"},
        "reserve": {"unit": "MW", "value": float(reserve_mw)},
    }
    return doc


def desk_snapshot_doc() -> dict:
    weights = np.array([1.2, 0.9, 1.1, 0.8, 1.0, 1.3, 0.7, 1.0, 0.9, 1.1, 0.8, 1.2])
    shares = weights / weights.sum()
    return {"shares": {f"E{i + 1:02d}": float(s) for i, s in enumerate(shares)}}


def desk_gas_split_doc() -> dict:
    fractions = {
        "A09": 0.10, "A12": 0.08, "B04": 0.12, "B07": 0.10, "B10": 0.14,
        "B11": 0.06, "C04": 0.14, "C06": 0.10, "C08": 0.10, "C09": 0.06,
    }
    return {"fractions": fractions}


# --- small sweep system -------------------------------------------------------------


def sweep_gas_network() -> GasNetwork:
    nodes = tuple(_node(n) for n in
                  ("N1", "N2", "N3", "N4", "N5", "N6", "N7", "N8"))
    pipes = (
        Pipe("P1", "N1", "N2", 40e3, 0.9),
        Pipe("P2", "N2", "N3", 40e3, 0.9),
        Pipe("P3", "N3", "N4", 40e3, 0.8),
        Pipe("P4", "N5", "N6", 40e3, 0.8),
        Pipe("P5", "N6", "N7", 40e3, 0.8),
        Pipe("P6", "N7", "N8", 30e3, 0.7),
    )
    compressors = (
        Compressor("K1", "N4", "N5", 1.15),
        Compressor("K2", "N2", "N6", 1.20),
    )
    injectors = (
        Injector("T1", "N1", "terminal", 450.0),
        Injector("S1", "N3", "storage", 150.0),
    )
    return GasNetwork(nodes, pipes, compressors, injectors, (), GasProperties())


def sweep_electric_network() -> ElectricNetwork:
    buses = tuple(Bus(f"E{i}", reference=(i == 1)) for i in range(1, 6))
    lines = (
        Line("L1", "E1", "E2", 1500.0, 0.06),
        Line("L2", "E2", "E3", 1500.0, 0.06),
        Line("L3", "E3", "E4", 1500.0, 0.06),
        Line("L4", "E4", "E5", 1500.0, 0.06),
        Line("L5", "E5", "E1", 1500.0, 0.06),
        Line("L6", "E2", "E4", 1200.0, 0.09),
    )
    gens = (
        Generator("GN1", "E1", "nuclear", 800.0, 400.0, 400.0, 400.0, 8, 8, 9.0, 9000.0, 900.0),
        Generator("GC1", "E2", "coal", 600.0, 200.0, 300.0, 300.0, 4, 4, 28.0, 5000.0, 500.0),
        Generator("GC2", "E4", "coal", 600.0, 200.0, 300.0, 300.0, 4, 4, 29.0, 5000.0, 500.0),
        Generator("GG1", "E3", "CCGT", 500.0, 100.0, 300.0, 300.0, 3, 3, 45.0, 3000.0, 300.0, True),
        Generator("GG2", "E5", "CCGT", 500.0, 100.0, 300.0, 300.0, 3, 3, 46.0, 3000.0, 300.0, True),
        Generator("GO1", "E3", "OCGT", 200.0, 20.0, 200.0, 200.0, 1, 1, 80.0, 800.0, 80.0, True),
        Generator("GH1", "E5", "hydro", 300.0, 0.0, 300.0, 300.0, 1, 1, 5.0, 300.0, 30.0),
        Generator("GL1", "E4", "oil", 250.0, 50.0, 250.0, 250.0, 1, 1, 120.0, 900.0, 90.0),
    )
    clusters = (
        RenewableCluster("W1", "E2", "wind", 900.0, 8.0),
        RenewableCluster("S1", "E3", "solar", 500.0, 5.0),
    )
    return ElectricNetwork(buses, lines, gens, clusters)


def sweep_system() -> CoupledSystem:
    net_e = sweep_electric_network()
    cmap = CouplingMap((
        CouplingPoint("GG1", "N4", 0.55, 52.0e6),
        CouplingPoint("GG2", "N8", 0.52, 52.0e6),
        CouplingPoint("GO1", "N7", 0.38, 52.0e6),
    ))
    return bind_coupling(net_e, sweep_gas_network(), cmap)


def sweep_bundle_doc(reserve_mw: float = 500.0) -> dict:
    net = sweep_electric_network()
    caps: dict[str, float] = {}
    for g in net.generators:
        caps[g.tech] = caps.get(g.tech, 0.0) + g.p_max_mw
    for c in net.clusters:
        caps[c.kind] = caps.get(c.kind, 0.0) + c.capacity_mw
    load = 2400.0 * load_shape()
    wind = caps["wind"] * wind_shape()
    solar = caps["solar"] * 0.7 * solar_shape()
    return {
        "format": "nexus-scenario-1",
        "pathway": "synthetic-sweep",
        "year": 2025,
        "horizon_hours": 24,
        "capacity": {"unit": "MW", "values": {k: float(v) for k, v in sorted(caps.items())}},
        "load": {"unit": "MW", "values": [float(x) for x in load]},
        "wind": {"unit": "MW", "values": [float(x) for x in wind]},
        "solar": {"unit": "MW", "values": [float(x) for x in solar]},
        "non_electric_gas_demand": {
            "unit": "mcm_per_day", "value": 12.0,
            "hourly_shape": [float(x) for x in gas_demand_shape()],
        },
        "reserve": {"unit": "MW", "value": float(reserve_mw)},
    }


def sweep_snapshot_doc() -> dict:
    return {"shares": {"E1": 0.15, "E2": 0.25, "E3": 0.20, "E4": 0.25, "E5": 0.15}}


def sweep_gas_split_doc() -> dict:
    return {"fractions": {"N3": 0.25, "N4": 0.20, "N6": 0.20, "N7": 0.15, "N8": 0.20}}


# --- tight-gas stress scenario ------------------------------------------------------
#
# A dawn cold-snap surge forces the CCGT up right at the start of the
# balancing day, before any linepack refill has accrued, so the corridor
# drains through contracted delivery-pressure floors.  Flat firm off-takes
# keep the firm-only day clean: the violation is entirely GFPP-driven and
# the curtailment loop can cure it.

TIGHT_ANCHOR_PA = 48.5e5


def tight_system() -> CoupledSystem:
    """Two-bus system whose dawn GFPP surge drains one gas corridor."""
    buses = (Bus("E1", True), Bus("E2"))
    lines = (Line("L1", "E1", "E2", 3000.0, 0.08),)
    gens = (
        Generator("GB1", "E1", "coal", 1000.0, 250.0, 500.0, 500.0, 4, 4, 25.0, 4000.0, 400.0),
        Generator("GF1", "E2", "CCGT", 1000.0, 100.0, 600.0, 600.0, 2, 2, 40.0, 2500.0, 250.0, True),
        Generator("GX1", "E2", "oil", 900.0, 50.0, 900.0, 900.0, 1, 1, 110.0, 1000.0, 100.0),
    )
    net_e = ElectricNetwork(buses, lines, gens, ())
    # Delivery-pressure floors step down along the corridor.
    nodes = (
        GasNode("N1", 46.9e5, 95e5),
        GasNode("N2", 44.1e5, 95e5),
        GasNode("N3", 42.7e5, 95e5),
    )
    pipes = (
        Pipe("P1", "N1", "N2", 60e3, 0.9),
        Pipe("P2", "N2", "N3", 60e3, 0.8),
    )
    injectors = (Injector("T1", "N1", "terminal", 350.0),)
    net_g = GasNetwork(nodes, pipes, (), injectors, (), GasProperties())
    cmap = CouplingMap((CouplingPoint("GF1", "N3", 0.50, 50.0e6),))
    return bind_coupling(net_e, net_g, cmap)


def tight_inputs():
    """Hourly inputs and firm gas off-takes for the tight-gas scenario."""
    from .coupling import CoupleOptions, GasScenario
    from .uc import UcInputs

    t = _hours()
    surge = np.exp(-0.5 * ((t - 6.5) / 2.5) ** 2)
    load = 900.0 + 600.0 * surge
    inputs = UcInputs(
        horizon=24,
        bus_load_mw={"E1": 0.25 * load, "E2": 0.75 * load},
        initial_state={"GB1": (1, 900.0)},
    )
    gas = GasScenario(firm_offtakes_kg_s={
        "N2": np.full(24, 55.0),
        "N3": np.full(24, 55.0),
    })
    options = CoupleOptions(init_ref_node="N1", init_ref_pressure_pa=TIGHT_ANCHOR_PA)
    return inputs, gas, options


# --- UK-shaped skeleton -------------------------------------------------------------


def uk_shaped_electric() -> ElectricNetwork:
    """29 buses, 99 lines, 60 conventional plants, 9 solar and 14 wind clusters."""
    nb = 29
    buses = tuple(Bus(f"E{i:02d}", reference=(i == 1)) for i in range(1, nb + 1))
    lines = []
    k = 0
    for stride, count in ((1, 29), (2, 29), (5, 29), (9, 12)):
        for i in range(count):
            k += 1
            a = i % nb
            b = (i + stride) % nb
            lines.append(Line(f"L{k:03d}", f"E{a + 1:02d}", f"E{b + 1:02d}",
                              2000.0, 0.05 + 0.01 * (stride % 3)))
    conv = [t for t in _DESK_TECHS if t[0] not in ("wind", "solar", "RoR")]
    gens = []
    for k in range(60):
        tech, pmax, pmin, ramp, mu, md, ce, cs = conv[k % len(conv)]
        bus = f"E{(k % nb) + 1:02d}"
        gens.append(Generator(f"G{k:02d}", bus, tech, pmax, pmin, ramp, ramp,
                              mu, md, ce, cs, 0.1 * cs,
                              gfpp=tech in ("OCGT", "CCGT")))
    clusters = []
    for i in range(9):
        clusters.append(RenewableCluster(f"S{i + 1:02d}", f"E{i + 1:02d}", "solar",
                                         800.0, 5.0))
    for i in range(14):
        clusters.append(RenewableCluster(f"W{i + 1:02d}", f"E{(2 * i) % nb + 1:02d}",
                                         "wind", 1500.0 + 100.0 * (i % 5), 8.0))
    return ElectricNetwork(buses, tuple(lines), tuple(gens), tuple(clusters))


def uk_shaped_gas() -> GasNetwork:
    """Chain of 91 nodes: 69 pipes and 21 compressor stations, 9 + 9 injectors."""
    n_nodes = 91
    nodes = tuple(_node(f"N{i:02d}") for i in range(1, n_nodes + 1))
    pipes = []
    comps = []
    comp_positions = {4 * j for j in range(1, 22)}     # 21 stations
    pk = ck = 0
    for i in range(1, n_nodes):
        a, b = f"N{i:02d}", f"N{i + 1:02d}"
        if i in comp_positions:
            ck += 1
            comps.append(Compressor(f"K{ck:02d}", a, b, 1.1 + 0.01 * (ck % 5)))
        else:
            pk += 1
            pipes.append(Pipe(f"P{pk:02d}", a, b, 30e3 + 5e3 * (pk % 4), 0.9))
    injectors = []
    for j in range(9):
        injectors.append(Injector(f"T{j + 1}", f"N{(10 * j) + 1:02d}", "terminal", 300.0))
    for j in range(9):
        injectors.append(Injector(f"S{j + 1}", f"N{(10 * j) + 6:02d}", "storage", 120.0))
    return GasNetwork(nodes, tuple(pipes), tuple(comps), tuple(injectors),
                      (), GasProperties())


def uk_shaped_system() -> CoupledSystem:
    net_e = uk_shaped_electric()
    gfpps = [g for g in net_e.generators if g.gfpp]
    entries = tuple(
        CouplingPoint(g.id, f"N{(7 * i) % 91 + 1:02d}",
                      0.55 if g.tech == "CCGT" else 0.38, 52.0e6)
        for i, g in enumerate(gfpps)
    )
    return bind_coupling(net_e, uk_shaped_gas(), CouplingMap(entries))


# --- bundle directory emission ------------------------------------------------------


def write_bundle(path: str | Path, which: str = "desk") -> Path:
    """Write a complete runnable scenario directory (networks + bundle files)."""
    import json

    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if which == "desk":
        sys = desk_system()
        docs = {
            "scenario.json": desk_bundle_doc(),
            "load_snapshot.json": desk_snapshot_doc(),
            "gas_demand_split.json": desk_gas_split_doc(),
        }
    elif which == "sweep":
        sys = sweep_system()
        docs = {
            "scenario.json": sweep_bundle_doc(),
            "load_snapshot.json": sweep_snapshot_doc(),
            "gas_demand_split.json": sweep_gas_split_doc(),
        }
    else:
        raise ValueError(f"unknown bundle kind {which!r}")
    write_electric(sys.electric, sys.coupling, path / "electric.json")
    write_gas(sys.gas, path / "gas.json")
    for name, doc in docs.items():
        (path / name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path
